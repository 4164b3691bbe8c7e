//! A four-round Feistel permutation on 24 bits, and its round expansion.
use rsed::circuits::{serialize, synthesize_rsed_circuit, USpec};
use rsed::randomness::{streams, PermutationBackend, RngSeed, SubsetPermutation};
use rsed::SystemShape;

fn main() -> rsed::Result<()> {
    let shape = SystemShape::new(24, 6)?;
    let p = SubsetPermutation::sample(shape, RngSeed::new(9, streams::PERMUTATION), PermutationBackend::Auto)?;
    println!("backend: {}", p.backend_name());
    for x in [0usize, 1, 2, 0xabcdef] {
        let y = p.permute(x)?;
        println!("{x:#08x} -> {y:#08x} -> {:#08x}", p.invert(y)?);
    }
    let synth = synthesize_rsed_circuit(shape, USpec::Hadamard, 9, 9)?;
    print!("{}", serialize(&synth.expand_feistel()?));
    Ok(())
}
