//! Synthesize the embedding circuit, print it, parse it back and compare
//! against the blockwise operator.
use rsed::circuits::{parse, serialize, synthesize_rsed_circuit, CircuitEvolution, USpec};
use rsed::linalg::max_abs_diff;
use rsed::{Evolution, SystemShape};

fn main() -> rsed::Result<()> {
    let shape = SystemShape::new(8, 4)?;
    let synth = synthesize_rsed_circuit(shape, USpec::RandomSignHadamard { seed: 5 }, 11, 12)?;
    let text = serialize(&synth.circuit);
    print!("{text}");
    let back = parse(&text)?;
    assert_eq!(back, synth.circuit);
    let dense = CircuitEvolution::new(&back, &synth.registry)?.dense()?;
    println!("max deviation from operator: {:.2e}", max_abs_diff(&dense, &synth.operator()?.dense_matrix()?));
    println!("{}", synth.manifest.to_json()?);
    Ok(())
}
