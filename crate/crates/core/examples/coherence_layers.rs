//! Coherence of a subset-phase state, then after Hadamard and T layers.
use rsed::prs::{append_layer, coherence_rel_entropy, entanglement_entropy, subset_phase_state, EntropyUnit, Layer, StateRef};
use rsed::randomness::{streams, PermutationBackend, RngSeed, SignBackend, SignFunction, SubsetPermutation};
use rsed::SystemShape;

fn main() -> rsed::Result<()> {
    let shape = SystemShape::new(10, 5)?;
    let p = SubsetPermutation::sample(shape, RngSeed::new(4, streams::PERMUTATION), PermutationBackend::Auto)?;
    let f = SignFunction::sample(shape, RngSeed::new(4, streams::SIGN), SignBackend::Auto)?;
    let psi = subset_phase_state(&p, &f, 0, shape)?;
    let bits = |s: &rsed::StateVector| coherence_rel_entropy(StateRef::Pure(s), EntropyUnit::Bits);
    println!("subset-phase: {:.4} bits", bits(&psi)?);
    let h = append_layer(&psi, &Layer::HadamardLayer((0..10).collect()))?;
    println!("+ hadamard:   {:.4} bits", bits(&h)?);
    let t = append_layer(&h, &Layer::TLayer(vec![0, 3, 7]))?;
    println!("+ T gates:    {:.4} bits", bits(&t)?);
    println!("entanglement across 0..5 | 5..10: {:.4} nats", entanglement_entropy(&t, &[0, 1, 2, 3, 4])?);
    Ok(())
}
