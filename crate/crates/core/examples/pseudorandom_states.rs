//! Type-state reference versus the sign-averaged ensemble, and the
//! design conditions on (H P)^4.
use rsed::prs::{design_variance_condition, element_condition_check, f_ensemble_state, hybrid3_state, trace_distance};
use rsed::randomness::{streams, PermutationBackend, RngSeed, SubsetPermutation};
use rsed::subsystem::{hadamard_layer, random_sign_hadamard, unitary_power};
use rsed::SystemShape;

fn main() -> rsed::Result<()> {
    let shape = SystemShape::new(6, 4)?;
    let p = SubsetPermutation::sample(shape, RngSeed::new(1, streams::PERMUTATION), PermutationBackend::Auto)?;
    let u = hadamard_layer(4)?;
    for t in 1..=2 {
        let ens = f_ensemble_state(&u, &p, 0, 0, t, 200, RngSeed::new(1, streams::SIGN))?;
        let hyb = hybrid3_state(&p, 0, shape, t)?;
        println!("t={t}: TD = {:.4}", trace_distance(&ens.rho, &hyb.rho)?);
    }
    let v = unitary_power(&random_sign_hadamard(6, RngSeed::new(2, streams::SUB_SIGN))?, 4.0)?;
    let y = design_variance_condition(&v, 2, 0)?;
    let e = element_condition_check(&v, 0.5);
    println!("Y = {:.4}, exceed fraction = {:.4}", y.value, e.exceed_fraction);
    Ok(())
}
