//! Thermal OTOC of a random-sign Hadamard embedding at n = 8, k = 4.
use std::f64::consts::PI;

use rsed::otoc::{otoc_finite_temperature, ThermalMode};
use rsed::randomness::{streams, PermutationBackend, RngSeed, SignBackend, SignFunction, SubsetPermutation};
use rsed::subsystem::{evolve, parent_hamiltonian, random_sign_hadamard};
use rsed::{PauliString, RsedOperator, SystemShape};

fn main() -> rsed::Result<()> {
    let shape = SystemShape::new(8, 4)?;
    let u = random_sign_hadamard(4, RngSeed::new(2, streams::SUB_SIGN))?;
    let h = parent_hamiltonian(&u)?;
    let p = SubsetPermutation::sample(shape, RngSeed::new(2, streams::PERMUTATION), PermutationBackend::Auto)?;
    let f = SignFunction::sample(shape, RngSeed::new(2, streams::SIGN), SignBackend::Auto)?;
    let op = RsedOperator::new(p, f, u)?;
    let (v, w) = (PauliString::z(0), PauliString::z(7));
    println!("beta  t    C_exact   O_leading");
    for beta in [0.0, 1.0, 10.0] {
        for t in 1..=4 {
            let o = op.with_sub(evolve(&h, 2.0 * PI * t as f64))?;
            let exact = otoc_finite_temperature(&o, &h, beta, &v, &w, ThermalMode::Exact)?;
            let lead = otoc_finite_temperature(&o, &h, beta, &v, &w, ThermalMode::Leading)?;
            println!("{beta:<5} {t:<4} {:<9.5} {:.5}", exact.poisson_bracket(), lead.value.re);
        }
    }
    Ok(())
}
