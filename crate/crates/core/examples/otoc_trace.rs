//! C_ZZ(t) for one random-sign Hadamard realization at n = 12, k = 8.
use rsed::otoc::otoc_zz_exact;
use rsed::randomness::{streams, PermutationBackend, RngSeed, SignBackend, SignFunction, SubsetPermutation};
use rsed::subsystem::{random_sign_hadamard, unitary_power};
use rsed::{RsedOperator, SystemShape};

fn main() -> rsed::Result<()> {
    let shape = SystemShape::new(12, 8)?;
    let p = SubsetPermutation::sample(shape, RngSeed::new(7, streams::PERMUTATION), PermutationBackend::Auto)?;
    let f = SignFunction::sample(shape, RngSeed::new(7, streams::SIGN), SignBackend::Auto)?;
    let u = random_sign_hadamard(8, RngSeed::new(7, streams::SUB_SIGN))?;
    let op = RsedOperator::new(p, f, u.clone())?;
    println!("t      C_ZZ");
    for i in 0..=8 {
        let t = 0.5 * i as f64;
        let o = otoc_zz_exact(&op.with_sub(unitary_power(&u, t)?)?, 0, 11)?;
        println!("{t:<6} {:.6}", o.poisson_bracket());
    }
    Ok(())
}
