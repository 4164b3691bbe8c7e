//! Spacing statistics of parent Hamiltonians of H^{(x)8} P against the
//! Wigner surmise, plus the degenerate peak of the embedded spectrum.
use rsed::randomness::{streams, RngSeed};
use rsed::spectra::{embed_spectrum, ks_distance, level_spacing_stats, Ensemble};
use rsed::subsystem::{parent_hamiltonian, random_sign_hadamard};
use rsed::SystemShape;

fn main() -> rsed::Result<()> {
    let mut pooled = Vec::new();
    let mut first = Vec::new();
    for s in 0..20 {
        let h = parent_hamiltonian(&random_sign_hadamard(8, RngSeed::new(s, streams::SUB_SIGN))?)?;
        if s == 0 {
            first = h.eigenvalues().to_vec();
        }
        pooled.extend(level_spacing_stats(h.eigenvalues(), true, None)?.spacings);
    }
    println!("pooled spacings: {}", pooled.len());
    println!("KS to GOE: {:.4}", ks_distance(&pooled, Ensemble::Goe));
    println!("KS to GUE: {:.4}", ks_distance(&pooled, Ensemble::Gue));

    let shape = SystemShape::new(12, 8)?;
    let full = level_spacing_stats(&embed_spectrum(shape, &first)?, false, None)?;
    println!("embedded zero-gap fraction {:.4}, multiplicity {}", full.zero_gap_fraction, full.degeneracy_multiplicity);
    Ok(())
}
