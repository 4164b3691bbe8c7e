//! Form factor of a Pauli SYK subsystem and of its embedding.
use rsed::randomness::{streams, RngSeed};
use rsed::spectra::{rsed_sff, spectral_form_factor};
use rsed::subsystem::pauli_syk;
use rsed::SystemShape;

fn main() -> rsed::Result<()> {
    let shape = SystemShape::new(10, 6)?;
    let h = pauli_syk(6, RngSeed::new(3, streams::COUPLINGS), None)?;
    println!("t      R2_sub        R2_rsed       ratio");
    for i in 0..8 {
        let t = 2f64.powi(i);
        let sub = spectral_form_factor(&h, 0.5, t)?;
        let full = rsed_sff(shape, &h, 0.5, t)?;
        println!("{t:<6} {sub:<13.6e} {full:<13.6e} {}", full / sub);
    }
    Ok(())
}
