//! Level-spacing statistics and spectral form factors.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bitcore::SystemShape;
use crate::error::{Error, Result};
use crate::linalg::{self, c};
use crate::subsystem::SubHamiltonian;

pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Ensemble {
    Goe,
    Gue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
}

impl Histogram {
    /// Density histogram on `[lo, hi)` with `bins` equal bins; samples
    /// outside the range still count toward the normalization.
    pub fn new(samples: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::domain("histogram needs bins > 0 and hi > lo"));
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &s in samples {
            if s >= lo && s < hi {
                counts[(((s - lo) / width) as usize).min(bins - 1)] += 1;
            }
        }
        let total = samples.len().max(1) as f64;
        Ok(Histogram {
            edges: (0..=bins).map(|i| lo + width * i as f64).collect(),
            densities: counts.iter().map(|&n| n as f64 / (total * width)).collect(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,density\n");
        for (i, d) in self.densities.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", self.edges[i], self.edges[i + 1], d));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    /// Retained gaps divided by their mean.
    pub spacings: Vec<f64>,
    /// Largest number of eigenvalues sharing one level.
    pub degeneracy_multiplicity: usize,
    /// Fraction of all raw gaps below the tolerance.
    pub zero_gap_fraction: f64,
    pub tolerance: f64,
    pub histogram: Histogram,
}

/// Sort, take nearest-neighbour gaps, optionally drop gaps below
/// `tolerance` (default `1e-10` times the spectral range), and rescale the
/// rest to unit mean.
pub fn level_spacing_stats(evals: &[f64], exclude_degenerate: bool, tolerance: Option<f64>) -> Result<SpectrumReport> {
    if evals.len() < 3 {
        return Err(Error::domain("level statistics need at least three eigenvalues"));
    }
    let mut sorted = evals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let range = sorted[sorted.len() - 1] - sorted[0];
    let tol = tolerance.unwrap_or(DEFAULT_RELATIVE_TOLERANCE * range);
    let gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    let zeros = gaps.iter().filter(|&&g| g < tol).count();

    let mut mult = 1;
    let mut run = 1;
    for &g in &gaps {
        if g < tol {
            run += 1;
            mult = mult.max(run);
        } else {
            run = 1;
        }
    }

    let kept: Vec<f64> = if exclude_degenerate { gaps.iter().copied().filter(|&g| g >= tol).collect() } else { gaps.clone() };
    if kept.is_empty() {
        return Err(Error::domain("no level spacings left after removing degeneracies"));
    }
    let mean = linalg::pairwise_sum(&kept) / kept.len() as f64;
    if mean <= 0.0 {
        return Err(Error::domain("spectrum is fully degenerate"));
    }
    let spacings: Vec<f64> = kept.iter().map(|g| g / mean).collect();
    let histogram = Histogram::new(&spacings, 40, 0.0, 4.0)?;
    Ok(SpectrumReport {
        eigenvalues: sorted,
        spacings,
        degeneracy_multiplicity: mult,
        zero_gap_fraction: zeros as f64 / gaps.len() as f64,
        tolerance: tol,
        histogram,
    })
}

/// Wigner surmise density.
pub fn wigner_dyson_pdf(s: f64, ensemble: Ensemble) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::domain(format!("spacing must be >= 0, got {s}")));
    }
    Ok(match ensemble {
        Ensemble::Goe => 0.5 * PI * s * (-0.25 * PI * s * s).exp(),
        Ensemble::Gue => 32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp(),
    })
}

/// Cumulative distribution of the Wigner surmise.
pub fn wigner_dyson_cdf(s: f64, ensemble: Ensemble) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    match ensemble {
        Ensemble::Goe => 1.0 - (-0.25 * PI * s * s).exp(),
        Ensemble::Gue => libm::erf(2.0 * s / PI.sqrt()) - 4.0 * s / PI * (-4.0 * s * s / PI).exp(),
    }
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `samples` and the surmise.
pub fn ks_distance(samples: &[f64], ensemble: Ensemble) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = wigner_dyson_cdf(x, ensemble);
            (f - i as f64 / m).abs().max((f - (i + 1) as f64 / m).abs())
        })
        .fold(0.0, f64::max)
}

/// `|sum_m e^{-(beta + i t) eps_m}|^2`.
pub fn sff_from_eigenvalues(evals: &[f64], beta: f64, t: f64) -> Result<f64> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::domain(format!("beta must be >= 0, got {beta}")));
    }
    let terms: Vec<C64> = evals.iter().map(|&e| c(-beta * e, -t * e).exp()).collect();
    Ok(linalg::pairwise_sum(&terms).norm_sqr())
}

pub fn spectral_form_factor(h: &SubHamiltonian, beta: f64, t: f64) -> Result<f64> {
    sff_from_eigenvalues(h.eigenvalues(), beta, t)
}

/// Form factor of the embedded Hamiltonian: `4^{n-k}` times the
/// subsystem value.
pub fn rsed_sff(shape: SystemShape, h: &SubHamiltonian, beta: f64, t: f64) -> Result<f64> {
    if h.k() != shape.k() {
        return Err(Error::ShapeMismatch { expected: format!("k = {}", shape.k()), got: format!("k = {}", h.k()) });
    }
    let a = shape.num_seeds() as f64;
    Ok(a * a * spectral_form_factor(h, beta, t)?)
}

/// Each subsystem eigenvalue repeated `2^{n-k}` times.
pub fn embed_spectrum(shape: SystemShape, evals_sub: &[f64]) -> Result<Vec<f64>> {
    if evals_sub.len() != shape.sub_dim() {
        return Err(Error::ShapeMismatch { expected: format!("{} eigenvalues", shape.sub_dim()), got: evals_sub.len().to_string() });
    }
    Ok(evals_sub.iter().flat_map(|&e| std::iter::repeat_n(e, shape.num_seeds())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(f: impl Fn(f64) -> f64) -> f64 {
        // composite Simpson on [0, 12]
        let n = 24_000;
        let h = 12.0 / n as f64;
        let mut acc = f(0.0) + f(12.0);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn equally_spaced() {
        let r = level_spacing_stats(&[3.0, 0.0, 2.0, 1.0], false, None).unwrap();
        assert!(r.spacings.iter().all(|&s| (s - 1.0).abs() < 1e-15));
        assert_eq!(r.degeneracy_multiplicity, 1);
        assert!(level_spacing_stats(&[1.0, 2.0], false, None).is_err());
    }

    #[test]
    fn embedded_zero_gap_fraction() {
        let shape = SystemShape::new(7, 3).unwrap();
        let sub: Vec<f64> = (0..8).map(|i| (i as f64).powf(1.3)).collect();
        let full = embed_spectrum(shape, &sub).unwrap();
        let r = level_spacing_stats(&full, false, None).unwrap();
        let (nn, kk) = (128.0, 8.0);
        assert!((r.zero_gap_fraction - (nn - kk) / (nn - 1.0)).abs() < 1e-15);
        assert_eq!(r.degeneracy_multiplicity, 16);
        let ex = level_spacing_stats(&full, true, None).unwrap();
        assert_eq!(ex.spacings.len(), 7);
        let mean = ex.spacings.iter().sum::<f64>() / 7.0;
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn surmise_normalization() {
        for e in [Ensemble::Goe, Ensemble::Gue] {
            assert_eq!(wigner_dyson_pdf(0.0, e).unwrap(), 0.0);
            let norm = quad(|s| wigner_dyson_pdf(s, e).unwrap());
            let mean = quad(|s| s * wigner_dyson_pdf(s, e).unwrap());
            assert!((norm - 1.0).abs() < 1e-6 && (mean - 1.0).abs() < 1e-6);
            for s in [0.3, 1.0, 2.2] {
                let integ = {
                    let n = 20_000;
                    let h = s / n as f64;
                    (0..n).map(|i| wigner_dyson_pdf((i as f64 + 0.5) * h, e).unwrap() * h).sum::<f64>()
                };
                assert!((integ - wigner_dyson_cdf(s, e)).abs() < 1e-7);
            }
            assert!(wigner_dyson_pdf(-0.1, e).is_err());
        }
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let m = 2000;
        // Inverse-CDF samples of the GOE surmise.
        let xs: Vec<f64> = (0..m)
            .map(|i| {
                let q = (i as f64 + 0.5) / m as f64;
                (-4.0 / PI * (1.0 - q).ln()).sqrt()
            })
            .collect();
        assert!(ks_distance(&xs, Ensemble::Goe) < 1e-3);
        assert!(ks_distance(&xs, Ensemble::Gue) > 0.03);
    }

    #[test]
    fn sff_basics() {
        let evals = [0.3, -0.2, 0.9, 0.1];
        assert!((sff_from_eigenvalues(&evals, 0.0, 0.0).unwrap() - 16.0).abs() < 1e-12);
        let single = sff_from_eigenvalues(&[0.7], 1.5, 3.0).unwrap();
        assert!((single - (-2.0 * 1.5 * 0.7f64).exp()).abs() < 1e-15);
        assert!(sff_from_eigenvalues(&evals, -1.0, 0.0).is_err());
    }

    #[test]
    fn embed_examples() {
        let s = SystemShape::new(3, 1).unwrap();
        assert_eq!(embed_spectrum(s, &[-1.0, 1.0]).unwrap(), vec![-1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0]);
        let s = SystemShape::new(2, 2).unwrap();
        assert_eq!(embed_spectrum(s, &[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(embed_spectrum(s, &[1.0]).is_err());
    }

    #[test]
    fn histogram_csv() {
        let h = Histogram::new(&[0.5, 1.5, 1.6], 2, 0.0, 2.0).unwrap();
        assert_eq!(h.to_csv(), "bin_left,bin_right,density\n0,1,0.3333333333333333\n1,2,0.6666666666666666\n");
    }
}
