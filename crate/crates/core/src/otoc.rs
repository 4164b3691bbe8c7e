//! Out-of-time-ordered correlators.
//!
//! `O_VW = 2^{-n} tr(V U W U^dagger V U W U^dagger)` and the
//! Poisson-bracket form `C_VW = 1 - Re O_VW`.

use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitcore::{bit, parity_sign};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::operator::{check_dense, Evolution, PauliString, RsedOperator, StateVector};
use crate::randomness::RngSeed;
use crate::subsystem::{SubHamiltonian, SubUnitary};

pub const DEFAULT_PROBES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorTag {
    ZzExact,
    ZzSampled,
    PauliExact,
    PauliStochastic,
    FiniteTemperatureExact,
    FiniteTemperatureLeading,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OtocMeta {
    pub n: u32,
    pub k: u32,
    pub sites: String,
    pub estimator: EstimatorTag,
    /// Seed blocks or probe vectors used.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OtocEstimate {
    #[serde(serialize_with = "ser_complex")]
    pub value: C64,
    pub std_error: f64,
    pub t: f64,
    pub meta: OtocMeta,
}

fn ser_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

impl OtocEstimate {
    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// `C = 1 - Re O`.
    pub fn poisson_bracket(&self) -> f64 {
        poisson_bracket(self.value)
    }
}

pub fn poisson_bracket(value: C64) -> f64 {
    1.0 - value.re
}

fn check_zz_sites(op: &RsedOperator, i: u32, j: u32) -> Result<()> {
    op.shape().check_site(i)?;
    op.shape().check_site(j)?;
    if i == j {
        return Err(Error::domain("ZZ OTOC needs distinct sites i != j"));
    }
    Ok(())
}

/// Diagonal signs `(-1)^{[p(join(b, a))]_site}` for every `b`.
fn block_signs(images: &[usize], site: u32) -> Vec<f64> {
    images.iter().map(|&y| parity_sign(bit(y, site))).collect()
}

/// `K^{-1} tr(D_i u D_j u^dagger D_i u D_j u^dagger)` for one seed block.
fn seed_value(op: &RsedOperator, u: &CMat, ud: &CMat, a: usize, i: u32, j: u32) -> f64 {
    let kd = op.shape().sub_dim();
    let mut images = vec![0usize; kd];
    op.perm().block_images(a, &mut images);
    let di = block_signs(&images, i);
    let dj = block_signs(&images, j);
    let mut w = u.clone();
    for (col, &s) in dj.iter().enumerate() {
        if s < 0.0 {
            w.column_mut(col).neg_mut();
        }
    }
    let g = w * ud;
    let mut rows = Vec::with_capacity(kd);
    for b1 in 0..kd {
        let mut acc = 0.0;
        for b3 in 0..kd {
            acc += di[b3] * g[(b1, b3)].norm_sqr();
        }
        rows.push(di[b1] * acc);
    }
    linalg::pairwise_sum(&rows) / kd as f64
}

fn zz_meta(op: &RsedOperator, i: u32, j: u32, estimator: EstimatorTag, samples: usize) -> OtocMeta {
    OtocMeta { n: op.shape().n(), k: op.shape().k(), sites: format!("Z{i} Z{j}"), estimator, samples }
}

fn seed_values(op: &RsedOperator, seeds: &[usize], i: u32, j: u32) -> Vec<f64> {
    let u = op.sub().matrix();
    let ud = u.adjoint();
    seeds.par_iter().map(|&a| seed_value(op, u, &ud, a, i, j)).collect()
}

/// Exact `O_{Z_i Z_j}` by enumerating every seed block. The operator's
/// subsystem unitary is used as-is, so pass `u^t` to get time `t`.
pub fn otoc_zz_exact(op: &RsedOperator, i: u32, j: u32) -> Result<OtocEstimate> {
    check_zz_sites(op, i, j)?;
    if op.shape().seed_bits() > 20 {
        return Err(Error::capacity("exact ZZ OTOC limited to n - k <= 20"));
    }
    let seeds: Vec<usize> = (0..op.shape().num_seeds()).collect();
    let vals = seed_values(op, &seeds, i, j);
    let value = linalg::pairwise_sum(&vals) / vals.len() as f64;
    Ok(OtocEstimate {
        value: c(value, 0.0),
        std_error: 0.0,
        t: 0.0,
        meta: zz_meta(op, i, j, EstimatorTag::ZzExact, seeds.len()),
    })
}

/// Importance-sampled `O_{Z_i Z_j}` over `num_seeds` uniformly drawn seed
/// blocks (with replacement). Asking for at least all `2^{n-k}` blocks
/// falls back to the exhaustive sum, which is bitwise identical to
/// [`otoc_zz_exact`].
pub fn otoc_zz_sampled(op: &RsedOperator, i: u32, j: u32, num_seeds: usize, seed: RngSeed) -> Result<OtocEstimate> {
    check_zz_sites(op, i, j)?;
    if num_seeds < 2 {
        return Err(Error::domain("sampled OTOC needs at least two seeds"));
    }
    let total = op.shape().num_seeds();
    if num_seeds >= total {
        let mut est = otoc_zz_exact(op, i, j)?;
        est.meta.estimator = EstimatorTag::ZzSampled;
        return Ok(est);
    }
    let mut rng = seed.rng();
    let seeds: Vec<usize> = (0..num_seeds).map(|_| rng.gen_range(0..total)).collect();
    let vals = seed_values(op, &seeds, i, j);
    let m = vals.len() as f64;
    let mean = linalg::pairwise_sum(&vals) / m;
    let sq: Vec<f64> = vals.iter().map(|v| (v - mean).powi(2)).collect();
    let var = linalg::pairwise_sum(&sq) / (m - 1.0);
    Ok(OtocEstimate {
        value: c(mean, 0.0),
        std_error: (var / m).sqrt(),
        t: 0.0,
        meta: zz_meta(op, i, j, EstimatorTag::ZzSampled, seeds.len()),
    })
}

/// Sign-function average `2^{-k} sum_{b,b'} |u_{bb'}|^4`.
pub fn otoc_zz_f_average(u: &SubUnitary) -> f64 {
    let fourth: Vec<f64> = u.matrix().iter().map(|z| z.norm_sqr().powi(2)).collect();
    linalg::pairwise_sum(&fourth) / u.dim() as f64
}

/// The same average for `u = H^{(x)k} P` raised to an integer power,
/// streamed column by column with fast Walsh-Hadamard transforms so the
/// `K x K` matrix is never stored. `signs` are the bits of `P`.
pub fn otoc_zz_f_average_hadamard_power(k: u32, signs: &[u8], power: u32) -> Result<f64> {
    if k == 0 || k > 24 {
        return Err(Error::capacity("streamed Hadamard power limited to k <= 24"));
    }
    let kd = 1usize << k;
    if signs.len() != kd {
        return Err(Error::ShapeMismatch { expected: format!("{kd} sign bits"), got: signs.len().to_string() });
    }
    let norm = (kd as f64).sqrt().recip();
    let cols: Vec<f64> = (0..kd)
        .into_par_iter()
        .map(|col| {
            let mut v = vec![0.0f64; kd];
            v[col] = 1.0;
            for _ in 0..power {
                for (b, x) in v.iter_mut().enumerate() {
                    *x *= parity_sign(signs[b]);
                }
                linalg::fwht(&mut v);
                v.iter_mut().for_each(|x| *x *= norm);
            }
            let fourth: Vec<f64> = v.iter().map(|x| x.powi(4)).collect();
            linalg::pairwise_sum(&fourth)
        })
        .collect();
    Ok(linalg::pairwise_sum(&cols) / kd as f64)
}

/// Closed-form variance of the ZZ OTOC for `u = H^{(x)k}` over random
/// `(p, f)`: `8/2^{n+k} - 6/2^{n+2k} + 1/2^{n+3k}`.
pub fn otoc_zz_f_variance_hadamard(n: u32, k: u32) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("need 1 <= k <= n, got n = {n}, k = {k}")));
    }
    let (n, k) = (n as i32, k as i32);
    Ok(8.0 * 2f64.powi(-(n + k)) - 6.0 * 2f64.powi(-(n + 2 * k)) + 2f64.powi(-(n + 3 * k)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PauliMode {
    Exact,
    Stochastic { probes: usize, seed: RngSeed },
}

/// Generic `O_VW` for any evolution.
pub fn otoc_pauli(u: &dyn Evolution, v: &PauliString, w: &PauliString, mode: PauliMode) -> Result<OtocEstimate> {
    let n = u.num_qubits();
    v.check_sites(n)?;
    w.check_sites(n)?;
    let sites = format!("V={v}; W={w}");
    match mode {
        PauliMode::Exact => {
            check_dense(n)?;
            let ud = u.dense()?;
            let wt = &ud * w.dense(n)? * ud.adjoint();
            let vm = v.dense(n)?;
            let prod = &vm * &wt * &vm * &wt;
            let value = prod.trace() / (1u64 << n) as f64;
            Ok(OtocEstimate {
                value,
                std_error: 0.0,
                t: 0.0,
                meta: OtocMeta { n, k: 0, sites, estimator: EstimatorTag::PauliExact, samples: 0 },
            })
        }
        PauliMode::Stochastic { probes, seed } => {
            if probes < 2 {
                return Err(Error::domain("stochastic OTOC needs at least two probes"));
            }
            let samples: Vec<C64> = (0..probes as u64)
                .into_par_iter()
                .map(|p| -> Result<C64> {
                    let mut rng = seed.child(p).rng();
                    let amps: Vec<C64> = (0..1usize << n)
                        .map(|_| c(0.0, 2.0 * std::f64::consts::PI * rng.gen::<f64>()).exp())
                        .collect();
                    let r = StateVector::from_amplitudes(n, amps)?;
                    let mut s = u.apply_adjoint(&r)?;
                    s = w.apply(&s)?;
                    s = u.apply(&s)?;
                    s = v.apply(&s)?;
                    s = u.apply_adjoint(&s)?;
                    s = w.apply(&s)?;
                    s = u.apply(&s)?;
                    s = v.apply(&s)?;
                    Ok(r.inner(&s) / (1u64 << n) as f64)
                })
                .collect::<Result<_>>()?;
            let m = samples.len() as f64;
            let mean = linalg::pairwise_sum(&samples) / m;
            let dev: Vec<f64> = samples.iter().map(|z| (z - mean).norm_sqr()).collect();
            let var = linalg::pairwise_sum(&dev) / (m - 1.0);
            Ok(OtocEstimate {
                value: mean,
                std_error: (var / m).sqrt(),
                t: 0.0,
                meta: OtocMeta { n, k: 0, sites, estimator: EstimatorTag::PauliStochastic, samples: probes },
            })
        }
    }
}

/// Same as [`otoc_pauli`] but fills in `k` from an RSED operator.
pub fn otoc_pauli_rsed(op: &RsedOperator, v: &PauliString, w: &PauliString, mode: PauliMode) -> Result<OtocEstimate> {
    let mut est = otoc_pauli(op, v, w, mode)?;
    est.meta.k = op.shape().k();
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermalMode {
    Exact,
    Leading,
}

/// Thermal four-point function at inverse temperature `beta`.
///
/// `op.sub()` must be `evolve(h_sub, t)`. Exact mode returns
/// `tr(rho V(t) W V(t) W)` with `rho = e^{-beta H} / Z` for the embedded
/// Hamiltonian `H = sum_a O_a h O_a^dagger` and `V(t) = U^dagger V U`.
/// Leading mode returns the large-`K` approximation
/// `[1 + (N-1)^{-1} sum_{b1 != b2} rho_s(b1, b2)] K^{-1}
///  Re sum_{b1,b2,b3} (u o u o u*)_{b1 b2} (u^dagger)_{b2 b3}`,
/// with `rho_s = e^{-beta h} / tr e^{-beta h}`; it ignores `V` and `W`.
pub fn otoc_finite_temperature(
    op: &RsedOperator,
    h_sub: &SubHamiltonian,
    beta: f64,
    v: &PauliString,
    w: &PauliString,
    mode: ThermalMode,
) -> Result<OtocEstimate> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::domain(format!("inverse temperature must be >= 0, got {beta}")));
    }
    let shape = op.shape();
    if h_sub.k() != shape.k() {
        return Err(Error::ShapeMismatch { expected: format!("k = {}", shape.k()), got: format!("k = {}", h_sub.k()) });
    }
    let emin = h_sub.eigenvalues()[0];
    let boltz = h_sub.apply_function(|l| c((-beta * (l - emin)).exp(), 0.0));
    let z_sub = boltz.trace().re;
    let sites = format!("V={v}; W={w}; beta={beta}");
    match mode {
        ThermalMode::Exact => {
            let n = shape.n();
            v.check_sites(n)?;
            w.check_sites(n)?;
            check_dense(n)?;
            let rho = op.embed_dense(&boltz)? / c(z_sub * shape.num_seeds() as f64, 0.0);
            let ud = op.dense_matrix()?;
            let wm = w.dense(n)?;
            let vt = ud.adjoint() * v.dense(n)? * &ud;
            let prod = rho * &vt * &wm * &vt * &wm;
            Ok(OtocEstimate {
                value: prod.trace(),
                std_error: 0.0,
                t: 0.0,
                meta: OtocMeta { n, k: shape.k(), sites, estimator: EstimatorTag::FiniteTemperatureExact, samples: 0 },
            })
        }
        ThermalMode::Leading => {
            let kd = shape.sub_dim();
            let rho_s = boltz / c(z_sub, 0.0);
            let mut off = 0.0;
            for b1 in 0..kd {
                for b2 in 0..kd {
                    if b1 != b2 {
                        off += rho_s[(b1, b2)].re;
                    }
                }
            }
            let big_n = shape.full_dim() as f64;
            let prefactor = 1.0 + off / (big_n - 1.0);
            let u = op.sub().matrix();
            let row_sums_adj: Vec<C64> = (0..kd).map(|b2| (0..kd).map(|b3| u[(b3, b2)].conj()).sum()).collect();
            let mut acc = C64::default();
            for b1 in 0..kd {
                for b2 in 0..kd {
                    let z = u[(b1, b2)];
                    acc += z * z * z.conj() * row_sums_adj[b2];
                }
            }
            let value = prefactor * acc.re / kd as f64;
            Ok(OtocEstimate {
                value: c(value, 0.0),
                std_error: 0.0,
                t: 0.0,
                meta: OtocMeta { n: shape.n(), k: shape.k(), sites, estimator: EstimatorTag::FiniteTemperatureLeading, samples: 0 },
            })
        }
    }
}

/// Coefficient `s` in `E_f[C(t)] ~ s t^2` for `u = e^{-iht}`:
/// `2^{-k} (1/2) tr(3 diag(h^2) + h^2 - 2 diag(h o h*) - 2 diag(h) h)`.
pub fn early_time_slope(h: &SubHamiltonian) -> f64 {
    let m = h.matrix();
    let kd = h.dim();
    let h2 = m * m;
    let mut total = 0.0;
    for b in 0..kd {
        let hbb = m[(b, b)];
        total += 3.0 * h2[(b, b)].re + h2[(b, b)].re - 2.0 * hbb.norm_sqr() - 2.0 * (hbb * hbb).re;
    }
    0.5 * total / kd as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::SystemShape;
    use crate::randomness::{streams, PermutationBackend, SignBackend, SignFunction, SubsetPermutation};
    use crate::subsystem::{evolve, hadamard_layer, pauli_syk, random_sign_diag, random_sign_hadamard, unitary_power};

    fn op(n: u32, k: u32, s: u64, u: SubUnitary) -> RsedOperator {
        let shape = SystemShape::new(n, k).unwrap();
        let p = SubsetPermutation::sample(shape, RngSeed::new(s, streams::PERMUTATION), PermutationBackend::Auto).unwrap();
        let f = SignFunction::sample(shape, RngSeed::new(s, streams::SIGN), SignBackend::Auto).unwrap();
        RsedOperator::new(p, f, u).unwrap()
    }

    #[test]
    fn commuting_cases_are_one() {
        let o = otoc_zz_exact(&op(8, 4, 1, SubUnitary::identity(4).unwrap()), 0, 5).unwrap();
        assert_eq!(o.value, c(1.0, 0.0));
        let d = random_sign_diag(4, RngSeed::new(2, 3)).unwrap();
        let o = otoc_zz_exact(&op(8, 4, 1, d), 2, 7).unwrap();
        assert!((o.value.re - 1.0).abs() < 1e-14);
        assert!(otoc_zz_exact(&op(8, 4, 1, SubUnitary::identity(4).unwrap()), 3, 3).is_err());
    }

    #[test]
    fn zz_exact_matches_dense_definition() {
        let u = unitary_power(&random_sign_hadamard(4, RngSeed::new(5, 3)).unwrap(), 2.0).unwrap();
        for s in 0..10 {
            let o = op(8, 4, s, u.clone());
            let fast = otoc_zz_exact(&o, 1, 6).unwrap();
            let dense = otoc_pauli(&o, &PauliString::z(1), &PauliString::z(6), PauliMode::Exact).unwrap();
            assert!((fast.value - dense.value).norm() < 1e-10);
        }
    }

    #[test]
    fn sampled_exhaustive_is_bitwise_exact() {
        let o = op(9, 4, 3, random_sign_hadamard(4, RngSeed::new(1, 3)).unwrap());
        let exact = otoc_zz_exact(&o, 0, 8).unwrap();
        let s = otoc_zz_sampled(&o, 0, 8, 32, RngSeed::new(0, 5)).unwrap();
        assert_eq!(exact.value.re.to_bits(), s.value.re.to_bits());
        let s = otoc_zz_sampled(&o, 0, 8, 1000, RngSeed::new(0, 5)).unwrap();
        assert_eq!(exact.value.re.to_bits(), s.value.re.to_bits());
        let id = o.with_sub(SubUnitary::identity(4).unwrap()).unwrap();
        let s = otoc_zz_sampled(&id, 0, 8, 8, RngSeed::new(0, 5)).unwrap();
        assert_eq!((s.value.re, s.std_error), (1.0, 0.0));
        assert!(otoc_zz_sampled(&o, 0, 8, 1, RngSeed::new(0, 5)).is_err());
    }

    #[test]
    fn f_average_examples() {
        assert!((otoc_zz_f_average(&hadamard_layer(3).unwrap()) - 0.125).abs() < 1e-15);
        assert!((otoc_zz_f_average(&SubUnitary::identity(3).unwrap()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn streamed_average_matches_dense() {
        for k in 1..=6 {
            let bits = crate::subsystem::random_sign_bits(k, RngSeed::new(k as u64, 3)).unwrap();
            let u = crate::subsystem::hadamard_layer(k)
                .unwrap()
                .compose(&crate::subsystem::sign_diag_from_bits(k, &bits).unwrap())
                .unwrap();
            for t in 1..=4 {
                let dense = otoc_zz_f_average(&unitary_power(&u, t as f64).unwrap());
                let stream = otoc_zz_f_average_hadamard_power(k, &bits, t).unwrap();
                assert!((dense - stream).abs() < 1e-12, "k={k} t={t}");
            }
        }
    }

    #[test]
    fn variance_formula_values() {
        let v = otoc_zz_f_variance_hadamard(8, 3).unwrap();
        assert!((v - 0.003_547_668_457_031_25).abs() < 1e-15);
        let n = 5;
        let expect = 8.0 / 2f64.powi(2 * n) - 6.0 / 2f64.powi(3 * n) + 2f64.powi(-4 * n);
        assert!((otoc_zz_f_variance_hadamard(5, 5).unwrap() - expect).abs() < 1e-18);
        assert!(otoc_zz_f_variance_hadamard(3, 4).is_err());
    }

    #[test]
    fn pauli_trivial_cases() {
        let id = op(4, 2, 0, SubUnitary::identity(2).unwrap());
        let o = otoc_pauli(&id, &PauliString::z(0), &PauliString::z(1), PauliMode::Exact).unwrap();
        assert!((o.value - c(1.0, 0.0)).norm() < 1e-14);
        let o = otoc_pauli(&id, &PauliString::x(0), &PauliString::z(0), PauliMode::Exact).unwrap();
        assert!((o.value - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn poisson_bracket_values() {
        assert_eq!(poisson_bracket(c(1.0, 0.0)), 0.0);
        assert_eq!(poisson_bracket(c(-1.0, 0.0)), 2.0);
        assert_eq!(poisson_bracket(c(0.0, 0.0)), 1.0);
    }

    #[test]
    fn slope_calibration() {
        let x = SubHamiltonian::new(1, CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])).unwrap();
        assert!((early_time_slope(&x) - 2.0).abs() < 1e-14);
        let z = SubHamiltonian::new(1, linalg::diag_matrix(&[c(1., 0.), c(-1., 0.)])).unwrap();
        assert_eq!(early_time_slope(&z), 0.0);
        let h = pauli_syk(4, RngSeed::new(3, 4), None).unwrap();
        let t = 1e-3;
        let cval = 1.0 - otoc_zz_f_average(&evolve(&h, t));
        let s = early_time_slope(&h);
        assert!((cval / (t * t) - s).abs() <= 0.01 * s);
    }

    #[test]
    fn thermal_infinite_temperature_reduces() {
        let h = pauli_syk(3, RngSeed::new(1, 4), None).unwrap();
        let u = evolve(&h, 1.3);
        let o = op(6, 3, 2, u);
        let (v, w) = (PauliString::x(0), PauliString::z(4));
        let th = otoc_finite_temperature(&o, &h, 0.0, &v, &w, ThermalMode::Exact).unwrap();
        let inf = otoc_pauli(&o, &v, &w, PauliMode::Exact).unwrap();
        assert!((th.value - inf.value).norm() < 1e-10);
        assert!(otoc_finite_temperature(&o, &h, -1.0, &v, &w, ThermalMode::Exact).is_err());
    }
}
