//! Dense `K x K` unitaries and Hamiltonians on the embedded subsystem.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::randomness::RngSeed;

/// Largest subsystem size stored densely.
pub const MAX_SUB_QUBITS: u32 = 12;
const UNITARY_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-10;

fn check_k(k: u32) -> Result<usize> {
    if k == 0 || k > MAX_SUB_QUBITS {
        return Err(Error::capacity(format!("subsystem size k = {k} outside 1..={MAX_SUB_QUBITS}")));
    }
    Ok(1usize << k)
}

fn check_square(k: u32, m: &CMat) -> Result<()> {
    let dim = check_k(k)?;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::ShapeMismatch {
            expected: format!("{dim}x{dim}"),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

/// A unitary on `k` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct SubUnitary {
    k: u32,
    m: CMat,
}

impl SubUnitary {
    pub fn new(k: u32, m: CMat) -> Result<Self> {
        check_square(k, &m)?;
        let defect = linalg::unitarity_defect(&m);
        if defect > UNITARY_TOL {
            return Err(Error::validation(format!("matrix is not unitary (defect {defect:.3e})")));
        }
        Ok(SubUnitary { k, m })
    }

    pub fn identity(k: u32) -> Result<Self> {
        let dim = check_k(k)?;
        Ok(SubUnitary { k, m: CMat::identity(dim, dim) })
    }

    /// `u^{(1)} u^{(2)}` as matrices.
    pub fn compose(&self, other: &SubUnitary) -> Result<SubUnitary> {
        if self.k != other.k {
            return Err(Error::ShapeMismatch { expected: format!("k = {}", self.k), got: format!("k = {}", other.k) });
        }
        Ok(SubUnitary { k: self.k, m: &self.m * &other.m })
    }

    pub fn adjoint(&self) -> SubUnitary {
        SubUnitary { k: self.k, m: self.m.adjoint() }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn dim(&self) -> usize {
        1 << self.k
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn is_real(&self) -> bool {
        self.m.iter().all(|z| z.im == 0.0)
    }

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.m)
    }

    pub fn is_diagonal(&self) -> bool {
        let dim = self.dim();
        (0..dim).all(|j| (0..dim).all(|i| i == j || self.m[(i, j)] == C64::default()))
    }
}

/// Hermitian operator on `k` qubits with its eigendecomposition cached.
#[derive(Debug, Clone)]
pub struct SubHamiltonian {
    k: u32,
    m: CMat,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

impl SubHamiltonian {
    pub fn new(k: u32, m: CMat) -> Result<Self> {
        check_square(k, &m)?;
        let defect = linalg::hermiticity_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::validation(format!("matrix is not Hermitian (defect {defect:.3e})")));
        }
        let m = (&m + m.adjoint()).scale(0.5);
        let (eigenvalues, eigenvectors) = linalg::eigh(&m);
        Ok(SubHamiltonian { k, m, eigenvalues, eigenvectors })
    }

    fn from_parts(k: u32, eigenvalues: Vec<f64>, eigenvectors: CMat) -> Self {
        let d: Vec<C64> = eigenvalues.iter().map(|&l| c(l, 0.0)).collect();
        let m = linalg::reconstruct(&eigenvectors, &d);
        let m = (&m + m.adjoint()).scale(0.5);
        SubHamiltonian { k, m, eigenvalues, eigenvectors }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn dim(&self) -> usize {
        1 << self.k
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    /// `V f(lambda) V^dagger`.
    pub fn apply_function(&self, f: impl Fn(f64) -> C64) -> CMat {
        let d: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        linalg::reconstruct(&self.eigenvectors, &d)
    }

    pub fn scaled(&self, s: f64) -> SubHamiltonian {
        SubHamiltonian {
            k: self.k,
            m: self.m.scale(s),
            eigenvalues: self.eigenvalues.iter().map(|&l| l * s).collect(),
            eigenvectors: self.eigenvectors.clone(),
        }
    }
}

/// `H^{(x)k}` with entries `2^{-k/2} (-1)^{popcount(b & b')}`.
pub fn hadamard_layer(k: u32) -> Result<SubUnitary> {
    let dim = check_k(k)?;
    let norm = (dim as f64).sqrt().recip();
    let m = CMat::from_fn(dim, dim, |r, col| {
        let s = if (r & col).count_ones() % 2 == 0 { norm } else { -norm };
        c(s, 0.0)
    });
    Ok(SubUnitary { k, m })
}

/// Random signs `phi(b)`, one uniform bit per `b` in index order.
pub fn random_sign_bits(k: u32, seed: RngSeed) -> Result<Vec<u8>> {
    let dim = check_k(k)?;
    let mut rng = seed.rng();
    Ok((0..dim).map(|_| rng.gen::<bool>() as u8).collect())
}

pub fn sign_diag_from_bits(k: u32, bits: &[u8]) -> Result<SubUnitary> {
    let dim = check_k(k)?;
    if bits.len() != dim {
        return Err(Error::ShapeMismatch { expected: format!("{dim} bits"), got: format!("{} bits", bits.len()) });
    }
    let d: Vec<C64> = bits.iter().map(|&b| c(crate::bitcore::parity_sign(b), 0.0)).collect();
    Ok(SubUnitary { k, m: linalg::diag_matrix(&d) })
}

/// Diagonal `P = diag((-1)^{phi(b)})`.
pub fn random_sign_diag(k: u32, seed: RngSeed) -> Result<SubUnitary> {
    sign_diag_from_bits(k, &random_sign_bits(k, seed)?)
}

/// `H^{(x)k} P` with `P` from [`random_sign_diag`].
pub fn random_sign_hadamard(k: u32, seed: RngSeed) -> Result<SubUnitary> {
    hadamard_layer(k)?.compose(&random_sign_diag(k, seed)?)
}

/// A Pauli operator `i^phase X^x Z^z` in symbolic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SymPauli {
    x: usize,
    z: usize,
    phase: u8,
}

impl SymPauli {
    fn mul(self, o: SymPauli) -> SymPauli {
        // Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
        let swap = ((self.z & o.x).count_ones() % 2) as u8 * 2;
        SymPauli { x: self.x ^ o.x, z: self.z ^ o.z, phase: (self.phase + o.phase + swap) % 4 }
    }
}

/// `chi_{2m-1} = X_m`, `chi_{2m} = Y_m`, with 0-based label `l`.
fn majorana(l: usize) -> SymPauli {
    let site = 1usize << (l / 2);
    if l.is_multiple_of(2) {
        SymPauli { x: site, z: 0, phase: 0 }
    } else {
        SymPauli { x: site, z: site, phase: 1 }
    }
}

const I_POW: [C64; 4] = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];

/// Number of four-body couplings for `k` sites.
pub fn pauli_syk_term_count(k: u32) -> usize {
    let m = 2 * k as usize;
    if m < 4 {
        return 0;
    }
    m * (m - 1) * (m - 2) * (m - 3) / 24
}

/// Four-body all-to-all Hamiltonian on the Majorana-like Paulis
/// `X_m, Y_m`, with standard-normal couplings (or the given ones, in
/// lexicographic `a < b < c < d` order), rescaled so `max |lambda| = 1`.
///
/// Each product gets the factor `i^eta` with `eta` the parity of the
/// number of sites holding two of its four operators, which makes every
/// term Hermitian.
pub fn pauli_syk(k: u32, seed: RngSeed, couplings: Option<&[f64]>) -> Result<SubHamiltonian> {
    if k < 2 {
        return Err(Error::domain("Pauli SYK needs k >= 2"));
    }
    let dim = check_k(k)?;
    let count = pauli_syk_term_count(k);
    let js: Vec<f64> = match couplings {
        Some(js) if js.len() == count => js.to_vec(),
        Some(js) => {
            return Err(Error::ShapeMismatch { expected: format!("{count} couplings"), got: format!("{}", js.len()) })
        }
        None => {
            let mut rng = seed.rng();
            (0..count).map(|_| rng.sample(StandardNormal)).collect()
        }
    };
    let nm = 2 * k as usize;
    let mut m = CMat::zeros(dim, dim);
    let mut idx = 0;
    for a in 0..nm {
        for b in a + 1..nm {
            for cc in b + 1..nm {
                for d in cc + 1..nm {
                    let p = majorana(a).mul(majorana(b)).mul(majorana(cc)).mul(majorana(d));
                    let labels = [a, b, cc, d];
                    let doubled = (0..k as usize)
                        .filter(|&s| labels.iter().filter(|&&l| l / 2 == s).count() == 2)
                        .count();
                    let eta = (doubled % 2) as u8;
                    let coef = I_POW[((p.phase + eta) % 4) as usize] * js[idx];
                    idx += 1;
                    for col in 0..dim {
                        let s = if (p.z & col).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                        m[(col ^ p.x, col)] += coef * s;
                    }
                }
            }
        }
    }
    let h = SubHamiltonian::new(k, m)?;
    let scale = h.eigenvalues.iter().fold(0.0f64, |acc, &l| acc.max(l.abs()));
    if scale == 0.0 {
        return Err(Error::validation("Pauli SYK Hamiltonian vanished"));
    }
    Ok(h.scaled(scale.recip()))
}

/// Eigen-angle `phi` in `(-pi, pi]` with eigenvalue `e^{-i phi}`; values
/// within `1e-9` of `-pi` snap to `pi`.
fn minus_phase(theta: f64) -> f64 {
    let phi = -theta;
    if phi <= -PI + 1e-9 {
        phi + 2.0 * PI
    } else {
        phi
    }
}

/// `h = (i / 2 pi) log u` on the principal branch, so `exp(-2 pi i h) = u`
/// and the eigenvalues of `h` lie in `(-1/2, 1/2]`.
pub fn parent_hamiltonian(u: &SubUnitary) -> Result<SubHamiltonian> {
    let defect = u.unitarity_defect();
    if defect > 1e-8 {
        return Err(Error::validation(format!("parent Hamiltonian of a non-unitary (defect {defect:.3e})")));
    }
    let (theta, v) = linalg::unitary_eig(&u.m)?;
    let mut pairs: Vec<(f64, usize)> = theta.iter().enumerate().map(|(j, &t)| (minus_phase(t) / (2.0 * PI), j)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let vals = pairs.iter().map(|p| p.0).collect();
    let vecs = CMat::from_fn(v.nrows(), v.ncols(), |r, col| v[(r, pairs[col].1)]);
    Ok(SubHamiltonian::from_parts(u.k, vals, vecs))
}

/// `u^t`: exact repeated multiplication for integer `t`, principal-branch
/// eigendecomposition otherwise.
pub fn unitary_power(u: &SubUnitary, t: f64) -> Result<SubUnitary> {
    if !t.is_finite() {
        return Err(Error::domain("non-finite power"));
    }
    if t.fract() == 0.0 && t.abs() <= 1e6 {
        let base = if t < 0.0 { u.adjoint() } else { u.clone() };
        let mut e = t.abs() as u64;
        let dim = u.dim();
        let mut acc = CMat::identity(dim, dim);
        let mut sq = base.m;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                acc = if first { sq.clone() } else { &acc * &sq };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        return Ok(SubUnitary { k: u.k, m: acc });
    }
    unitary_power_eig(u, t)
}

/// `u^t = V e^{i theta t} V^dagger` with `theta` in `(-pi, pi]`.
pub fn unitary_power_eig(u: &SubUnitary, t: f64) -> Result<SubUnitary> {
    let (theta, v) = linalg::unitary_eig(&u.m)?;
    let d: Vec<C64> = theta.iter().map(|&th| c(0.0, th * t).exp()).collect();
    Ok(SubUnitary { k: u.k, m: linalg::reconstruct(&v, &d) })
}

/// `e^{-i h t}`.
pub fn evolve(h: &SubHamiltonian, t: f64) -> SubUnitary {
    SubUnitary { k: h.k, m: h.apply_function(|l| c(0.0, -l * t).exp()) }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnitudeStats {
    pub max: f64,
    pub mean: f64,
    /// Fraction of entries with `|u_{bb'}|^2 >= K^{-eps}`.
    pub fraction_exceeding: f64,
    pub threshold: f64,
}

pub fn element_magnitude_stats(u: &SubUnitary, eps: f64) -> MagnitudeStats {
    let dim = u.dim() as f64;
    let threshold = dim.powf(-eps);
    let mags: Vec<f64> = u.m.iter().map(|z| z.norm_sqr()).collect();
    let max = mags.iter().copied().fold(0.0, f64::max);
    let mean = linalg::pairwise_sum(&mags) / mags.len() as f64;
    let over = mags.iter().filter(|&&m| m >= threshold).count();
    MagnitudeStats { max, mean, fraction_exceeding: over as f64 / mags.len() as f64, threshold }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::randomness::streams;

    fn seed(s: u64) -> RngSeed {
        RngSeed::new(s, streams::SUB_SIGN)
    }

    #[test]
    fn hadamard_entries() {
        let h1 = hadamard_layer(1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h1.get(0, 0).re - r).abs() < 1e-15);
        assert!((h1.get(1, 1).re + r).abs() < 1e-15);
        let h2 = hadamard_layer(2).unwrap();
        assert!((h2.get(3, 3).re - 0.5).abs() < 1e-15);
        for k in 1..=6 {
            let h = hadamard_layer(k).unwrap();
            let sq = h.compose(&h).unwrap();
            assert!(max_abs_diff(sq.matrix(), &CMat::identity(h.dim(), h.dim())) < 1e-12);
        }
    }

    #[test]
    fn sign_diag_properties() {
        let z = sign_diag_from_bits(3, &[0; 8]).unwrap();
        assert_eq!(z, SubUnitary::identity(3).unwrap());
        let p = random_sign_diag(5, seed(1)).unwrap();
        let sq = p.compose(&p).unwrap();
        assert_eq!(sq, SubUnitary::identity(5).unwrap());
        assert_eq!(p, random_sign_diag(5, seed(1)).unwrap());
        assert!(p.is_diagonal());
    }

    #[test]
    fn syk_two_sites_is_zz() {
        let h = pauli_syk(2, seed(0), Some(&[0.7])).unwrap();
        // -Z1 Z2 scaled to unit norm.
        let expect = [-1.0, 1.0, 1.0, -1.0];
        for (b, &e) in expect.iter().enumerate() {
            assert!((h.matrix()[(b, b)] - c(e, 0.0)).norm() < 1e-12);
        }
        let ev = h.eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] + 1.0).abs() < 1e-12);
        assert!((ev[2] - 1.0).abs() < 1e-12 && (ev[3] - 1.0).abs() < 1e-12);
        assert!(pauli_syk(1, seed(0), None).is_err());
        assert!(pauli_syk(2, seed(0), Some(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn syk_normalized_and_hermitian() {
        for s in 0..20 {
            let h = pauli_syk(5, seed(s), None).unwrap();
            assert!(linalg::hermiticity_defect(h.matrix()) <= 1e-10);
            let ev = h.eigenvalues();
            let top = ev[0].abs().max(ev[ev.len() - 1].abs());
            assert!((top - 1.0).abs() < 1e-12);
            assert!(ev[0] >= -1.0 - 1e-12);
        }
    }

    #[test]
    fn syk_terms_are_individually_hermitian() {
        let count = pauli_syk_term_count(4);
        for t in 0..count {
            let mut js = vec![0.0; count];
            js[t] = 1.0;
            let h = pauli_syk(4, seed(0), Some(&js)).unwrap();
            let ev = h.eigenvalues();
            assert!((ev[0] + 1.0).abs() < 1e-10 && (ev[15] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn parent_hamiltonian_examples() {
        let id = SubUnitary::identity(2).unwrap();
        let h = parent_hamiltonian(&id).unwrap();
        assert!(h.matrix().iter().all(|z| z.norm() < 1e-12));

        let d = sign_diag_from_bits(1, &[0, 1]).unwrap();
        let h = parent_hamiltonian(&d).unwrap();
        assert!(h.eigenvalues()[0].abs() < 1e-12);
        assert!((h.eigenvalues()[1] - 0.5).abs() < 1e-12);

        let u = random_sign_hadamard(4, seed(3)).unwrap();
        let h = parent_hamiltonian(&u).unwrap();
        let back = evolve(&h, 2.0 * PI);
        assert!(max_abs_diff(back.matrix(), u.matrix()) < 1e-8);

        let bad = SubUnitary { k: 1, m: CMat::identity(2, 2).scale(2.0) };
        assert!(parent_hamiltonian(&bad).is_err());
    }

    #[test]
    fn hadamard_parent_is_two_valued() {
        let h = parent_hamiltonian(&hadamard_layer(6).unwrap()).unwrap();
        for &l in h.eigenvalues() {
            assert!(l.abs() < 1e-9 || (l - 0.5).abs() < 1e-9, "{l}");
        }
    }

    #[test]
    fn power_paths_agree() {
        let h = hadamard_layer(4).unwrap();
        let id = CMat::identity(16, 16);
        assert!(max_abs_diff(unitary_power(&h, 0.0).unwrap().matrix(), &id) < 1e-15);
        assert_eq!(unitary_power(&h, 1.0).unwrap(), h);
        assert!(max_abs_diff(unitary_power_eig(&h, 2.0).unwrap().matrix(), &id) < 1e-9);
        assert!(max_abs_diff(unitary_power(&h, 2.0).unwrap().matrix(), &id) < 1e-12);
        for k in 1..=6 {
            let u = random_sign_hadamard(k, seed(k as u64)).unwrap();
            for t in [2.0, 3.0, 4.0] {
                let a = unitary_power(&u, t).unwrap();
                let b = unitary_power_eig(&u, t).unwrap();
                assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-8, "k={k} t={t}");
            }
            let half = unitary_power(&u, 0.5).unwrap();
            assert!(half.unitarity_defect() < 1e-9);
            assert!(max_abs_diff(half.compose(&half).unwrap().matrix(), u.matrix()) < 1e-8);
        }
    }

    #[test]
    fn evolve_examples() {
        let z = SubHamiltonian::new(1, linalg::diag_matrix(&[c(1.0, 0.0), c(-1.0, 0.0)])).unwrap();
        let u = evolve(&z, PI);
        assert!(max_abs_diff(u.matrix(), &CMat::identity(2, 2).scale(-1.0)) < 1e-12);
        assert!(max_abs_diff(evolve(&z, 0.0).matrix(), &CMat::identity(2, 2)) < 1e-15);

        let h = pauli_syk(4, seed(8), None).unwrap();
        let (s, t) = (0.37, 1.9);
        let lhs = evolve(&h, s).compose(&evolve(&h, t)).unwrap();
        assert!(max_abs_diff(lhs.matrix(), evolve(&h, s + t).matrix()) < 1e-8);
        assert!(evolve(&h, t).unitarity_defect() < 1e-9);
    }

    #[test]
    fn syk_matrix_elements_spread() {
        let h = pauli_syk(6, seed(2), None).unwrap();
        for t in [1.0, 2.0, 5.0] {
            let st = element_magnitude_stats(&evolve(&h, t), 0.5);
            let inv_k = 1.0 / 64.0;
            assert!(st.mean > inv_k / 3.0 && st.mean < inv_k * 3.0);
        }
    }

    #[test]
    fn magnitude_stats_examples() {
        let k = 5;
        let st = element_magnitude_stats(&hadamard_layer(k).unwrap(), 0.5);
        assert!((st.max - 1.0 / 32.0).abs() < 1e-15 && (st.mean - 1.0 / 32.0).abs() < 1e-15);
        let st = element_magnitude_stats(&SubUnitary::identity(k).unwrap(), 0.5);
        assert_eq!(st.max, 1.0);
        assert!((st.mean - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_unitary() {
        assert!(SubUnitary::new(1, CMat::identity(2, 2).scale(1.1)).is_err());
        assert!(SubUnitary::new(1, CMat::identity(4, 4)).is_err());
        assert!(SubHamiltonian::new(1, CMat::from_fn(2, 2, |r, _| c(r as f64, 0.0))).is_err());
    }
}
