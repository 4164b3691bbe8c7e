//! State vectors, Pauli strings and the blockwise RSED operator.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::bitcore::SystemShape;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::randomness::{SignFunction, SubsetPermutation};
use crate::subsystem::{unitary_power, SubUnitary};

/// Largest `n` for dense `2^n x 2^n` materialization.
pub const MAX_DENSE_QUBITS: u32 = 10;

pub(crate) fn check_dense(n: u32) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::capacity(format!("dense {n}-qubit matrices exceed n <= {MAX_DENSE_QUBITS}")));
    }
    Ok(())
}

/// Amplitudes of an `n`-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: u32,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n: u32) -> Self {
        StateVector { n, amps: vec![C64::default(); 1 << n] }
    }

    pub fn basis(n: u32, x: usize) -> Result<Self> {
        if x >= 1 << n {
            return Err(Error::domain(format!("basis index {x} out of range for n = {n}")));
        }
        let mut s = Self::zero(n);
        s.amps[x] = c(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(n: u32, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::ShapeMismatch { expected: format!("{} amplitudes", 1usize << n), got: amps.len().to_string() });
        }
        Ok(StateVector { n, amps })
    }

    /// Uniform superposition of all `2^n` basis states.
    pub fn plus(n: u32) -> Self {
        let v = c((1u64 << n) as f64, 0.0).sqrt().inv();
        StateVector { n, amps: vec![v; 1 << n] }
    }

    pub fn num_qubits(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let nrm = self.norm();
        if nrm > 0.0 {
            self.amps.iter_mut().for_each(|z| *z /= nrm);
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub(crate) fn check_qubits(&self, n: u32) -> Result<()> {
        if self.n != n {
            return Err(Error::ShapeMismatch { expected: format!("{n} qubits"), got: format!("{} qubits", self.n) });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// A tensor product of single-site Paulis, at most one per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<(u32, PauliAxis)>,
}

impl PauliString {
    pub fn new(mut ops: Vec<(u32, PauliAxis)>) -> Result<Self> {
        ops.sort_by_key(|o| o.0);
        if ops.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::domain("Pauli string repeats a site"));
        }
        if ops.iter().any(|o| o.0 >= 64) {
            return Err(Error::domain("Pauli site index too large"));
        }
        Ok(PauliString { ops })
    }

    pub fn identity() -> Self {
        PauliString { ops: Vec::new() }
    }

    pub fn single(site: u32, axis: PauliAxis) -> Self {
        PauliString { ops: vec![(site, axis)] }
    }

    pub fn x(site: u32) -> Self {
        Self::single(site, PauliAxis::X)
    }

    pub fn y(site: u32) -> Self {
        Self::single(site, PauliAxis::Y)
    }

    pub fn z(site: u32) -> Self {
        Self::single(site, PauliAxis::Z)
    }

    pub fn ops(&self) -> &[(u32, PauliAxis)] {
        &self.ops
    }

    pub fn max_site(&self) -> Option<u32> {
        self.ops.last().map(|o| o.0)
    }

    pub fn check_sites(&self, n: u32) -> Result<()> {
        match self.max_site() {
            Some(s) if s >= n => Err(Error::domain(format!("Pauli site {s} not below n = {n}"))),
            _ => Ok(()),
        }
    }

    /// `(x_mask, z_mask, number of Y factors)`.
    pub fn masks(&self) -> (usize, usize, u32) {
        let (mut xm, mut zm, mut ny) = (0usize, 0usize, 0u32);
        for &(s, axis) in &self.ops {
            let bit = 1usize << s;
            match axis {
                PauliAxis::X => xm |= bit,
                PauliAxis::Z => zm |= bit,
                PauliAxis::Y => {
                    xm |= bit;
                    zm |= bit;
                    ny += 1;
                }
            }
        }
        (xm, zm, ny)
    }

    /// `P|x> = phase(x) |x ^ x_mask>`.
    #[inline]
    pub fn action(&self, x: usize) -> (usize, C64) {
        let (xm, zm, ny) = self.masks();
        action_from_masks(xm, zm, ny, x)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.check_sites(psi.n)?;
        let (xm, zm, ny) = self.masks();
        let mut out = vec![C64::default(); psi.dim()];
        for (x, &amp) in psi.amps.iter().enumerate() {
            let (y, ph) = action_from_masks(xm, zm, ny, x);
            out[y] = ph * amp;
        }
        Ok(StateVector { n: psi.n, amps: out })
    }

    /// Dense `2^n x 2^n` matrix.
    pub fn dense(&self, n: u32) -> Result<CMat> {
        self.check_sites(n)?;
        check_dense(n)?;
        let dim = 1usize << n;
        let (xm, zm, ny) = self.masks();
        let mut m = CMat::zeros(dim, dim);
        for x in 0..dim {
            let (y, ph) = action_from_masks(xm, zm, ny, x);
            m[(y, x)] = ph;
        }
        Ok(m)
    }
}

#[inline]
fn action_from_masks(xm: usize, zm: usize, ny: u32, x: usize) -> (usize, C64) {
    const I_POW: [C64; 4] = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
    let mut ph = I_POW[(ny % 4) as usize];
    if (zm & x).count_ones() % 2 == 1 {
        ph = -ph;
    }
    (x ^ xm, ph)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_empty() {
            return write!(f, "I");
        }
        for (i, &(s, axis)) in self.ops.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let ch = match axis {
                PauliAxis::X => 'X',
                PauliAxis::Y => 'Y',
                PauliAxis::Z => 'Z',
            };
            write!(f, "{ch}{s}")?;
        }
        Ok(())
    }
}

/// Parses strings such as `"X0 Z3"`, `"X0Z3"` or `"I"`.
impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "I" {
            return Ok(PauliString::identity());
        }
        let mut ops = Vec::new();
        let mut chars = s.chars().filter(|ch| !ch.is_whitespace() && *ch != '*').peekable();
        while let Some(ch) = chars.next() {
            let axis = match ch.to_ascii_uppercase() {
                'X' => PauliAxis::X,
                'Y' => PauliAxis::Y,
                'Z' => PauliAxis::Z,
                other => return Err(Error::Parse { line: 1, msg: format!("unexpected `{other}` in Pauli string") }),
            };
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let site = digits
                .parse()
                .map_err(|_| Error::Parse { line: 1, msg: format!("missing site index after `{ch}`") })?;
            ops.push((site, axis));
        }
        PauliString::new(ops)
    }
}

/// Anything that can evolve a state vector unitarily.
pub trait Evolution: Sync {
    fn num_qubits(&self) -> u32;

    fn apply(&self, psi: &StateVector) -> Result<StateVector>;

    fn apply_adjoint(&self, psi: &StateVector) -> Result<StateVector>;

    /// Dense matrix, column `x` being the image of `|x>`.
    fn dense(&self) -> Result<CMat> {
        let n = self.num_qubits();
        check_dense(n)?;
        let dim = 1usize << n;
        let mut m = CMat::zeros(dim, dim);
        for x in 0..dim {
            let col = self.apply(&StateVector::basis(n, x)?)?;
            for (y, &v) in col.amps.iter().enumerate() {
                m[(y, x)] = v;
            }
        }
        Ok(m)
    }
}

/// A dense unitary acting on the whole register.
#[derive(Debug, Clone)]
pub struct DenseEvolution {
    n: u32,
    m: CMat,
}

impl DenseEvolution {
    pub fn new(n: u32, m: CMat) -> Result<Self> {
        check_dense(n)?;
        let dim = 1usize << n;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::ShapeMismatch { expected: format!("{dim}x{dim}"), got: format!("{}x{}", m.nrows(), m.ncols()) });
        }
        Ok(DenseEvolution { n, m })
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }
}

fn dense_apply(m: &CMat, n: u32, psi: &StateVector) -> StateVector {
    let v = nalgebra::DVector::from_column_slice(&psi.amps);
    let out = m * v;
    StateVector { n, amps: out.iter().copied().collect() }
}

impl Evolution for DenseEvolution {
    fn num_qubits(&self) -> u32 {
        self.n
    }

    fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        psi.check_qubits(self.n)?;
        Ok(dense_apply(&self.m, self.n, psi))
    }

    fn apply_adjoint(&self, psi: &StateVector) -> Result<StateVector> {
        psi.check_qubits(self.n)?;
        Ok(dense_apply(&self.m.adjoint(), self.n, psi))
    }

    fn dense(&self) -> Result<CMat> {
        Ok(self.m.clone())
    }
}

/// `U = sum_a O_a u O_a^dagger`, never materialized except as an oracle.
#[derive(Debug, Clone)]
pub struct RsedOperator {
    shape: SystemShape,
    perm: Arc<SubsetPermutation>,
    sign: Arc<SignFunction>,
    sub: SubUnitary,
}

impl RsedOperator {
    pub fn new(perm: SubsetPermutation, sign: SignFunction, sub: SubUnitary) -> Result<Self> {
        Self::from_shared(Arc::new(perm), Arc::new(sign), sub)
    }

    pub fn from_shared(perm: Arc<SubsetPermutation>, sign: Arc<SignFunction>, sub: SubUnitary) -> Result<Self> {
        let shape = perm.shape();
        if sign.shape() != shape {
            return Err(Error::ShapeMismatch { expected: format!("{shape:?}"), got: format!("{:?}", sign.shape()) });
        }
        if sub.k() != shape.k() {
            return Err(Error::ShapeMismatch { expected: format!("k = {}", shape.k()), got: format!("k = {}", sub.k()) });
        }
        Ok(RsedOperator { shape, perm, sign, sub })
    }

    /// Same `p` and `f`, different subsystem unitary.
    pub fn with_sub(&self, sub: SubUnitary) -> Result<Self> {
        Self::from_shared(self.perm.clone(), self.sign.clone(), sub)
    }

    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn perm(&self) -> &SubsetPermutation {
        &self.perm
    }

    pub fn sign(&self) -> &SignFunction {
        &self.sign
    }

    pub fn sub(&self) -> &SubUnitary {
        &self.sub
    }

    pub fn adjoint(&self) -> RsedOperator {
        RsedOperator { shape: self.shape, perm: self.perm.clone(), sign: self.sign.clone(), sub: self.sub.adjoint() }
    }

    fn apply_with(&self, m: &CMat, psi: &StateVector) -> Result<StateVector> {
        psi.check_qubits(self.shape.n())?;
        let kd = self.shape.sub_dim();
        let shape = self.shape;
        let mut blocks = vec![C64::default(); shape.full_dim()];
        blocks.par_chunks_mut(kd).enumerate().for_each(|(a, out)| {
            let mut pos = vec![0usize; kd];
            self.perm.block_images(a, &mut pos);
            let signs: Vec<f64> = (0..kd).map(|b| self.sign.factor(shape.join_unchecked(b, a))).collect();
            let v: Vec<C64> = (0..kd).map(|b| psi.amps[pos[b]] * signs[b]).collect();
            for (bp, slot) in out.iter_mut().enumerate() {
                let mut acc = C64::default();
                for (b, &vb) in v.iter().enumerate() {
                    acc += m[(bp, b)] * vb;
                }
                *slot = acc * signs[bp];
            }
        });
        let mut amps = vec![C64::default(); shape.full_dim()];
        for (x, &val) in blocks.iter().enumerate() {
            amps[self.perm.permute_unchecked(x)] = val;
        }
        Ok(StateVector { n: shape.n(), amps })
    }

    /// `U^t` with `u^t` on every block.
    pub fn apply_power(&self, t: f64, psi: &StateVector) -> Result<StateVector> {
        self.with_sub(unitary_power(&self.sub, t)?)?.apply(psi)
    }

    /// `U |x>` as `K` pairs `(index, amplitude)`.
    pub fn evolve_basis_state(&self, x: usize) -> Result<Vec<(usize, C64)>> {
        self.shape.index(x)?;
        let (b, a) = self.shape.split_unchecked(self.perm.invert_unchecked(x));
        let sb = self.sign.factor(self.shape.join_unchecked(b, a));
        Ok((0..self.shape.sub_dim())
            .map(|bp| {
                let xp = self.shape.join_unchecked(bp, a);
                (self.perm.permute_unchecked(xp), self.sub.get(bp, b) * (sb * self.sign.factor(xp)))
            })
            .collect())
    }

    /// Dense `N x N` matrix of `U` (`n <= 10`).
    pub fn dense_matrix(&self) -> Result<CMat> {
        self.embed_dense(self.sub.matrix())
    }

    /// `sum_a O_a m O_a^dagger` for any `K x K` matrix `m` (`n <= 10`).
    pub fn embed_dense(&self, m: &CMat) -> Result<CMat> {
        check_dense(self.shape.n())?;
        let kd = self.shape.sub_dim();
        if m.nrows() != kd || m.ncols() != kd {
            return Err(Error::ShapeMismatch { expected: format!("{kd}x{kd}"), got: format!("{}x{}", m.nrows(), m.ncols()) });
        }
        let dim = self.shape.full_dim();
        let mut out = CMat::zeros(dim, dim);
        for a in 0..self.shape.num_seeds() {
            for b in 0..kd {
                let x = self.shape.join_unchecked(b, a);
                let (col, sb) = (self.perm.permute_unchecked(x), self.sign.factor(x));
                for bp in 0..kd {
                    let xp = self.shape.join_unchecked(bp, a);
                    out[(self.perm.permute_unchecked(xp), col)] = m[(bp, b)] * (sb * self.sign.factor(xp));
                }
            }
        }
        Ok(out)
    }

    /// `P F (I (x) u) F P^dagger` from explicit dense factors.
    pub fn factorized_dense(&self) -> Result<CMat> {
        check_dense(self.shape.n())?;
        let dim = self.shape.full_dim();
        let mut p = CMat::zeros(dim, dim);
        let mut f = CMat::zeros(dim, dim);
        for x in 0..dim {
            p[(self.perm.permute_unchecked(x), x)] = c(1.0, 0.0);
            f[(x, x)] = c(self.sign.factor(x), 0.0);
        }
        let blockdiag = CMat::identity(self.shape.num_seeds(), self.shape.num_seeds()).kronecker(self.sub.matrix());
        Ok(&p * &f * blockdiag * &f * p.adjoint())
    }
}

impl Evolution for RsedOperator {
    fn num_qubits(&self) -> u32 {
        self.shape.n()
    }

    fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.apply_with(self.sub.matrix(), psi)
    }

    fn apply_adjoint(&self, psi: &StateVector) -> Result<StateVector> {
        self.apply_with(&self.sub.matrix().adjoint(), psi)
    }

    fn dense(&self) -> Result<CMat> {
        self.dense_matrix()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::{streams, PermutationBackend, RngSeed, SignBackend};
    use crate::subsystem::{hadamard_layer, random_sign_hadamard};

    fn random_op(n: u32, k: u32, s: u64) -> RsedOperator {
        let shape = SystemShape::new(n, k).unwrap();
        let p = SubsetPermutation::sample(shape, RngSeed::new(s, streams::PERMUTATION), PermutationBackend::Auto).unwrap();
        let f = SignFunction::sample(shape, RngSeed::new(s, streams::SIGN), SignBackend::Auto).unwrap();
        let u = random_sign_hadamard(k, RngSeed::new(s, streams::SUB_SIGN)).unwrap();
        RsedOperator::new(p, f, u).unwrap()
    }

    #[test]
    fn identity_sub_is_identity() {
        let op = random_op(6, 3, 1).with_sub(SubUnitary::identity(3).unwrap()).unwrap();
        let psi = PauliString::x(0).apply(&StateVector::plus(6)).unwrap();
        let out = op.apply(&psi).unwrap();
        assert!(out.max_abs_diff(&psi) < 1e-15);
    }

    #[test]
    fn single_block_hadamard() {
        let shape = SystemShape::new(2, 1).unwrap();
        let op = RsedOperator::new(SubsetPermutation::identity(shape), SignFunction::zero(shape), hadamard_layer(1).unwrap())
            .unwrap();
        let out = op.apply(&StateVector::basis(2, 0).unwrap()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitudes()[0].re - r).abs() < 1e-15);
        assert!((out.amplitudes()[1].re - r).abs() < 1e-15);
        assert_eq!(out.amplitudes()[2], C64::default());
    }

    #[test]
    fn apply_then_adjoint() {
        let op = random_op(10, 5, 2);
        let mut psi = StateVector::zero(10);
        for (x, a) in psi.amplitudes_mut().iter_mut().enumerate() {
            *a = c((x as f64).sin(), (x as f64 * 0.3).cos());
        }
        psi.normalize();
        let out = op.apply(&psi).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-10);
        let back = op.apply_adjoint(&out).unwrap();
        assert!(back.max_abs_diff(&psi) < 1e-10);
    }

    #[test]
    fn basis_state_matches_apply() {
        let op = random_op(8, 4, 3);
        for x in (0..256).step_by(5).take(50) {
            let dense = op.apply(&StateVector::basis(8, x).unwrap()).unwrap();
            let sparse = op.evolve_basis_state(x).unwrap();
            assert_eq!(sparse.len(), 16);
            let nrm: f64 = sparse.iter().map(|p| p.1.norm_sqr()).sum();
            assert!((nrm - 1.0).abs() < 1e-12);
            for (y, amp) in sparse {
                assert!((dense.amplitudes()[y] - amp).norm() < 1e-12);
            }
        }
        let h = op.with_sub(hadamard_layer(4).unwrap()).unwrap();
        assert!(h.evolve_basis_state(17).unwrap().iter().all(|p| (p.1.norm() - 0.25).abs() < 1e-12));
        let id = op.with_sub(SubUnitary::identity(4).unwrap()).unwrap();
        let nonzero: Vec<_> = id.evolve_basis_state(9).unwrap().into_iter().filter(|p| p.1.norm() > 0.0).collect();
        assert_eq!(nonzero, vec![(9, c(1.0, 0.0))]);
    }

    #[test]
    fn power_semigroup() {
        let op = random_op(8, 4, 4);
        let psi = StateVector::plus(8);
        let two = op.apply_power(2.0, &psi).unwrap();
        let twice = op.apply(&op.apply(&psi).unwrap()).unwrap();
        assert!(two.max_abs_diff(&twice) < 1e-9);
        assert!(op.apply_power(0.0, &psi).unwrap().max_abs_diff(&psi) < 1e-12);
        assert!(op.apply_power(1.0, &psi).unwrap().max_abs_diff(&op.apply(&psi).unwrap()) < 1e-12);
    }

    #[test]
    fn pauli_actions() {
        let z = PauliString::z(0);
        assert_eq!(z.apply(&StateVector::basis(1, 0).unwrap()).unwrap(), StateVector::basis(1, 0).unwrap());
        assert_eq!(z.apply(&StateVector::basis(1, 1).unwrap()).unwrap().amplitudes()[1], c(-1.0, 0.0));
        assert_eq!(PauliString::x(0).apply(&StateVector::basis(1, 0).unwrap()).unwrap(), StateVector::basis(1, 1).unwrap());
        let y = PauliString::y(0).apply(&StateVector::basis(1, 0).unwrap()).unwrap();
        assert_eq!(y.amplitudes()[1], c(0.0, 1.0));
        let xz: PauliString = "X0 Z1".parse().unwrap();
        let psi = random_op(6, 3, 5).apply(&StateVector::basis(6, 7).unwrap()).unwrap();
        let twice = xz.apply(&xz.apply(&psi).unwrap()).unwrap();
        assert!(twice.max_abs_diff(&psi) < 1e-15);
        assert!(PauliString::z(6).apply(&psi).is_err());
    }

    #[test]
    fn pauli_parse_display() {
        let p: PauliString = "X0Z3".parse().unwrap();
        assert_eq!(p.to_string(), "X0 Z3");
        assert!("X0 X0".parse::<PauliString>().is_err());
        assert!("Q1".parse::<PauliString>().is_err());
        assert!("X".parse::<PauliString>().is_err());
        assert_eq!("I".parse::<PauliString>().unwrap(), PauliString::identity());
    }

    #[test]
    fn dense_paths_agree() {
        let op = random_op(6, 3, 6);
        let d = op.dense_matrix().unwrap();
        let f = op.factorized_dense().unwrap();
        assert!(crate::linalg::max_abs_diff(&d, &f) < 1e-12);
        assert!(crate::linalg::unitarity_defect(&d) < 1e-9);
        let generic = DenseEvolution::new(6, d.clone()).unwrap();
        let psi = StateVector::plus(6);
        assert!(generic.apply(&psi).unwrap().max_abs_diff(&op.apply(&psi).unwrap()) < 1e-12);
        assert!(random_op(11, 3, 1).dense_matrix().is_err());
    }
}
