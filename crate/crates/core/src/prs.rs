//! Pseudorandom-state diagnostics: coherence, subset-phase and type
//! states, symmetric-subspace references, trace distance, element and
//! variance conditions, resource layers and entanglement.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bitcore::SystemShape;
use crate::circuits::{random_clifford, Gate, GateCircuit, Registry};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::operator::StateVector;
use crate::randomness::{RngSeed, SignBackend, SignFunction, SubsetPermutation};
use crate::subsystem::SubUnitary;

/// Largest `n t` for t-copy constructions.
pub const MAX_COPY_QUBITS: u32 = 16;
/// Largest dense density-matrix dimension.
pub const MAX_DENSE_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EntropyUnit {
    #[default]
    Nats,
    Bits,
}

impl EntropyUnit {
    pub fn from_nats(self, x: f64) -> f64 {
        match self {
            EntropyUnit::Nats => x,
            EntropyUnit::Bits => x / std::f64::consts::LN_2,
        }
    }
}

/// A validated mixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMat,
}

impl DensityMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::ShapeMismatch { expected: "square matrix".into(), got: format!("{}x{}", m.nrows(), m.ncols()) });
        }
        let herm = linalg::hermiticity_defect(&m);
        if herm > 1e-10 {
            return Err(Error::validation(format!("density matrix not Hermitian (defect {herm:.3e})")));
        }
        let tr = m.trace();
        if (tr - c(1.0, 0.0)).norm() > 1e-9 {
            return Err(Error::validation(format!("density matrix trace {tr} != 1")));
        }
        let m = (&m + m.adjoint()).scale(0.5);
        let min = linalg::eigvalsh(&m).first().copied().unwrap_or(0.0);
        if min < -1e-9 {
            return Err(Error::validation(format!("density matrix has negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { m })
    }

    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        if psi.dim() > MAX_DENSE_DIM {
            return Err(Error::capacity(format!("dense density matrix limited to dimension {MAX_DENSE_DIM}")));
        }
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Self::new(&v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.m)
    }

    pub fn von_neumann_entropy(&self) -> f64 {
        linalg::entropy_from_eigs(&self.eigenvalues())
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }
}

/// Counts of repeated indices in a tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeVector {
    counts: Vec<(usize, usize)>,
}

impl TypeVector {
    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::domain("type of an empty tuple"));
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        let mut counts: Vec<(usize, usize)> = Vec::new();
        for b in sorted {
            match counts.last_mut() {
                Some((last, n)) if *last == b => *n += 1,
                _ => counts.push((b, 1)),
            }
        }
        Ok(TypeVector { counts })
    }

    pub fn counts(&self) -> &[(usize, usize)] {
        &self.counts
    }

    pub fn copies(&self) -> usize {
        self.counts.iter().map(|c| c.1).sum()
    }

    /// Number of distinct indices.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }
}

/// `2^{-k/2} sum_b (-1)^{f(ba)} |p(ba)>` for seed block `a`.
pub fn subset_phase_state(p: &SubsetPermutation, f: &SignFunction, a: usize, shape: SystemShape) -> Result<StateVector> {
    if p.shape() != shape || f.shape() != shape {
        return Err(Error::ShapeMismatch { expected: format!("{shape:?}"), got: format!("{:?} / {:?}", p.shape(), f.shape()) });
    }
    if a >= shape.num_seeds() {
        return Err(Error::domain(format!("seed {a} not below {}", shape.num_seeds())));
    }
    let mut psi = StateVector::zero(shape.n());
    let amp = (shape.sub_dim() as f64).sqrt().recip();
    for b in 0..shape.sub_dim() {
        let x = shape.join_unchecked(b, a);
        psi.amplitudes_mut()[p.permute_unchecked(x)] = c(amp * f.factor(x), 0.0);
    }
    Ok(psi)
}

pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

/// Relative entropy of coherence `S(diag rho) - S(rho)`.
pub fn coherence_rel_entropy(state: StateRef<'_>, unit: EntropyUnit) -> Result<f64> {
    let nats = match state {
        StateRef::Pure(psi) => {
            let nrm = psi.norm();
            if (nrm - 1.0).abs() > 1e-9 {
                return Err(Error::validation(format!("state norm {nrm} != 1")));
            }
            linalg::entropy_from_eigs(&psi.probabilities())
        }
        StateRef::Mixed(rho) => {
            let diag: Vec<f64> = (0..rho.dim()).map(|i| rho.m[(i, i)].re).collect();
            linalg::entropy_from_eigs(&diag) - rho.von_neumann_entropy()
        }
    };
    Ok(unit.from_nats(nats.max(0.0)))
}

/// A state on `t` copies supported on the span of `K` basis states
/// `positions[b]`, stored in the `K^t` restricted space. Restricted index
/// of `(b_1, ..., b_t)` is `sum_i b_i K^{i-1}`.
#[derive(Debug, Clone)]
pub struct SubsetTensorState {
    pub n: u32,
    pub copies: u32,
    pub positions: Vec<usize>,
    pub rho: DensityMatrix,
}

impl SubsetTensorState {
    /// Embed into the full `2^{nt}` space (`nt <= 10`).
    pub fn to_full(&self) -> Result<DensityMatrix> {
        if self.n * self.copies > 10 {
            return Err(Error::capacity("full t-copy embedding limited to nt <= 10"));
        }
        let full = 1usize << (self.n * self.copies);
        let kd = self.positions.len();
        let map = |mut r: usize| {
            let mut x = 0usize;
            for i in 0..self.copies {
                x |= self.positions[r % kd] << (self.n * i);
                r /= kd;
            }
            x
        };
        let dim = self.rho.dim();
        let idx: Vec<usize> = (0..dim).map(map).collect();
        let mut m = CMat::zeros(full, full);
        for r in 0..dim {
            for s in 0..dim {
                m[(idx[r], idx[s])] = self.rho.m[(r, s)];
            }
        }
        DensityMatrix::new(m)
    }
}

fn copy_capacity(shape: SystemShape, t: u32) -> Result<usize> {
    if t == 0 {
        return Err(Error::domain("need at least one copy"));
    }
    if shape.n() * t > MAX_COPY_QUBITS {
        return Err(Error::capacity(format!("t-copy states limited to nt <= {MAX_COPY_QUBITS}")));
    }
    let dim = shape.sub_dim().pow(t);
    if dim > MAX_DENSE_DIM {
        return Err(Error::capacity(format!("restricted t-copy dimension {dim} exceeds {MAX_DENSE_DIM}")));
    }
    Ok(dim)
}

/// All strictly increasing `t`-tuples from `0..kd`.
fn distinct_subsets(kd: usize, t: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, kd: usize, t: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        for b in start..kd {
            cur.push(b);
            rec(b + 1, kd, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, kd, t, &mut Vec::new(), &mut out);
    out
}

fn permutations(t: usize) -> Vec<Vec<usize>> {
    if t == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(t - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, t - 1);
            out.push(p);
        }
    }
    out
}

fn tuple_index(tuple: &[usize], base: usize) -> usize {
    tuple.iter().rev().fold(0, |acc, &b| acc * base + b)
}

/// Uniform mixture of symmetrized distinct-index states over the block
/// `{p(join(b, a))}`.
pub fn hybrid3_state(p: &SubsetPermutation, a: usize, shape: SystemShape, t: u32) -> Result<SubsetTensorState> {
    if p.shape() != shape {
        return Err(Error::ShapeMismatch { expected: format!("{shape:?}"), got: format!("{:?}", p.shape()) });
    }
    if a >= shape.num_seeds() {
        return Err(Error::domain(format!("seed {a} not below {}", shape.num_seeds())));
    }
    let dim = copy_capacity(shape, t)?;
    let kd = shape.sub_dim();
    let t = t as usize;
    if t > kd {
        return Err(Error::domain("more copies than subset elements leaves no distinct types"));
    }
    let subsets = distinct_subsets(kd, t);
    let perms = permutations(t);
    let amp = (perms.len() as f64).sqrt().recip();
    let weight = 1.0 / subsets.len() as f64;
    let mut m = CMat::zeros(dim, dim);
    let mut support = Vec::with_capacity(perms.len());
    for set in &subsets {
        support.clear();
        for pi in &perms {
            let tuple: Vec<usize> = pi.iter().map(|&i| set[i]).collect();
            support.push(tuple_index(&tuple, kd));
        }
        for &r in &support {
            for &s in &support {
                m[(r, s)] += c(weight * amp * amp, 0.0);
            }
        }
    }
    let mut positions = vec![0usize; kd];
    p.block_images(a, &mut positions);
    Ok(SubsetTensorState { n: shape.n(), copies: t as u32, positions, rho: DensityMatrix::new(m)? })
}

/// Average of `(U|p(b* a)><p(b* a)|U^dagger)^{(x)t}` over `samples` fresh
/// sign functions, in the same restricted space as [`hybrid3_state`].
pub fn f_ensemble_state(
    u: &SubUnitary,
    p: &SubsetPermutation,
    a: usize,
    b_star: usize,
    t: u32,
    samples: usize,
    seed: RngSeed,
) -> Result<SubsetTensorState> {
    let shape = p.shape();
    if u.k() != shape.k() {
        return Err(Error::ShapeMismatch { expected: format!("k = {}", shape.k()), got: format!("k = {}", u.k()) });
    }
    if a >= shape.num_seeds() || b_star >= shape.sub_dim() {
        return Err(Error::domain("seed or subsystem index out of range"));
    }
    if samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let dim = copy_capacity(shape, t)?;
    let kd = shape.sub_dim();
    let mut m = CMat::zeros(dim, dim);
    for s in 0..samples as u64 {
        let f = SignFunction::sample(shape, seed.child(s), SignBackend::ExplicitTable)?;
        let v: Vec<C64> = (0..kd).map(|bp| u.get(bp, b_star) * f.factor(shape.join_unchecked(bp, a))).collect();
        let mut tensor = vec![c(1.0, 0.0)];
        for _ in 0..t {
            let mut next = Vec::with_capacity(tensor.len() * kd);
            for &vb in &v {
                next.extend(tensor.iter().map(|&x| x * vb));
            }
            tensor = next;
        }
        let col = nalgebra::DVector::from_vec(tensor);
        m += &col * col.adjoint();
    }
    m /= c(samples as f64, 0.0);
    let mut positions = vec![0usize; kd];
    p.block_images(a, &mut positions);
    Ok(SubsetTensorState { n: shape.n(), copies: t, positions, rho: DensityMatrix::new(m)? })
}

/// `Pi_sym / tr Pi_sym` on `t` copies of a `d`-dimensional space.
pub fn sym_projector_state(d: usize, t: u32) -> Result<DensityMatrix> {
    if d == 0 || t == 0 {
        return Err(Error::domain("need d >= 1 and t >= 1"));
    }
    let dim = (d as u128).pow(t);
    if dim > MAX_DENSE_DIM as u128 {
        return Err(Error::capacity(format!("symmetric projector dimension {dim} exceeds {MAX_DENSE_DIM}")));
    }
    let dim = dim as usize;
    let t = t as usize;
    let perms = permutations(t);
    let mut m = CMat::zeros(dim, dim);
    let mut digits = vec![0usize; t];
    for x in 0..dim {
        let mut r = x;
        for dgt in digits.iter_mut() {
            *dgt = r % d;
            r /= d;
        }
        for pi in &perms {
            let permuted: Vec<usize> = pi.iter().map(|&i| digits[i]).collect();
            m[(tuple_index(&permuted, d), x)] += c(1.0, 0.0);
        }
    }
    let tr = m.trace();
    DensityMatrix::new(m / tr)
}

/// `(1/2) sum |eig(rho - sigma)|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::ShapeMismatch { expected: format!("dimension {}", rho.dim()), got: format!("dimension {}", sigma.dim()) });
    }
    let diff = &rho.m - &sigma.m;
    Ok(0.5 * linalg::eigvalsh(&diff).iter().map(|x| x.abs()).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignVariance {
    /// `binom(K,t)^{-1} sum (X_b / mean X - 1)^2`, or infinity if degenerate.
    pub value: f64,
    pub mean_x: f64,
    /// Set when every `X_b` vanishes.
    pub degenerate: bool,
    pub tuples: usize,
}

/// Spread of `X_b = prod_i |u_{b_i, b*}|^2` over distinct `t`-tuples.
pub fn design_variance_condition(u: &SubUnitary, t: u32, b_star: usize) -> Result<DesignVariance> {
    let kd = u.dim();
    if kd > 64 || t == 0 || t > 3 {
        return Err(Error::capacity("design variance enumerates only K <= 64 and 1 <= t <= 3"));
    }
    if b_star >= kd {
        return Err(Error::domain(format!("b* = {b_star} not below K = {kd}")));
    }
    let col: Vec<f64> = (0..kd).map(|b| u.get(b, b_star).norm_sqr()).collect();
    let xs: Vec<f64> = distinct_subsets(kd, t as usize).iter().map(|s| s.iter().map(|&b| col[b]).product()).collect();
    let mean = linalg::pairwise_sum(&xs) / xs.len() as f64;
    if mean <= 1e-300 {
        return Ok(DesignVariance { value: f64::INFINITY, mean_x: mean, degenerate: true, tuples: xs.len() });
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x / mean - 1.0).powi(2)).collect();
    Ok(DesignVariance { value: linalg::pairwise_sum(&dev) / xs.len() as f64, mean_x: mean, degenerate: false, tuples: xs.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElementCondition {
    /// Fraction of entries with `|u_{bb'}|^2 > K^{-eps}`.
    pub exceed_fraction: f64,
    pub pass: bool,
}

pub fn element_condition_check(u: &SubUnitary, eps: f64) -> ElementCondition {
    let thr = (u.dim() as f64).powf(-eps);
    let over = u.matrix().iter().filter(|z| z.norm_sqr() > thr).count();
    ElementCondition { exceed_fraction: over as f64 / (u.dim() * u.dim()) as f64, pass: over == 0 }
}

/// A resource layer appended after the state preparation.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    RandomClifford { seed: RngSeed, length: Option<usize> },
    TLayer(Vec<u32>),
    HadamardLayer(Vec<u32>),
}

impl Layer {
    pub fn circuit(&self, n: u32) -> Result<GateCircuit> {
        let gates = match self {
            Layer::RandomClifford { seed, length } => return random_clifford(n, *seed, *length),
            Layer::TLayer(sites) => sites.iter().map(|&q| Gate::T(q)).collect(),
            Layer::HadamardLayer(sites) => sites.iter().map(|&q| Gate::H(q)).collect(),
        };
        GateCircuit::from_gates(n, gates)
    }
}

pub fn append_layer(psi: &StateVector, layer: &Layer) -> Result<StateVector> {
    layer.circuit(psi.num_qubits())?.simulate(&Registry::new(), psi)
}

/// Von Neumann entropy of the reduced state on `sites` (nats).
pub fn entanglement_entropy(psi: &StateVector, sites: &[u32]) -> Result<f64> {
    let n = psi.num_qubits();
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sites.len() || sorted.iter().any(|&s| s >= n) {
        return Err(Error::domain("cut must list distinct sites below n"));
    }
    let rest: Vec<u32> = (0..n).filter(|s| !sorted.contains(s)).collect();
    let (small, large) = if sorted.len() <= rest.len() { (&sorted, &rest) } else { (&rest, &sorted) };
    if small.len() > 12 {
        return Err(Error::capacity("reduced density matrix too large"));
    }
    let gather = |x: usize, set: &[u32]| set.iter().enumerate().fold(0usize, |acc, (i, &s)| acc | (((x >> s) & 1) << i));
    let mut m = CMat::zeros(1 << small.len(), 1 << large.len());
    for (x, &amp) in psi.amplitudes().iter().enumerate() {
        m[(gather(x, small), gather(x, large))] = amp;
    }
    let rho = &m * m.adjoint();
    Ok(linalg::entropy_from_eigs(&linalg::eigvalsh(&rho)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::{streams, PermutationBackend};
    use std::f64::consts::LN_2;

    fn shape(n: u32, k: u32) -> SystemShape {
        SystemShape::new(n, k).unwrap()
    }

    #[test]
    fn subset_phase_examples() {
        let s = shape(4, 4);
        let psi = subset_phase_state(&SubsetPermutation::identity(s), &SignFunction::zero(s), 0, s).unwrap();
        assert!(psi.max_abs_diff(&StateVector::plus(4)) < 1e-15);

        let s = shape(9, 4);
        let p = SubsetPermutation::sample(s, RngSeed::new(1, streams::PERMUTATION), PermutationBackend::Auto).unwrap();
        let f = SignFunction::sample(s, RngSeed::new(1, streams::SIGN), SignBackend::Auto).unwrap();
        let psi = subset_phase_state(&p, &f, 7, s).unwrap();
        assert_eq!(psi.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), 16);
        let coh = coherence_rel_entropy(StateRef::Pure(&psi), EntropyUnit::Nats).unwrap();
        assert!((coh - 4.0 * LN_2).abs() < 1e-12);
        assert!((coherence_rel_entropy(StateRef::Pure(&psi), EntropyUnit::Bits).unwrap() - 4.0).abs() < 1e-12);
        assert!(subset_phase_state(&p, &f, 32, s).is_err());
    }

    #[test]
    fn coherence_extremes() {
        let zero = StateVector::basis(5, 0).unwrap();
        assert_eq!(coherence_rel_entropy(StateRef::Pure(&zero), EntropyUnit::Nats).unwrap(), 0.0);
        let plus = StateVector::plus(5);
        assert!((coherence_rel_entropy(StateRef::Pure(&plus), EntropyUnit::Nats).unwrap() - 5.0 * LN_2).abs() < 1e-12);
        let rho = DensityMatrix::from_pure(&StateVector::plus(3)).unwrap();
        assert!((coherence_rel_entropy(StateRef::Mixed(&rho), EntropyUnit::Nats).unwrap() - 3.0 * LN_2).abs() < 1e-9);
    }

    #[test]
    fn hybrid3_small_cases() {
        let s = shape(3, 1);
        let p = SubsetPermutation::sample(s, RngSeed::new(2, 1), PermutationBackend::ExplicitTable).unwrap();
        let h = hybrid3_state(&p, 1, s, 1).unwrap();
        let full = h.to_full().unwrap();
        let ev = full.eigenvalues();
        assert!((ev[ev.len() - 1] - 0.5).abs() < 1e-12 && (ev[ev.len() - 2] - 0.5).abs() < 1e-12);
        for pos in &h.positions {
            assert!((full.matrix()[(*pos, *pos)].re - 0.5).abs() < 1e-12);
        }

        let s = shape(4, 2);
        let p = SubsetPermutation::identity(s);
        let h = hybrid3_state(&p, 0, s, 2).unwrap();
        assert!((h.rho.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(h.rho.eigenvalues()[0] > -1e-12);
        assert!(h.to_full().is_ok());
    }

    #[test]
    fn sym_projector_examples() {
        let s = sym_projector_state(3, 1).unwrap();
        assert!(linalg::max_abs_diff(s.matrix(), &CMat::identity(3, 3).scale(1.0 / 3.0)) < 1e-15);
        let s = sym_projector_state(2, 2).unwrap();
        let m = s.matrix() * c(3.0, 0.0);
        // Explicit triplet projector.
        let expect = CMat::from_row_slice(
            4,
            4,
            &[1.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 1.0].map(|x| c(x, 0.0)),
        );
        assert!(linalg::max_abs_diff(&m, &expect) < 1e-14);
        for (d, t, rank) in [(2usize, 2u32, 3usize), (2, 3, 4), (4, 2, 10)] {
            let s = sym_projector_state(d, t).unwrap();
            let nonzero = s.eigenvalues().iter().filter(|&&x| x > 1e-9).count();
            assert_eq!(nonzero, rank);
            assert!((s.purity() - 1.0 / rank as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_distance_basics() {
        let z0 = DensityMatrix::from_pure(&StateVector::basis(1, 0).unwrap()).unwrap();
        let z1 = DensityMatrix::from_pure(&StateVector::basis(1, 1).unwrap()).unwrap();
        assert!(trace_distance(&z0, &z0).unwrap().abs() < 1e-15);
        assert!((trace_distance(&z0, &z1).unwrap() - 1.0).abs() < 1e-14);
        let bad = sym_projector_state(3, 1).unwrap();
        assert!(trace_distance(&z0, &bad).is_err());
    }

    #[test]
    fn design_variance_examples() {
        let h = crate::subsystem::hadamard_layer(4).unwrap();
        let dv = design_variance_condition(&h, 2, 3).unwrap();
        assert!(dv.value.abs() < 1e-24 && !dv.degenerate);
        assert_eq!(dv.tuples, 120);
        let id = SubUnitary::identity(4).unwrap();
        let dv = design_variance_condition(&id, 2, 3).unwrap();
        assert!(dv.degenerate && dv.value.is_infinite());
        assert!(design_variance_condition(&id, 4, 3).is_err());
    }

    #[test]
    fn element_condition_examples() {
        let h = crate::subsystem::hadamard_layer(5).unwrap();
        assert!(element_condition_check(&h, 0.5).pass);
        let id = SubUnitary::identity(5).unwrap();
        let r = element_condition_check(&id, 0.5);
        assert!(!r.pass && (r.exceed_fraction - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn layers() {
        let psi = StateVector::basis(4, 5).unwrap();
        assert_eq!(append_layer(&psi, &Layer::HadamardLayer(vec![])).unwrap(), psi);
        let plus = append_layer(&StateVector::basis(4, 0).unwrap(), &Layer::HadamardLayer(vec![0, 1, 2, 3])).unwrap();
        assert!((coherence_rel_entropy(StateRef::Pure(&plus), EntropyUnit::Nats).unwrap() - 4.0 * LN_2).abs() < 1e-12);
        let t = append_layer(&plus, &Layer::TLayer(vec![1, 2])).unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-14);
        let cl = append_layer(&t, &Layer::RandomClifford { seed: RngSeed::new(1, 7), length: None }).unwrap();
        assert!((cl.norm() - 1.0).abs() < 1e-14);
        assert!(append_layer(&psi, &Layer::TLayer(vec![4])).is_err());
    }

    #[test]
    fn entanglement_examples() {
        let prod = StateVector::plus(4);
        assert!(entanglement_entropy(&prod, &[0, 1]).unwrap().abs() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(2, vec![c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)]).unwrap();
        assert!((entanglement_entropy(&bell, &[0]).unwrap() - LN_2).abs() < 1e-12);
        let psi = crate::prs::append_layer(
            &StateVector::basis(5, 0).unwrap(),
            &Layer::RandomClifford { seed: RngSeed::new(4, 7), length: Some(40) },
        )
        .unwrap();
        let a = entanglement_entropy(&psi, &[0, 3]).unwrap();
        let b = entanglement_entropy(&psi, &[1, 2, 4]).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!(entanglement_entropy(&psi, &[0, 0]).is_err());
        assert!(entanglement_entropy(&psi, &[5]).is_err());
    }

    #[test]
    fn type_vector_counts() {
        let tv = TypeVector::from_indices(&[3, 1, 3, 3]).unwrap();
        assert_eq!(tv.counts(), &[(1, 1), (3, 3)]);
        assert_eq!((tv.copies(), tv.distinct()), (4, 2));
        assert!(TypeVector::from_indices(&[]).is_err());
    }
}
