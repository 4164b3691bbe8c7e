//! Gate-level circuits: elementary gates plus opaque permutation and
//! sign-function primitives resolved through a [`Registry`].

pub mod format;
pub mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::operator::{check_dense, Evolution, StateVector};
use crate::randomness::{SignFunction, SubsetPermutation};
use crate::subsystem::SubUnitary;

pub use format::{parse, serialize};
pub use synth::{random_clifford, synthesize_rsed_circuit, CircuitManifest, SynthesizedCircuit, USpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PermDirection {
    Forward,
    Inverse,
}

impl PermDirection {
    pub fn flipped(self) -> Self {
        match self {
            PermDirection::Forward => PermDirection::Inverse,
            PermDirection::Inverse => PermDirection::Forward,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            PermDirection::Forward => "fwd",
            PermDirection::Inverse => "inv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    H(u32),
    X(u32),
    S(u32),
    T(u32),
    Cx(u32, u32),
    Ccx(u32, u32, u32),
    /// Registered permutation of basis labels.
    Perm { name: String, dir: PermDirection },
    /// Registered sign function `(-1)^{f(x)}` on the full label.
    PhaseF { name: String },
    /// Registered diagonal sign on the low `k` qubits.
    SubPhase { name: String },
    /// Registered dense unitary on the low `k` qubits.
    SubU { name: String },
    /// One round of a registered Feistel permutation (an involution).
    PermRound { name: String, round: u32 },
}

impl Gate {
    pub fn qubits(&self) -> Vec<u32> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::S(q) | Gate::T(q) => vec![q],
            Gate::Cx(a, b) => vec![a, b],
            Gate::Ccx(a, b, t) => vec![a, b, t],
            _ => Vec::new(),
        }
    }

    pub fn mnemonic(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::X(_) => "X",
            Gate::S(_) => "S",
            Gate::T(_) => "T",
            Gate::Cx(..) => "CX",
            Gate::Ccx(..) => "CCX",
            Gate::Perm { .. } => "PERM",
            Gate::PhaseF { .. } => "PHASE_F",
            Gate::SubPhase { .. } => "SUBPHASE",
            Gate::SubU { .. } => "SUBU",
            Gate::PermRound { .. } => "PERM_ROUND",
        }
    }

    pub fn is_clifford(&self) -> bool {
        matches!(self, Gate::H(_) | Gate::X(_) | Gate::S(_) | Gate::Cx(..))
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::S(q) | Gate::T(q) => write!(f, "{} {q}", self.mnemonic()),
            Gate::Cx(a, b) => write!(f, "CX {a} {b}"),
            Gate::Ccx(a, b, t) => write!(f, "CCX {a} {b} {t}"),
            Gate::Perm { name, dir } => write!(f, "PERM {} {name}", dir.mnemonic()),
            Gate::PhaseF { name } => write!(f, "PHASE_F {name}"),
            Gate::SubPhase { name } => write!(f, "SUBPHASE {name}"),
            Gate::SubU { name } => write!(f, "SUBU {name}"),
            Gate::PermRound { name, round } => write!(f, "PERM_ROUND {name} {round}"),
        }
    }
}

/// An ordered gate list on `n` qubits, applied left to right.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GateCircuit {
    n: u32,
    gates: Vec<Gate>,
}

impl GateCircuit {
    pub fn new(n: u32) -> Self {
        GateCircuit { n, gates: Vec::new() }
    }

    pub fn from_gates(n: u32, gates: Vec<Gate>) -> Result<Self> {
        let mut c = GateCircuit::new(n);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= self.n) {
            return Err(Error::domain(format!("qubit {q} not below n = {}", self.n)));
        }
        for (i, a) in qs.iter().enumerate() {
            if qs[i + 1..].contains(a) {
                return Err(Error::domain(format!("gate `{gate}` repeats qubit {a}")));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &GateCircuit) -> Result<()> {
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> u32 {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gate_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for g in &self.gates {
            *m.entry(g.mnemonic().to_string()).or_insert(0) += 1;
        }
        m
    }

    /// Check that every reference resolves against `registry`.
    pub fn validate(&self, registry: &Registry) -> Result<()> {
        for g in &self.gates {
            match g {
                Gate::Perm { name, .. } => {
                    registry.perm(name, self.n)?;
                }
                Gate::PermRound { name, round } => {
                    let p = registry.perm(name, self.n)?;
                    let net = p.feistel().ok_or_else(|| Error::validation(format!("`{name}` is not a Feistel permutation")))?;
                    if *round as usize >= net.rounds() {
                        return Err(Error::domain(format!("round {round} out of range for `{name}`")));
                    }
                }
                Gate::PhaseF { name } => {
                    registry.sign(name, self.n)?;
                }
                Gate::SubPhase { name } => {
                    registry.sub_phase(name, self.n)?;
                }
                Gate::SubU { name } => {
                    registry.sub_unitary(name, self.n)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Run the circuit on `psi`.
    pub fn simulate(&self, registry: &Registry, psi: &StateVector) -> Result<StateVector> {
        psi.check_qubits(self.n)?;
        self.validate(registry)?;
        let mut amps = psi.amplitudes().to_vec();
        for g in &self.gates {
            apply_gate(g, registry, self.n, &mut amps, false)?;
        }
        StateVector::from_amplitudes(self.n, amps)
    }

    /// Run the inverse circuit on `psi`.
    pub fn simulate_adjoint(&self, registry: &Registry, psi: &StateVector) -> Result<StateVector> {
        psi.check_qubits(self.n)?;
        self.validate(registry)?;
        let mut amps = psi.amplitudes().to_vec();
        for g in self.gates.iter().rev() {
            apply_gate(g, registry, self.n, &mut amps, true)?;
        }
        StateVector::from_amplitudes(self.n, amps)
    }

    /// Dense unitary (`n <= 10`).
    pub fn dense(&self, registry: &Registry) -> Result<CMat> {
        check_dense(self.n)?;
        CircuitEvolution::new(self, registry)?.dense()
    }
}

/// Named randomness objects referenced by circuits.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    perms: BTreeMap<String, Arc<SubsetPermutation>>,
    signs: BTreeMap<String, Arc<SignFunction>>,
    sub_phases: BTreeMap<String, Vec<u8>>,
    sub_unitaries: BTreeMap<String, SubUnitary>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_perm(&mut self, name: impl Into<String>, p: Arc<SubsetPermutation>) {
        self.perms.insert(name.into(), p);
    }

    pub fn insert_sign(&mut self, name: impl Into<String>, f: Arc<SignFunction>) {
        self.signs.insert(name.into(), f);
    }

    /// Sign bits indexed by the low `k` bits; the length must be `2^k`.
    pub fn insert_sub_phase(&mut self, name: impl Into<String>, bits: Vec<u8>) -> Result<()> {
        if !bits.len().is_power_of_two() {
            return Err(Error::validation("sub-phase length must be a power of two"));
        }
        self.sub_phases.insert(name.into(), bits);
        Ok(())
    }

    pub fn insert_sub_unitary(&mut self, name: impl Into<String>, u: SubUnitary) {
        self.sub_unitaries.insert(name.into(), u);
    }

    fn perm(&self, name: &str, n: u32) -> Result<&SubsetPermutation> {
        let p = self.perms.get(name).ok_or_else(|| Error::UnresolvedReference(name.to_string()))?;
        if p.shape().n() != n {
            return Err(Error::ShapeMismatch { expected: format!("n = {n}"), got: format!("`{name}` on n = {}", p.shape().n()) });
        }
        Ok(p)
    }

    fn sign(&self, name: &str, n: u32) -> Result<&SignFunction> {
        let f = self.signs.get(name).ok_or_else(|| Error::UnresolvedReference(name.to_string()))?;
        if f.shape().n() != n {
            return Err(Error::ShapeMismatch { expected: format!("n = {n}"), got: format!("`{name}` on n = {}", f.shape().n()) });
        }
        Ok(f)
    }

    fn sub_phase(&self, name: &str, n: u32) -> Result<&[u8]> {
        let bits = self.sub_phases.get(name).ok_or_else(|| Error::UnresolvedReference(name.to_string()))?;
        if bits.len() > 1usize << n {
            return Err(Error::domain(format!("`{name}` acts on more than {n} qubits")));
        }
        Ok(bits)
    }

    fn sub_unitary(&self, name: &str, n: u32) -> Result<&SubUnitary> {
        let u = self.sub_unitaries.get(name).ok_or_else(|| Error::UnresolvedReference(name.to_string()))?;
        if u.k() > n {
            return Err(Error::domain(format!("`{name}` acts on more than {n} qubits")));
        }
        Ok(u)
    }
}

fn relabel(amps: &mut Vec<C64>, map: impl Fn(usize) -> usize) {
    let mut out = vec![C64::default(); amps.len()];
    for (x, &v) in amps.iter().enumerate() {
        out[map(x)] = v;
    }
    *amps = out;
}

fn apply_gate(g: &Gate, reg: &Registry, n: u32, amps: &mut Vec<C64>, adjoint: bool) -> Result<()> {
    let phase_on_one = |amps: &mut Vec<C64>, q: u32, ph: C64| {
        let m = 1usize << q;
        amps.iter_mut().enumerate().filter(|(x, _)| x & m != 0).for_each(|(_, a)| *a *= ph);
    };
    match g {
        Gate::H(q) => {
            let m = 1usize << q;
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for x in 0..amps.len() {
                if x & m == 0 {
                    let (a0, a1) = (amps[x], amps[x | m]);
                    amps[x] = (a0 + a1) * r;
                    amps[x | m] = (a0 - a1) * r;
                }
            }
        }
        Gate::X(q) => {
            let m = 1usize << q;
            for x in 0..amps.len() {
                if x & m == 0 {
                    amps.swap(x, x | m);
                }
            }
        }
        Gate::S(q) => phase_on_one(amps, *q, if adjoint { c(0.0, -1.0) } else { c(0.0, 1.0) }),
        Gate::T(q) => {
            let s = if adjoint { -1.0 } else { 1.0 };
            phase_on_one(amps, *q, c(0.0, s * std::f64::consts::FRAC_PI_4).exp())
        }
        Gate::Cx(ctl, tgt) => {
            let (mc, mt) = (1usize << ctl, 1usize << tgt);
            for x in 0..amps.len() {
                if x & mc != 0 && x & mt == 0 {
                    amps.swap(x, x | mt);
                }
            }
        }
        Gate::Ccx(c1, c2, tgt) => {
            let (m1, m2, mt) = (1usize << c1, 1usize << c2, 1usize << tgt);
            for x in 0..amps.len() {
                if x & m1 != 0 && x & m2 != 0 && x & mt == 0 {
                    amps.swap(x, x | mt);
                }
            }
        }
        Gate::Perm { name, dir } => {
            let p = reg.perm(name, n)?;
            let dir = if adjoint { dir.flipped() } else { *dir };
            match dir {
                PermDirection::Forward => relabel(amps, |x| p.permute_unchecked(x)),
                PermDirection::Inverse => relabel(amps, |x| p.invert_unchecked(x)),
            }
        }
        Gate::PermRound { name, round } => {
            let p = reg.perm(name, n)?;
            let net = p.feistel().ok_or_else(|| Error::validation(format!("`{name}` is not a Feistel permutation")))?;
            relabel(amps, |x| net.round(*round as usize, x));
        }
        Gate::PhaseF { name } => {
            let f = reg.sign(name, n)?;
            amps.iter_mut().enumerate().for_each(|(x, a)| *a *= f.factor(x));
        }
        Gate::SubPhase { name } => {
            let bits = reg.sub_phase(name, n)?;
            let mask = bits.len() - 1;
            amps.iter_mut()
                .enumerate()
                .for_each(|(x, a)| *a *= crate::bitcore::parity_sign(bits[x & mask]));
        }
        Gate::SubU { name } => {
            let u = reg.sub_unitary(name, n)?;
            let m = if adjoint { u.matrix().adjoint() } else { u.matrix().clone() };
            let kd = u.dim();
            for block in amps.chunks_mut(kd) {
                let v = nalgebra::DVector::from_column_slice(block);
                let out = &m * v;
                block.copy_from_slice(out.as_slice());
            }
        }
    }
    Ok(())
}

/// A circuit bound to its registry, usable wherever an [`Evolution`] is.
#[derive(Debug, Clone, Copy)]
pub struct CircuitEvolution<'a> {
    circuit: &'a GateCircuit,
    registry: &'a Registry,
}

impl<'a> CircuitEvolution<'a> {
    pub fn new(circuit: &'a GateCircuit, registry: &'a Registry) -> Result<Self> {
        circuit.validate(registry)?;
        Ok(CircuitEvolution { circuit, registry })
    }
}

impl Evolution for CircuitEvolution<'_> {
    fn num_qubits(&self) -> u32 {
        self.circuit.n
    }

    fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.circuit.simulate(self.registry, psi)
    }

    fn apply_adjoint(&self, psi: &StateVector) -> Result<StateVector> {
        self.circuit.simulate_adjoint(self.registry, psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn empty_is_identity() {
        let c0 = GateCircuit::new(3);
        let d = c0.dense(&Registry::new()).unwrap();
        assert!(max_abs_diff(&d, &CMat::identity(8, 8)) < 1e-15);
    }

    #[test]
    fn hadamard_on_zero() {
        let c0 = GateCircuit::from_gates(1, vec![Gate::H(0)]).unwrap();
        let out = c0.simulate(&Registry::new(), &StateVector::basis(1, 0).unwrap()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitudes()[0].re - r).abs() < 1e-15 && (out.amplitudes()[1].re - r).abs() < 1e-15);
    }

    #[test]
    fn toffoli_truth_table() {
        let c0 = GateCircuit::from_gates(3, vec![Gate::Ccx(0, 1, 2)]).unwrap();
        for x in 0..8 {
            let out = c0.simulate(&Registry::new(), &StateVector::basis(3, x).unwrap()).unwrap();
            let expect = if x & 3 == 3 { x ^ 4 } else { x };
            assert_eq!(out, StateVector::basis(3, expect).unwrap());
        }
    }

    #[test]
    fn adjoint_undoes() {
        let gates = vec![Gate::H(0), Gate::T(1), Gate::S(0), Gate::Cx(0, 1), Gate::T(0), Gate::H(1)];
        let c0 = GateCircuit::from_gates(2, gates).unwrap();
        let reg = Registry::new();
        let psi = StateVector::plus(2);
        let back = c0.simulate_adjoint(&reg, &c0.simulate(&reg, &psi).unwrap()).unwrap();
        assert!(back.max_abs_diff(&psi) < 1e-14);
    }

    #[test]
    fn validation_errors() {
        assert!(GateCircuit::from_gates(2, vec![Gate::H(2)]).is_err());
        assert!(GateCircuit::from_gates(2, vec![Gate::Cx(1, 1)]).is_err());
        let c0 = GateCircuit::from_gates(2, vec![Gate::PhaseF { name: "f".into() }]).unwrap();
        assert!(matches!(c0.validate(&Registry::new()), Err(Error::UnresolvedReference(_))));
    }
}
