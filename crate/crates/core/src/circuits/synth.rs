//! Circuit synthesis for `U = P F (u (x) I) F P^dagger` and random
//! Clifford layers.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Gate, GateCircuit, PermDirection, Registry};
use crate::bitcore::SystemShape;
use crate::error::{Error, Result};
use crate::operator::RsedOperator;
use crate::randomness::{streams, PermutationBackend, RngSeed, SignBackend, SignFunction, SubsetPermutation};
use crate::subsystem::{self, SubUnitary};

pub const PERM_NAME: &str = "perm0";
pub const SIGN_NAME: &str = "f0";
pub const SUB_PHASE_NAME: &str = "p0";
pub const SUB_U_NAME: &str = "u0";

/// The subsystem layer to embed.
#[derive(Debug, Clone, PartialEq)]
pub enum USpec {
    Identity,
    /// `k` Hadamard gates.
    Hadamard,
    /// `H^{(x)k} P`: a sign layer followed by `k` Hadamard gates.
    RandomSignHadamard { seed: u64 },
    /// Kept as one opaque `SUBU` block.
    Explicit(SubUnitary),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum USpecRecord {
    Identity,
    Hadamard,
    RandomSignHadamard { seed: u64 },
    Explicit,
}

impl USpec {
    fn record(&self) -> USpecRecord {
        match self {
            USpec::Identity => USpecRecord::Identity,
            USpec::Hadamard => USpecRecord::Hadamard,
            USpec::RandomSignHadamard { seed } => USpecRecord::RandomSignHadamard { seed: *seed },
            USpec::Explicit(_) => USpecRecord::Explicit,
        }
    }

    /// The dense subsystem unitary this spec stands for.
    pub fn sub_unitary(&self, k: u32) -> Result<SubUnitary> {
        match self {
            USpec::Identity => SubUnitary::identity(k),
            USpec::Hadamard => subsystem::hadamard_layer(k),
            USpec::RandomSignHadamard { seed } => subsystem::random_sign_hadamard(k, RngSeed::new(*seed, streams::SUB_SIGN)),
            USpec::Explicit(u) if u.k() == k => Ok(u.clone()),
            USpec::Explicit(u) => Err(Error::ShapeMismatch { expected: format!("k = {k}"), got: format!("k = {}", u.k()) }),
        }
    }
}

/// Everything needed to regenerate a synthesized circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitManifest {
    pub shape: SystemShape,
    pub perm_seed: u64,
    pub sign_seed: u64,
    pub perm_backend: PermutationBackend,
    pub sign_backend: SignBackend,
    pub u_spec: USpecRecord,
    pub gate_counts: BTreeMap<String, usize>,
}

impl CircuitManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn regenerate(&self) -> Result<SynthesizedCircuit> {
        let u_spec = match self.u_spec {
            USpecRecord::Identity => USpec::Identity,
            USpecRecord::Hadamard => USpec::Hadamard,
            USpecRecord::RandomSignHadamard { seed } => USpec::RandomSignHadamard { seed },
            USpecRecord::Explicit => {
                return Err(Error::validation("explicit subsystem unitaries cannot be regenerated from a manifest"))
            }
        };
        synthesize_with_backends(self.shape, u_spec, self.perm_seed, self.sign_seed, self.perm_backend, self.sign_backend)
    }
}

#[derive(Debug, Clone)]
pub struct SynthesizedCircuit {
    pub circuit: GateCircuit,
    pub registry: Registry,
    pub manifest: CircuitManifest,
    perm: Arc<SubsetPermutation>,
    sign: Arc<SignFunction>,
    sub: SubUnitary,
}

impl SynthesizedCircuit {
    /// The blockwise operator the circuit realizes.
    pub fn operator(&self) -> Result<RsedOperator> {
        RsedOperator::from_shared(self.perm.clone(), self.sign.clone(), self.sub.clone())
    }

    /// Replace Feistel-backed `PERM` gates by their `PERM_ROUND` sequence.
    pub fn expand_feistel(&self) -> Result<GateCircuit> {
        let mut out = GateCircuit::new(self.circuit.num_qubits());
        for g in self.circuit.gates() {
            match g {
                Gate::Perm { name, dir } if self.perm.feistel().is_some() && name == PERM_NAME => {
                    let rounds = self.perm.feistel().map(|f| f.rounds()).unwrap_or(0) as u32;
                    let order: Vec<u32> = match dir {
                        PermDirection::Forward => (0..rounds).collect(),
                        PermDirection::Inverse => (0..rounds).rev().collect(),
                    };
                    for r in order {
                        out.push(Gate::PermRound { name: name.clone(), round: r })?;
                    }
                }
                other => out.push(other.clone())?,
            }
        }
        Ok(out)
    }
}

pub fn synthesize_rsed_circuit(shape: SystemShape, u_spec: USpec, perm_seed: u64, sign_seed: u64) -> Result<SynthesizedCircuit> {
    synthesize_with_backends(shape, u_spec, perm_seed, sign_seed, PermutationBackend::Auto, SignBackend::Auto)
}

/// Emit `PERM inv, PHASE_F, [u gates], PHASE_F, PERM fwd`.
pub fn synthesize_with_backends(
    shape: SystemShape,
    u_spec: USpec,
    perm_seed: u64,
    sign_seed: u64,
    perm_backend: PermutationBackend,
    sign_backend: SignBackend,
) -> Result<SynthesizedCircuit> {
    let perm = Arc::new(SubsetPermutation::sample(shape, RngSeed::new(perm_seed, streams::PERMUTATION), perm_backend)?);
    let sign = Arc::new(SignFunction::sample(shape, RngSeed::new(sign_seed, streams::SIGN), sign_backend)?);
    let sub = u_spec.sub_unitary(shape.k())?;
    let mut registry = Registry::new();
    registry.insert_perm(PERM_NAME, perm.clone());
    registry.insert_sign(SIGN_NAME, sign.clone());

    let mut c = GateCircuit::new(shape.n());
    c.push(Gate::Perm { name: PERM_NAME.into(), dir: PermDirection::Inverse })?;
    c.push(Gate::PhaseF { name: SIGN_NAME.into() })?;
    match &u_spec {
        USpec::Identity => {}
        USpec::Hadamard => {
            for q in 0..shape.k() {
                c.push(Gate::H(q))?;
            }
        }
        USpec::RandomSignHadamard { seed } => {
            let bits = subsystem::random_sign_bits(shape.k(), RngSeed::new(*seed, streams::SUB_SIGN))?;
            registry.insert_sub_phase(SUB_PHASE_NAME, bits)?;
            c.push(Gate::SubPhase { name: SUB_PHASE_NAME.into() })?;
            for q in 0..shape.k() {
                c.push(Gate::H(q))?;
            }
        }
        USpec::Explicit(u) => {
            registry.insert_sub_unitary(SUB_U_NAME, u.clone());
            c.push(Gate::SubU { name: SUB_U_NAME.into() })?;
        }
    }
    c.push(Gate::PhaseF { name: SIGN_NAME.into() })?;
    c.push(Gate::Perm { name: PERM_NAME.into(), dir: PermDirection::Forward })?;

    let manifest = CircuitManifest {
        shape,
        perm_seed,
        sign_seed,
        perm_backend,
        sign_backend,
        u_spec: u_spec.record(),
        gate_counts: c.gate_counts(),
    };
    Ok(SynthesizedCircuit { circuit: c, registry, manifest, perm, sign, sub })
}

/// Seeded sequence of `length` gates drawn uniformly from `{H, S, CX}`
/// on uniformly chosen qubits (`3n` gates when `length` is `None`).
pub fn random_clifford(n: u32, seed: RngSeed, length: Option<usize>) -> Result<GateCircuit> {
    if n == 0 {
        return Err(Error::domain("random Clifford needs n >= 1"));
    }
    let len = length.unwrap_or(3 * n as usize);
    let mut rng = seed.rng();
    let mut c = GateCircuit::new(n);
    for _ in 0..len {
        let kinds = if n >= 2 { 3 } else { 2 };
        let g = match rng.gen_range(0..kinds) {
            0 => Gate::H(rng.gen_range(0..n)),
            1 => Gate::S(rng.gen_range(0..n)),
            _ => {
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                Gate::Cx(a, b)
            }
        };
        c.push(g)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, CMat};

    fn shape(n: u32, k: u32) -> SystemShape {
        SystemShape::new(n, k).unwrap()
    }

    #[test]
    fn identity_spec_cancels() {
        let s = synthesize_rsed_circuit(shape(6, 3), USpec::Identity, 1, 2).unwrap();
        let d = s.circuit.dense(&s.registry).unwrap();
        assert!(max_abs_diff(&d, &CMat::identity(64, 64)) < 1e-14);
    }

    #[test]
    fn matches_operator_all_specs() {
        let sh = shape(8, 4);
        let explicit = subsystem::random_sign_hadamard(4, RngSeed::new(99, 3))
            .and_then(|u| subsystem::unitary_power(&u, 3.0))
            .unwrap();
        for spec in [USpec::Identity, USpec::Hadamard, USpec::RandomSignHadamard { seed: 4 }, USpec::Explicit(explicit)] {
            let s = synthesize_rsed_circuit(sh, spec, 10, 11).unwrap();
            let d = s.circuit.dense(&s.registry).unwrap();
            let op = s.operator().unwrap().dense_matrix().unwrap();
            assert!(max_abs_diff(&d, &op) < 1e-12);
        }
    }

    #[test]
    fn hadamard_gate_count() {
        let s = synthesize_rsed_circuit(shape(8, 4), USpec::Hadamard, 1, 1).unwrap();
        let g = s.circuit.gates();
        assert_eq!(g.len(), 4 + 4);
        assert!(g[2..6].iter().all(|x| matches!(x, Gate::H(_))));
        assert_eq!(s.manifest.gate_counts["H"], 4);
    }

    #[test]
    fn manifest_regenerates() {
        let s = synthesize_rsed_circuit(shape(7, 3), USpec::RandomSignHadamard { seed: 5 }, 8, 9).unwrap();
        let json = s.manifest.to_json().unwrap();
        let again = CircuitManifest::from_json(&json).unwrap().regenerate().unwrap();
        assert_eq!(again.circuit, s.circuit);
        let d1 = s.circuit.dense(&s.registry).unwrap();
        let d2 = again.circuit.dense(&again.registry).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn feistel_expansion_is_equivalent() {
        let s = synthesize_with_backends(
            shape(7, 3),
            USpec::Hadamard,
            3,
            4,
            PermutationBackend::Feistel { rounds: 4 },
            SignBackend::KeyedPrf,
        )
        .unwrap();
        let expanded = s.expand_feistel().unwrap();
        assert_eq!(expanded.gate_counts()["PERM_ROUND"], 8);
        let a = s.circuit.dense(&s.registry).unwrap();
        let b = expanded.dense(&s.registry).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-14);
    }

    #[test]
    fn random_clifford_is_seeded() {
        let a = random_clifford(5, RngSeed::new(1, 7), None).unwrap();
        let b = random_clifford(5, RngSeed::new(1, 7), None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 15);
        assert!(a.gates().iter().all(Gate::is_clifford));
        let one = random_clifford(1, RngSeed::new(2, 7), Some(20)).unwrap();
        assert!(one.gates().iter().all(|g| !matches!(g, Gate::Cx(..))));
    }
}
