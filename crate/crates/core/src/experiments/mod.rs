//! Seeded experiment drivers with CSV data and JSON summaries.

pub mod drivers;
pub mod verify;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randomness::{streams, RngSeed};
use crate::subsystem::{self, SubHamiltonian, SubUnitary};

pub use drivers::*;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRuleName {
    /// `k = ceil((log2 n)^2)`.
    Log2sq,
}

/// Subsystem size: fixed, or derived from `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KRule {
    Fixed(u32),
    Rule(KRuleName),
}

impl Default for KRule {
    fn default() -> Self {
        KRule::Fixed(4)
    }
}

impl KRule {
    pub fn resolve(&self, n: u32) -> u32 {
        match *self {
            KRule::Fixed(k) => k,
            KRule::Rule(KRuleName::Log2sq) => {
                let l = (n as f64).log2();
                (l * l - 1e-12).ceil().max(1.0) as u32
            }
        }
    }
}

/// Subsystem dynamics at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum USpecConfig {
    Identity,
    /// `(H^{(x)k})^t`.
    Hadamard,
    /// `(H^{(x)k} P)^t` with a fresh `P` per realization.
    #[default]
    RandomSignHadamard,
    /// `e^{-i h t}` with a fresh Pauli SYK `h` per realization.
    PauliSyk,
}

impl USpecConfig {
    pub fn name(&self) -> &'static str {
        match self {
            USpecConfig::Identity => "identity",
            USpecConfig::Hadamard => "hadamard",
            USpecConfig::RandomSignHadamard => "random_sign_hadamard",
            USpecConfig::PauliSyk => "pauli_syk",
        }
    }

    /// The `t = 1` unitary for unitary-power specs; `None` for Hamiltonian specs.
    pub fn base(&self, k: u32, seed: RngSeed) -> Result<Option<SubUnitary>> {
        Ok(match self {
            USpecConfig::Identity => Some(SubUnitary::identity(k)?),
            USpecConfig::Hadamard => Some(subsystem::hadamard_layer(k)?),
            USpecConfig::RandomSignHadamard => {
                Some(subsystem::random_sign_hadamard(k, RngSeed::new(seed.seed, streams::SUB_SIGN))?)
            }
            USpecConfig::PauliSyk => None,
        })
    }

    /// Hamiltonian generating the dynamics: Pauli SYK, or the parent
    /// Hamiltonian of the base unitary (time then runs in units of `2 pi`).
    pub fn hamiltonian(&self, k: u32, seed: RngSeed) -> Result<SubHamiltonian> {
        match self.base(k, seed)? {
            Some(u) => subsystem::parent_hamiltonian(&u),
            None => subsystem::pauli_syk(k, RngSeed::new(seed.seed, streams::COUPLINGS), None),
        }
    }
}

/// Prepared per-realization dynamics, cheap to evaluate at many times.
#[derive(Debug, Clone)]
pub enum Dynamics {
    Power(SubUnitary),
    Hamiltonian(SubHamiltonian),
}

impl Dynamics {
    pub fn new(spec: USpecConfig, k: u32, seed: RngSeed) -> Result<Self> {
        Ok(match spec.base(k, seed)? {
            Some(u) => Dynamics::Power(u),
            None => Dynamics::Hamiltonian(spec.hamiltonian(k, seed)?),
        })
    }

    pub fn at(&self, t: f64) -> Result<SubUnitary> {
        match self {
            Dynamics::Power(u) => subsystem::unitary_power(u, t),
            Dynamics::Hamiltonian(h) => Ok(subsystem::evolve(h, t)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    #[default]
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub mode: EstimatorMode,
    /// Seed blocks per sampled estimate.
    pub num_seeds: usize,
    /// Probe vectors per stochastic trace.
    pub probes: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { mode: EstimatorMode::Exact, num_seeds: 256, probes: crate::otoc::DEFAULT_PROBES }
    }
}

/// One JSON document describing a run; CLI flags override fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n: u32,
    pub k: KRule,
    /// System sizes for scaling runs.
    pub n_values: Vec<u32>,
    pub u_spec: USpecConfig,
    pub times: Vec<f64>,
    /// Realizations of `(p, f, u)`.
    pub ensemble: usize,
    pub seed: u64,
    /// `V = Z_i`, `W = Z_j`; defaults to the first and last site.
    pub sites: Option<[u32; 2]>,
    pub estimator: EstimatorConfig,
    pub betas: Vec<f64>,
    /// Copies for design checks.
    pub copies: u32,
    pub epsilon: f64,
    /// Restrict `verify` to these criterion ids.
    pub criteria: Option<Vec<u32>>,
    /// Deliberate defect for exercising `verify`.
    pub fault: Option<String>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: String::new(),
            n: 8,
            k: KRule::default(),
            n_values: vec![4, 6, 8, 11],
            u_spec: USpecConfig::default(),
            times: vec![1.0, 2.0, 3.0, 4.0],
            ensemble: 4,
            seed: 1,
            sites: None,
            estimator: EstimatorConfig::default(),
            betas: vec![0.0],
            copies: 2,
            epsilon: 0.5,
            criteria: None,
            fault: None,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn resolved_k(&self) -> u32 {
        self.k.resolve(self.n)
    }

    pub fn site_pair(&self) -> [u32; 2] {
        self.sites.unwrap_or([0, self.n.saturating_sub(1)])
    }

    pub fn rng_seed(&self, stream: u64) -> RngSeed {
        RngSeed::new(self.seed, stream)
    }

    /// Checks shared by every driver.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n == 0 || self.n > crate::bitcore::MAX_QUBITS {
            return bad(format!("n = {} outside 1..=30", self.n));
        }
        let k = self.resolved_k();
        if k == 0 || k > self.n {
            return bad(format!("k = {k} outside 1..=n"));
        }
        if k > subsystem::MAX_SUB_QUBITS {
            return bad(format!("k = {k} exceeds {}", subsystem::MAX_SUB_QUBITS));
        }
        if self.ensemble == 0 {
            return bad("ensemble must be >= 1".into());
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return bad("times must be finite".into());
        }
        if self.betas.iter().any(|b| b.is_nan() || *b < 0.0) {
            return bad("betas must be >= 0".into());
        }
        let [i, j] = self.site_pair();
        if i >= self.n || j >= self.n || i == j {
            return bad(format!("sites [{i}, {j}] must be distinct and below n"));
        }
        if self.estimator.mode == EstimatorMode::Sampled && self.estimator.num_seeds < 2 {
            return bad("estimator.num_seeds must be >= 2".into());
        }
        if matches!(self.u_spec, USpecConfig::PauliSyk) && k < 2 {
            return bad("pauli_syk needs k >= 2".into());
        }
        Ok(())
    }
}

/// A CSV table with provenance comment lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, config: &ExperimentConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# rsed {VERSION}");
        let _ = writeln!(out, "# seed {}", config.seed);
        let _ = writeln!(out, "# config {}", config.to_json());
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// Parsed numeric column (non-numeric cells become NaN).
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx].parse().unwrap_or(f64::NAN)).collect())
    }
}

pub fn fmt_f(x: f64) -> String {
    format!("{x}")
}

/// Result of one driver run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub name: String,
    pub tables: Vec<(String, Table)>,
    pub summary: serde_json::Value,
    /// Extra non-CSV artifacts `(file name, contents)`.
    pub artifacts: Vec<(String, String)>,
}

impl RunOutput {
    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|(f, _)| f == file).map(|(_, t)| t)
    }

    /// Write tables, artifacts and `<name>_summary.json` into `dir`.
    pub fn write(&self, dir: &Path, config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: &str, body: &str| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
            Ok(())
        };
        for (file, table) in &self.tables {
            put(file, &table.render(config))?;
        }
        for (file, body) in &self.artifacts {
            put(file, body)?;
        }
        let summary = serde_json::json!({
            "rsed_version": VERSION,
            "experiment": self.name,
            "seed": config.seed,
            "config": config,
            "summary": self.summary,
        });
        put(&format!("{}_summary.json", self.name), &serde_json::to_string_pretty(&summary)?)?;
        Ok(written)
    }
}
