//! One driver per experiment. Each is deterministic given its config.

use std::sync::Arc;

use rayon::prelude::*;
use serde_json::json;

use super::{fmt_f, Dynamics, EstimatorMode, ExperimentConfig, RunOutput, Table, USpecConfig};
use crate::bitcore::SystemShape;
use crate::circuits::{self, CircuitEvolution, USpec};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::RsedOperator;
use crate::otoc;
use crate::prs::{self, EntropyUnit, Layer, StateRef};
use crate::randomness::{streams, PermutationBackend, RngSeed, SignBackend, SignFunction, SubsetPermutation};
use crate::spectra::{self, Ensemble};
use crate::subsystem;

/// Time at which the scaling experiment evaluates the sign-averaged OTOC.
pub const SCALING_TIME: u32 = 4;

/// Largest `n` for which an embedded spectrum is listed explicitly.
const MAX_EMBEDDED_QUBITS: u32 = 20;

/// Random data of realization `r`.
#[derive(Debug, Clone)]
pub struct Realization {
    pub perm: Arc<SubsetPermutation>,
    pub sign: Arc<SignFunction>,
    pub dynamics: Dynamics,
}

impl Realization {
    pub fn new(config: &ExperimentConfig, shape: SystemShape, r: usize) -> Result<Self> {
        let r = r as u64;
        let perm = SubsetPermutation::sample(shape, config.rng_seed(streams::PERMUTATION).child(r), PermutationBackend::Auto)?;
        let sign = SignFunction::sample(shape, config.rng_seed(streams::SIGN).child(r), SignBackend::Auto)?;
        let dynamics = Dynamics::new(config.u_spec, shape.k(), config.rng_seed(streams::ENSEMBLE).child(r))?;
        Ok(Realization { perm: Arc::new(perm), sign: Arc::new(sign), dynamics })
    }

    pub fn operator(&self, t: f64) -> Result<RsedOperator> {
        RsedOperator::from_shared(self.perm.clone(), self.sign.clone(), self.dynamics.at(t)?)
    }
}

fn shape_of(config: &ExperimentConfig) -> Result<SystemShape> {
    config.validate()?;
    SystemShape::new(config.n, config.resolved_k())
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = linalg::pairwise_sum(xs) / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    (mean, (linalg::pairwise_sum(&dev) / (m - 1.0) / m).sqrt())
}

/// Least-squares slope and the differences of consecutive secant slopes.
pub fn loglog_shape(xs: &[f64], ys: &[f64]) -> (f64, Vec<f64>) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let secants: Vec<f64> = xs.windows(2).zip(ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect();
    (sxy / sxx, secants.windows(2).map(|s| s[1] - s[0]).collect())
}

/// `C_VW(t)` per realization and the ensemble mean.
pub fn run_otoc_trace(config: &ExperimentConfig) -> Result<RunOutput> {
    let shape = shape_of(config)?;
    let [i, j] = config.site_pair();
    let reals: Vec<Realization> = (0..config.ensemble).map(|r| Realization::new(config, shape, r)).collect::<Result<_>>()?;
    let per_real: Vec<Vec<(f64, f64)>> = reals
        .par_iter()
        .enumerate()
        .map(|(r, real)| {
            config
                .times
                .iter()
                .enumerate()
                .map(|(ti, &t)| {
                    let op = real.operator(t)?;
                    let est = match config.estimator.mode {
                        EstimatorMode::Exact => otoc::otoc_zz_exact(&op, i, j)?,
                        EstimatorMode::Sampled => {
                            let seed = config.rng_seed(streams::SAMPLING).child((r * config.times.len() + ti) as u64);
                            otoc::otoc_zz_sampled(&op, i, j, config.estimator.num_seeds, seed)?
                        }
                    };
                    Ok((est.poisson_bracket(), est.std_error))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut cols = vec!["t".to_string()];
    for r in 0..config.ensemble {
        cols.push(format!("c_{r}"));
        cols.push(format!("se_{r}"));
    }
    cols.push("c_mean".into());
    cols.push("se_mean".into());
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut table = Table::new(&col_refs);
    let mut means = Vec::new();
    for (ti, &t) in config.times.iter().enumerate() {
        let mut row = vec![fmt_f(t)];
        let cs: Vec<f64> = per_real.iter().map(|v| v[ti].0).collect();
        for v in &per_real {
            row.push(fmt_f(v[ti].0));
            row.push(fmt_f(v[ti].1));
        }
        let (mean, se) = mean_and_se(&cs);
        row.push(fmt_f(mean));
        row.push(fmt_f(se));
        means.push(mean);
        table.push(row);
    }
    let late: Vec<f64> = config.times.iter().zip(&means).filter(|(t, _)| **t >= 1.0).map(|(_, m)| (1.0 - m).abs()).collect();
    let max_dev = late.iter().copied().fold(0.0, f64::max);
    let bound = 2f64.powi(4 - shape.k() as i32);
    Ok(RunOutput {
        name: "otoc_trace".into(),
        tables: vec![("otoc_trace.csv".into(), table)],
        summary: json!({
            "n": shape.n(), "k": shape.k(), "sites": [i, j], "u_spec": config.u_spec.name(),
            "c_mean": means,
            "max_abs_one_minus_c_late": max_dev,
            "saturation_bound": bound,
            "saturated": !late.is_empty() && max_dev <= bound,
        }),
        artifacts: Vec::new(),
    })
}

/// Sign-averaged OTOC of one realization's `u^t` at time `t`.
fn f_average_at(spec: USpecConfig, k: u32, seed: RngSeed, t: u32) -> Result<f64> {
    match spec {
        USpecConfig::Identity => Ok(1.0),
        USpecConfig::Hadamard => otoc::otoc_zz_f_average_hadamard_power(k, &vec![0u8; 1 << k], t),
        USpecConfig::RandomSignHadamard => {
            let bits = subsystem::random_sign_bits(k, RngSeed::new(seed.seed, streams::SUB_SIGN))?;
            otoc::otoc_zz_f_average_hadamard_power(k, &bits, t)
        }
        USpecConfig::PauliSyk => Ok(otoc::otoc_zz_f_average(&Dynamics::new(spec, k, seed)?.at(t as f64)?)),
    }
}

/// `|E_f[O]|` at `t = 4` against `n` with the configured `k` rule.
pub fn run_otoc_scaling(config: &ExperimentConfig) -> Result<RunOutput> {
    if config.n_values.len() < 2 {
        return Err(Error::Config("n_values needs at least two sizes".into()));
    }
    let mut table = Table::new(&["n", "k", "log_n", "abs_o", "se", "log_abs_o"]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &n in &config.n_values {
        let k = config.k.resolve(n);
        if k == 0 || k > subsystem::MAX_SUB_QUBITS {
            return Err(Error::Config(format!("k = {k} for n = {n} outside 1..={}", subsystem::MAX_SUB_QUBITS)));
        }
        let vals: Vec<f64> = (0..config.ensemble)
            .into_par_iter()
            .map(|r| f_average_at(config.u_spec, k, config.rng_seed(streams::ENSEMBLE).child(r as u64), SCALING_TIME))
            .collect::<Result<_>>()?;
        let (mean, se) = mean_and_se(&vals);
        let (x, y) = ((n as f64).ln(), mean.abs().ln());
        xs.push(x);
        ys.push(y);
        table.push(vec![n.to_string(), k.to_string(), fmt_f(x), fmt_f(mean.abs()), fmt_f(se), fmt_f(y)]);
    }
    let (slope, second) = loglog_shape(&xs, &ys);
    let concave = !second.is_empty() && second.iter().all(|d| *d < 0.0);
    Ok(RunOutput {
        name: "otoc_scaling".into(),
        tables: vec![("otoc_scaling.csv".into(), table)],
        summary: json!({
            "t": SCALING_TIME, "u_spec": config.u_spec.name(),
            "slope": slope, "second_differences": second,
            "concave": concave, "slope_below_minus_two": slope < -2.0,
            "pass": concave && slope < -2.0,
        }),
        artifacts: Vec::new(),
    })
}

/// Sign-averaged `O(t)` next to the small-`t` prediction `1 - s t^2`.
pub fn run_otoc_average(config: &ExperimentConfig) -> Result<RunOutput> {
    let shape = shape_of(config)?;
    let k = shape.k();
    let rows: Vec<(Vec<f64>, f64)> = (0..config.ensemble)
        .into_par_iter()
        .map(|r| {
            let seed = config.rng_seed(streams::ENSEMBLE).child(r as u64);
            let dynamics = Dynamics::new(config.u_spec, k, seed)?;
            let h = match config.u_spec {
                // u^t = exp(-i (2 pi h) t) for the parent Hamiltonian h
                USpecConfig::PauliSyk => config.u_spec.hamiltonian(k, seed)?,
                _ => config.u_spec.hamiltonian(k, seed)?.scaled(2.0 * std::f64::consts::PI),
            };
            let vals = config.times.iter().map(|&t| Ok(otoc::otoc_zz_f_average(&dynamics.at(t)?))).collect::<Result<Vec<f64>>>()?;
            Ok((vals, otoc::early_time_slope(&h)))
        })
        .collect::<Result<_>>()?;
    let slopes: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (slope, _) = mean_and_se(&slopes);
    let mut table = Table::new(&["t", "f_average", "se", "c_f_average", "early_time_prediction"]);
    for (ti, &t) in config.times.iter().enumerate() {
        let vals: Vec<f64> = rows.iter().map(|r| r.0[ti]).collect();
        let (mean, se) = mean_and_se(&vals);
        table.push(vec![fmt_f(t), fmt_f(mean), fmt_f(se), fmt_f(1.0 - mean), fmt_f(slope * t * t)]);
    }
    Ok(RunOutput {
        name: "otoc_average".into(),
        tables: vec![("otoc_average.csv".into(), table)],
        summary: json!({ "k": k, "u_spec": config.u_spec.name(), "early_time_slope": slope, "flat_value": 2f64.powi(-(k as i32)) }),
        artifacts: Vec::new(),
    })
}

/// Pooled level spacings of the subsystem Hamiltonians and the
/// degeneracy of the embedded spectrum.
pub fn run_level_stats(config: &ExperimentConfig) -> Result<RunOutput> {
    let shape = shape_of(config)?;
    let k = shape.k();
    let spectra_sub: Vec<Vec<f64>> = (0..config.ensemble)
        .into_par_iter()
        .map(|r| Ok(config.u_spec.hamiltonian(k, config.rng_seed(streams::ENSEMBLE).child(r as u64))?.eigenvalues().to_vec()))
        .collect::<Result<_>>()?;
    let mut pooled = Vec::new();
    for evals in &spectra_sub {
        if let Ok(rep) = spectra::level_spacing_stats(evals, true, None) {
            pooled.extend(rep.spacings);
        }
    }
    if pooled.is_empty() {
        return Err(Error::domain("every realization is fully degenerate"));
    }
    let hist = spectra::Histogram::new(&pooled, 40, 0.0, 4.0)?;
    let mut table = Table::new(&["bin_left", "bin_right", "density", "goe", "gue"]);
    for (w, d) in hist.edges.windows(2).zip(&hist.densities) {
        let mid = 0.5 * (w[0] + w[1]);
        table.push(vec![
            fmt_f(w[0]),
            fmt_f(w[1]),
            fmt_f(*d),
            fmt_f(spectra::wigner_dyson_pdf(mid, Ensemble::Goe)?),
            fmt_f(spectra::wigner_dyson_pdf(mid, Ensemble::Gue)?),
        ]);
    }
    let ks_goe = spectra::ks_distance(&pooled, Ensemble::Goe);
    let ks_gue = spectra::ks_distance(&pooled, Ensemble::Gue);
    let (nf, kf) = (shape.full_dim() as f64, shape.sub_dim() as f64);
    let expected_zero = (nf - kf) / (nf - 1.0);
    let embedded = if shape.n() <= MAX_EMBEDDED_QUBITS {
        let full = spectra::embed_spectrum(shape, &spectra_sub[0])?;
        let rep = spectra::level_spacing_stats(&full, false, None)?;
        Some((rep.zero_gap_fraction, rep.degeneracy_multiplicity))
    } else {
        None
    };
    Ok(RunOutput {
        name: "level_stats".into(),
        tables: vec![("level_stats.csv".into(), table)],
        summary: json!({
            "n": shape.n(), "k": k, "u_spec": config.u_spec.name(),
            "spacings": pooled.len(),
            "ks_goe": ks_goe, "ks_gue": ks_gue, "ks_threshold": 0.08, "pass": ks_goe <= 0.08,
            "embedded_zero_gap_fraction": embedded.map(|e| e.0),
            "embedded_max_multiplicity": embedded.map(|e| e.1),
            "expected_zero_gap_fraction": expected_zero,
        }),
        artifacts: Vec::new(),
    })
}

/// Subsystem and embedded form factors over the `(beta, t)` grid.
pub fn run_sff(config: &ExperimentConfig) -> Result<RunOutput> {
    let shape = shape_of(config)?;
    let h = config.u_spec.hamiltonian(shape.k(), config.rng_seed(streams::ENSEMBLE).child(0))?;
    let embedded = if shape.n() <= MAX_EMBEDDED_QUBITS { Some(spectra::embed_spectrum(shape, h.eigenvalues())?) } else { None };
    let expected = (shape.num_seeds() as f64).powi(2);
    let mut table = Table::new(&["beta", "t", "r2_sub", "r2_rsed", "ratio", "r2_embedded"]);
    let mut max_rel = 0.0f64;
    let mut exact = true;
    for &beta in &config.betas {
        for &t in &config.times {
            let sub = spectra::spectral_form_factor(&h, beta, t)?;
            let full = spectra::rsed_sff(shape, &h, beta, t)?;
            let ratio = full / sub;
            exact &= ratio == expected || sub == 0.0;
            let direct = match &embedded {
                Some(e) => {
                    let d = spectra::sff_from_eigenvalues(e, beta, t)?;
                    max_rel = max_rel.max((d - full).abs() / full.abs().max(f64::MIN_POSITIVE));
                    d
                }
                None => f64::NAN,
            };
            table.push(vec![fmt_f(beta), fmt_f(t), fmt_f(sub), fmt_f(full), fmt_f(ratio), fmt_f(direct)]);
        }
    }
    Ok(RunOutput {
        name: "sff".into(),
        tables: vec![("sff.csv".into(), table)],
        summary: json!({
            "n": shape.n(), "k": shape.k(), "expected_ratio": expected,
            "ratio_exact": exact, "max_relative_deviation_embedded": max_rel,
            "pass": exact && max_rel <= 1e-8,
        }),
        artifacts: Vec::new(),
    })
}

/// Variance and element-magnitude conditions on `u^t` per realization.
pub fn run_design_check(config: &ExperimentConfig) -> Result<RunOutput> {
    let shape = shape_of(config)?;
    let k = shape.k();
    let kd = shape.sub_dim() as f64;
    let thr = kd.powf(-0.5);
    let mut table = Table::new(&["realization", "t", "y_bar", "y_threshold", "y_pass", "exceed_fraction", "element_pass"]);
    let rows: Vec<Vec<(f64, Option<f64>, prs::ElementCondition)>> = (0..config.ensemble)
        .into_par_iter()
        .map(|r| {
            let dynamics = Dynamics::new(config.u_spec, k, config.rng_seed(streams::ENSEMBLE).child(r as u64))?;
            config
                .times
                .iter()
                .map(|&t| {
                    let u = dynamics.at(t)?;
                    let y = if kd <= 64.0 { Some(prs::design_variance_condition(&u, config.copies, 0)?.value) } else { None };
                    Ok((t, y, prs::element_condition_check(&u, config.epsilon)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let (mut y_pass, mut e_pass, mut total) = (0usize, 0usize, 0usize);
    for (r, row) in rows.iter().enumerate() {
        for (t, y, e) in row {
            let yp = y.map(|v| v <= thr);
            y_pass += usize::from(yp == Some(true));
            e_pass += usize::from(e.pass);
            total += 1;
            table.push(vec![
                r.to_string(),
                fmt_f(*t),
                y.map_or("nan".into(), fmt_f),
                fmt_f(thr),
                yp.map_or("nan".into(), |b| b.to_string()),
                fmt_f(e.exceed_fraction),
                e.pass.to_string(),
            ]);
        }
    }
    Ok(RunOutput {
        name: "design_check".into(),
        tables: vec![("design_check.csv".into(), table)],
        summary: json!({
            "k": k, "copies": config.copies, "epsilon": config.epsilon, "u_spec": config.u_spec.name(),
            "variance_pass_fraction": y_pass as f64 / total as f64,
            "element_pass_fraction": e_pass as f64 / total as f64,
            "variance_enumerated": kd <= 64.0,
        }),
        artifacts: Vec::new(),
    })
}

/// Coherence of subset-phase states before and after a full Hadamard layer.
pub fn run_coherence(config: &ExperimentConfig) -> Result<RunOutput> {
    let shape = shape_of(config)?;
    if shape.n() > MAX_EMBEDDED_QUBITS {
        return Err(Error::Config(format!("coherence runs are limited to n <= {MAX_EMBEDDED_QUBITS}")));
    }
    let ln2 = std::f64::consts::LN_2;
    let expected = shape.k() as f64 * ln2;
    let floor = shape.n() as f64 / 4.0 * ln2;
    let layer = Layer::HadamardLayer((0..shape.n()).collect());
    let rows: Vec<(f64, f64)> = (0..config.ensemble)
        .into_par_iter()
        .map(|r| {
            let real = Realization::new(config, shape, r)?;
            let psi = prs::subset_phase_state(&real.perm, &real.sign, 0, shape)?;
            let before = prs::coherence_rel_entropy(StateRef::Pure(&psi), EntropyUnit::Nats)?;
            let after = prs::append_layer(&psi, &layer)?;
            Ok((before, prs::coherence_rel_entropy(StateRef::Pure(&after), EntropyUnit::Nats)?))
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["realization", "coherence", "expected", "after_hadamard", "floor"]);
    let mut max_err = 0.0f64;
    let mut above = 0usize;
    for (r, (b, a)) in rows.iter().enumerate() {
        max_err = max_err.max((b - expected).abs());
        above += usize::from(*a >= floor);
        table.push(vec![r.to_string(), fmt_f(*b), fmt_f(expected), fmt_f(*a), fmt_f(floor)]);
    }
    let frac = above as f64 / rows.len() as f64;
    Ok(RunOutput {
        name: "coherence".into(),
        tables: vec![("coherence.csv".into(), table)],
        summary: json!({
            "n": shape.n(), "k": shape.k(), "unit": "nats",
            "max_abs_error": max_err, "fraction_above_floor": frac,
            "pass": max_err <= 1e-9 && frac >= 0.95,
        }),
        artifacts: Vec::new(),
    })
}

fn circuit_u_spec(config: &ExperimentConfig, k: u32) -> Result<USpec> {
    let t = config.times.first().copied().unwrap_or(1.0);
    let seed = config.rng_seed(streams::ENSEMBLE).child(0);
    Ok(match config.u_spec {
        USpecConfig::Identity => USpec::Identity,
        USpecConfig::Hadamard if t == 1.0 => USpec::Hadamard,
        USpecConfig::RandomSignHadamard if t == 1.0 => USpec::RandomSignHadamard { seed: seed.seed },
        spec => USpec::Explicit(Dynamics::new(spec, k, seed)?.at(t)?),
    })
}

/// Gate-level circuit, manifest and a dense equivalence check when small.
pub fn run_circuit_emit(config: &ExperimentConfig) -> Result<RunOutput> {
    let shape = shape_of(config)?;
    let u_spec = circuit_u_spec(config, shape.k())?;
    let synth = circuits::synthesize_rsed_circuit(shape, u_spec, config.seed, config.seed)?;
    let mut artifacts = vec![
        ("circuit.txt".to_string(), circuits::serialize(&synth.circuit)),
        ("manifest.json".to_string(), synth.manifest.to_json()?),
    ];
    if synth.operator()?.perm().feistel().is_some() {
        artifacts.push(("circuit_feistel.txt".to_string(), circuits::serialize(&synth.expand_feistel()?)));
    }
    let deviation = if shape.n() <= crate::operator::MAX_DENSE_QUBITS {
        let ev = CircuitEvolution::new(&synth.circuit, &synth.registry)?;
        let dense = crate::operator::Evolution::dense(&ev)?;
        Some(linalg::max_abs_diff(&dense, &synth.operator()?.dense_matrix()?))
    } else {
        None
    };
    let mut table = Table::new(&["gate", "count"]);
    for (g, n) in &synth.manifest.gate_counts {
        table.push(vec![g.clone(), n.to_string()]);
    }
    Ok(RunOutput {
        name: "circuit_emit".into(),
        tables: vec![("gate_counts.csv".into(), table)],
        summary: json!({
            "n": shape.n(), "k": shape.k(), "gates": synth.circuit.len(),
            "dense_max_deviation": deviation,
            "pass": deviation.is_none_or(|d| d <= 1e-12),
        }),
        artifacts,
    })
}

/// Dispatch by experiment name.
pub fn run_named(name: &str, config: &ExperimentConfig) -> Result<RunOutput> {
    match name {
        "otoc-trace" | "otoc_trace" => run_otoc_trace(config),
        "otoc-scaling" | "otoc_scaling" => run_otoc_scaling(config),
        "otoc-average" | "otoc_average" => run_otoc_average(config),
        "level-stats" | "level_stats" => run_level_stats(config),
        "sff" => run_sff(config),
        "design-check" | "design_check" => run_design_check(config),
        "coherence" => run_coherence(config),
        "circuit-emit" | "circuit_emit" => run_circuit_emit(config),
        other => Err(Error::Config(format!("unknown experiment '{other}'"))),
    }
}
