use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rsed::experiments::{self, verify, ExperimentConfig, KRule, KRuleName};

#[derive(Parser, Debug)]
#[command(name = "rsed", version, about = "Random subsystem-embedded dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// C_VW(t) per realization and ensemble mean.
    OtocTrace(Common),
    /// Sign-averaged OTOC at t = 4 against n.
    OtocScaling(Common),
    /// Sign-averaged OTOC over the time grid with the early-time prediction.
    OtocAverage(Common),
    /// Level-spacing histogram and KS distances.
    LevelStats(Common),
    /// Spectral form factors of the subsystem and the embedding.
    Sff(Common),
    /// Design-variance and element-magnitude conditions.
    DesignCheck(Common),
    /// Coherence of subset-phase states.
    Coherence(Common),
    /// Gate-level circuit plus manifest.
    CircuitEmit(Common),
    /// Run the acceptance checks; exits 1 if any fails.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    n: Option<u32>,
    /// Subsystem qubits or `log2sq`.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    ensemble: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated criterion ids.
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<u32>>,
    /// Inject a known defect, e.g. `closed_form_sign`.
    #[arg(long)]
    fault: Option<String>,
}

fn parse_k(s: &str) -> Result<KRule, String> {
    match s {
        "log2sq" => Ok(KRule::Rule(KRuleName::Log2sq)),
        _ => s.parse().map(KRule::Fixed).map_err(|_| format!("invalid k '{s}'")),
    }
}

fn load(name: &str, c: &Common) -> Result<ExperimentConfig, String> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p).map_err(|e| e.to_string())?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = name.to_string();
    if name == "otoc-scaling" && c.config.is_none() {
        cfg.k = KRule::Rule(KRuleName::Log2sq);
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.clone());
    }
    if let Some(n) = c.n {
        cfg.n = n;
    }
    if let Some(k) = &c.k {
        cfg.k = parse_k(k)?;
    }
    if let Some(e) = c.ensemble {
        cfg.ensemble = e;
    }
    Ok(cfg)
}

fn init_threads(threads: Option<usize>) -> Result<(), String> {
    match threads {
        Some(0) => Err("--threads must be >= 1".into()),
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| e.to_string()),
        None => Ok(()),
    }
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("rsed-out"))
}

fn run_experiment(name: &str, common: &Common) -> ExitCode {
    let cfg = match load(name, common).and_then(|c| init_threads(common.threads).map(|_| c)) {
        Ok(c) => c,
        Err(e) => return usage(&e),
    };
    let out = match experiments::run_named(name, &cfg) {
        Ok(o) => o,
        Err(e) => return usage(&e.to_string()),
    };
    match out.write(&out_dir(&cfg), &cfg) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => usage(&e.to_string()),
    }
}

fn run_verify(args: &VerifyArgs) -> ExitCode {
    let mut cfg = match load("verify", &args.common).and_then(|c| init_threads(args.common.threads).map(|_| c)) {
        Ok(c) => c,
        Err(e) => return usage(&e),
    };
    if args.criteria.is_some() {
        cfg.criteria = args.criteria.clone();
    }
    if args.fault.is_some() {
        cfg.fault = args.fault.clone();
    }
    let report = match verify::run_verify(&cfg) {
        Ok(r) => r,
        Err(e) => return usage(&e.to_string()),
    };
    for c in &report.criteria {
        println!(
            "{} {:>2} {:<32} measured {:.6e} {} {:.6e}  {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.measured,
            c.relation,
            c.threshold,
            c.detail
        );
    }
    let dir = out_dir(&cfg);
    let path = dir.join("verify_report.json");
    if let Err(e) = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(&path, report.to_json())) {
        return usage(&format!("{}: {e}", path.display()));
    }
    println!("{}", path.display());
    if report.pass {
        ExitCode::SUCCESS
    } else {
        let ids: Vec<String> = report.failed().iter().map(|c| c.id.to_string()).collect();
        eprintln!("failed criteria: {}", ids.join(", "));
        ExitCode::from(1)
    }
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::OtocTrace(c) => run_experiment("otoc-trace", c),
        Command::OtocScaling(c) => run_experiment("otoc-scaling", c),
        Command::OtocAverage(c) => run_experiment("otoc-average", c),
        Command::LevelStats(c) => run_experiment("level-stats", c),
        Command::Sff(c) => run_experiment("sff", c),
        Command::DesignCheck(c) => run_experiment("design-check", c),
        Command::Coherence(c) => run_experiment("coherence", c),
        Command::CircuitEmit(c) => run_experiment("circuit-emit", c),
        Command::Verify(v) => run_verify(v),
    }
}
