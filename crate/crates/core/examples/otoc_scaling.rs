//! Sign-averaged OTOC at t = 4 with k = ceil((log2 n)^2).
use rsed::experiments::{run_otoc_scaling, ExperimentConfig, KRule, KRuleName};

fn main() -> rsed::Result<()> {
    let cfg = ExperimentConfig { k: KRule::Rule(KRuleName::Log2sq), ensemble: 8, ..Default::default() };
    let out = run_otoc_scaling(&cfg)?;
    let table = out.table("otoc_scaling.csv").expect("scaling table");
    println!("{}", table.columns.join("\t"));
    for row in &table.rows {
        println!("{}", row.join("\t"));
    }
    println!("{}", serde_json::to_string_pretty(&out.summary)?);
    Ok(())
}
