//! Drives the harness from code: write a config, run it, read the CSV back.
//!
//!     cargo run --release --example run_config

use steinlab::harness::{run, ExperimentConfig, ExperimentKind};

fn main() -> steinlab::Result<()> {
    let dir = std::env::temp_dir().join("steinlab-example");
    let mut cfg = ExperimentConfig::new(ExperimentKind::SigmaSeries, 42);
    cfg.model.d = 1;
    cfg.model.r = 0.5;
    cfg.estimator.k_max = 20;
    cfg.output.dir = Some(dir);
    println!("{}", cfg.to_toml());
    let r = run(&cfg)?;
    println!("{}\n{}", r.table, r.summary);
    println!("{}", std::fs::read_to_string(&r.artifacts.csv)?.lines().take(3).collect::<Vec<_>>().join("\n"));
    Ok(())
}
