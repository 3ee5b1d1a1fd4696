//! Experiment driver: configuration, `run`, `selftest`, `describe`.

pub mod config;
pub mod experiments;
pub mod output;
pub mod selftest;

use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::Result;

pub use config::{EstimatorParams, ExperimentConfig, ExperimentKind, LawKind, ModelParams, OutputParams, OUTPUT_ENV};
pub use experiments::{run_experiment, Outcome};
pub use output::{write_artifacts, Artifacts, Table, VERSION};
pub use selftest::{selftest, selftest_with, Check, Faults, SelftestReport};

#[derive(Debug)]
pub struct RunResult {
    pub artifacts: Artifacts,
    pub summary: String,
    pub table: String,
}

/// Validates, runs and writes `<name>.csv` and `<name>.json`. Nothing is
/// written unless the experiment completes.
pub fn run(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    let out = run_experiment(cfg)?;
    let hash = cfg.hash();
    let csv = out.table.to_csv(&hash, cfg.seed)?;
    let json = json!({
        "config_hash": hash,
        "version": VERSION,
        "seed": cfg.seed,
        "config": cfg,
        "summary": out.summary,
        "result": out.json,
    });
    let artifacts = write_artifacts(&cfg.output_dir(), &cfg.output_name(), &csv, &json)?;
    Ok(RunResult { artifacts, summary: out.summary, table: out.table.render() })
}

pub fn run_file(path: &Path, out_dir: Option<PathBuf>) -> Result<RunResult> {
    let mut cfg = ExperimentConfig::from_toml(&std::fs::read_to_string(path)?)?;
    if out_dir.is_some() {
        cfg.output.dir = out_dir;
    }
    run(&cfg)
}

/// Runs the selftest and, when `out_dir` is given, writes `selftest.csv`.
pub fn selftest_to(out_dir: Option<&Path>) -> Result<(SelftestReport, Option<Artifacts>)> {
    let report = selftest();
    let arts = match out_dir {
        Some(dir) => {
            let csv = report.table().to_csv("selftest", 0)?;
            Some(write_artifacts(dir, "selftest", &csv, &report)?)
        }
        None => None,
    };
    Ok((report, arts))
}

/// Annotated example configuration covering every field.
pub fn describe() -> String {
    let mut cfg = ExperimentConfig::new(ExperimentKind::RateStudy, 1);
    cfg.model.n_grid = vec![16, 32, 64, 128, 256, 512, 1024];
    cfg.estimator.samples = 100_000;
    format!(
        "# steinlab experiment config (TOML), schema version {VERSION}\n\
         #\n\
         # kind: gamma | boolean-model | sigma-series | knn | rate-study\n\
         # seed: master seed; every random stream is derived from it\n\
         # [model]      d, n_grid (strictly increasing), r (grain radius), k (neighbour order),\n\
         #              p (moment order, >= 8), law (uniform-cube | cube-vertices | normal),\n\
         #              radii (nearest-neighbour feature radii)\n\
         # [estimator]  reps, inner_reps, pilot_reps, k_max, mc_samples, samples,\n\
         #              directions, thresholds, rect_grid, ball_radii, bump_width\n\
         # [output]     dir (else ${OUTPUT_ENV}, else ./steinlab-out), name (file stem)\n\
         #\n\
         # CSV rows start with config_hash, version, seed. The JSON artifact holds the\n\
         # config, a summary line and the full result.\n\n{}",
        cfg.to_toml()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_rate_config(dir: &Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ExperimentKind::RateStudy, 3);
        c.model.d = 2;
        c.model.n_grid = vec![4, 8, 16, 32];
        c.estimator.samples = 2000;
        c.estimator.directions = 8;
        c.estimator.thresholds = 32;
        c.output.dir = Some(dir.to_path_buf());
        c
    }

    #[test]
    fn rate_study_csv_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let c = small_rate_config(dir.path());
        let a = std::fs::read(run(&c).unwrap().artifacts.csv).unwrap();
        let b = std::fs::read(run(&c).unwrap().artifacts.csv).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.lines().skip(1).all(|l| l.starts_with(&c.hash())));
    }

    #[test]
    fn invalid_config_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small_rate_config(dir.path());
        c.kind = ExperimentKind::BooleanModel;
        c.model.r = -1.0;
        assert!(run(&c).is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn describe_output_parses() {
        let text = describe();
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(c.kind, ExperimentKind::RateStudy);
    }

    #[test]
    fn every_kind_runs_on_a_tiny_config() {
        let dir = tempfile::tempdir().unwrap();
        for kind in [ExperimentKind::Gamma, ExperimentKind::BooleanModel, ExperimentKind::SigmaSeries, ExperimentKind::Knn] {
            let mut c = ExperimentConfig::new(kind, 5);
            c.model.d = if kind == ExperimentKind::Knn { 2 } else { 1 };
            c.model.n_grid = vec![8, 16];
            c.estimator.reps = 40;
            c.estimator.inner_reps = 4;
            c.estimator.pilot_reps = 20;
            c.estimator.samples = 200;
            c.estimator.k_max = 6;
            c.estimator.mc_samples = 200;
            c.output.dir = Some(dir.path().to_path_buf());
            let r = run(&c).unwrap_or_else(|e| panic!("{kind:?}: {e}"));
            assert!(r.artifacts.csv.exists() && r.artifacts.json.exists());
        }
    }
}
