//! Experiment configuration, validation and hashing.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Gamma,
    BooleanModel,
    SigmaSeries,
    Knn,
    RateStudy,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Gamma => "gamma",
            ExperimentKind::BooleanModel => "boolean-model",
            ExperimentKind::SigmaSeries => "sigma-series",
            ExperimentKind::Knn => "knn",
            ExperimentKind::RateStudy => "rate-study",
        }
    }
}

/// Coordinate law for the standardized-sum experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    #[default]
    UniformCube,
    CubeVertices,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub d: usize,
    pub n_grid: Vec<usize>,
    /// Grain radius.
    pub r: f64,
    /// Neighbour order.
    pub k: usize,
    /// Moment order of the nearest-neighbour bounds.
    pub p: f64,
    pub law: LawKind,
    /// Ball radii of the nearest-neighbour features.
    pub radii: Vec<f64>,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            d: 2,
            n_grid: vec![16, 32, 64, 128],
            r: 0.3,
            k: 2,
            p: 12.0,
            law: LawKind::UniformCube,
            radii: vec![0.6, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorParams {
    pub reps: usize,
    pub inner_reps: usize,
    pub pilot_reps: usize,
    /// Highest series term for sigma-series.
    pub k_max: usize,
    pub mc_samples: usize,
    /// Draws of `W` per `n` in a rate study.
    pub samples: usize,
    pub directions: usize,
    pub thresholds: usize,
    pub rect_grid: usize,
    pub ball_radii: usize,
    /// Width of the bump test function used for smooth discrepancies.
    pub bump_width: f64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            reps: 2000,
            inner_reps: 16,
            pilot_reps: 2000,
            k_max: 30,
            mc_samples: 20_000,
            samples: 20_000,
            directions: 64,
            thresholds: 256,
            rect_grid: 16,
            ball_radii: 0,
            bump_width: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputParams {
    /// Falls back to `$STEINLAB_OUT`, then `steinlab-out`.
    pub dir: Option<PathBuf>,
    /// File stem; defaults to the experiment kind.
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default)]
    pub estimator: EstimatorParams,
    #[serde(default)]
    pub output: OutputParams,
}

pub const OUTPUT_ENV: &str = "STEINLAB_OUT";

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, seed: u64) -> Self {
        ExperimentConfig {
            kind,
            seed,
            model: ModelParams::default(),
            estimator: EstimatorParams::default(),
            output: OutputParams::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON form. The output
    /// section is excluded so moving the output directory keeps the hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputParams::default();
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("steinlab-out"))
    }

    pub fn output_name(&self) -> String {
        self.output.name.clone().unwrap_or_else(|| self.kind.as_str().to_string())
    }

    /// Collects every violated constraint before failing.
    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        let e = &self.estimator;
        let mut bad = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                bad.push(msg);
            }
        };
        let uses_grid = !matches!(self.kind, ExperimentKind::SigmaSeries);
        if uses_grid {
            need(!m.n_grid.is_empty(), "model.n_grid: must be nonempty".into());
            need(
                m.n_grid.windows(2).all(|w| w[0] < w[1]),
                format!("model.n_grid: must be strictly increasing, got {:?}", m.n_grid),
            );
            need(m.n_grid.first().is_none_or(|&n| n >= 1), "model.n_grid: entries must be >= 1".into());
        }
        need(m.d >= 1, format!("model.d: must be >= 1, got {}", m.d));
        match self.kind {
            ExperimentKind::BooleanModel | ExperimentKind::SigmaSeries => {
                need(m.r > 0.0 && m.r.is_finite(), format!("model.r: must be positive and finite, got {}", m.r));
                if self.kind == ExperimentKind::BooleanModel {
                    need(m.d <= 2, format!("model.d: boolean-model supports d = 1 or 2, got {}", m.d));
                    need(e.reps >= 2, format!("estimator.reps: need >= 2, got {}", e.reps));
                    need(e.pilot_reps >= 2, format!("estimator.pilot_reps: need >= 2, got {}", e.pilot_reps));
                } else {
                    need(m.d <= 2, format!("model.d: sigma-series supports d = 1 or 2, got {}", m.d));
                    need(e.k_max >= 1, format!("estimator.k_max: need >= 1, got {}", e.k_max));
                    need(m.d == 1 || e.mc_samples >= 2, format!("estimator.mc_samples: need >= 2, got {}", e.mc_samples));
                }
            }
            ExperimentKind::Knn => {
                need(m.k >= 1, format!("model.k: need >= 1, got {}", m.k));
                need(
                    m.n_grid.first().is_none_or(|&n| n > m.k),
                    format!("model.n_grid: every n must exceed k = {}", m.k),
                );
                need(m.p >= 8.0, format!("model.p: the nearest-neighbour bounds need p >= 8, got {}", m.p));
                need(!m.radii.is_empty(), "model.radii: need at least one".into());
                need(
                    m.radii.iter().all(|r| *r > 0.0 && r.is_finite()),
                    format!("model.radii: must be positive, got {:?}", m.radii),
                );
                need(e.reps >= 2, format!("estimator.reps: need >= 2, got {}", e.reps));
                need(e.pilot_reps >= 2, format!("estimator.pilot_reps: need >= 2, got {}", e.pilot_reps));
            }
            ExperimentKind::Gamma => {
                need(e.reps >= 2, format!("estimator.reps: need >= 2, got {}", e.reps));
                need(e.inner_reps >= 2, format!("estimator.inner_reps: need >= 2, got {}", e.inner_reps));
                need(e.samples >= 2, format!("estimator.samples: need >= 2, got {}", e.samples));
                need(e.bump_width > 0.0, format!("estimator.bump_width: must be positive, got {}", e.bump_width));
            }
            ExperimentKind::RateStudy => {
                need(e.samples >= 1, format!("estimator.samples: need >= 1, got {}", e.samples));
                need(m.n_grid.len() >= 4, format!("model.n_grid: a rate fit needs >= 4 points, got {}", m.n_grid.len()));
                let class = e.directions * e.thresholds + if m.d <= 3 { e.rect_grid } else { 0 } + e.ball_radii;
                need(class > 0, "estimator: the test class is empty (directions, thresholds, rect_grid, ball_radii)".into());
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(bad))
        }
    }
}
