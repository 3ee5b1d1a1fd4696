//! Binomial Boolean model: `n` germs uniform in a cube of volume `n`, each
//! carrying a ball of radius `R`, and the intrinsic volumes of the union.

pub mod covariance;
pub mod disc;
pub mod functional;
pub mod interval;
pub mod scene;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use covariance::{
    empirical_covariance, exact_mean_1d, exact_sigma_n_1d, pilot_center, CovarianceEstimate,
};
pub use disc::{intersection_volumes_2d, union_volumes_2d, DiscVolumes};
pub use functional::BooleanFunctional;
pub use interval::union_volumes;
pub use scene::{sample_scene, GermGrainScene, GermLaw};

/// `(V_0, ..., V_d)` of a union of balls, plus the geometry kernel's
/// degeneracy flag (always false for `d = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicVolumes {
    pub v: Vec<f64>,
    pub jittered: bool,
}

/// Intrinsic volumes of `∪ B(c, r)` for germs in `R^1` or `R^2`.
pub fn union_intrinsic_volumes(
    d: usize,
    germs: &[Vec<f64>],
    r: f64,
    seed: Option<u64>,
) -> Result<IntrinsicVolumes> {
    scene::check_dimension(d)?;
    for g in germs {
        if g.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: g.len(),
            });
        }
    }
    match d {
        1 => {
            let c: Vec<f64> = germs.iter().map(|g| g[0]).collect();
            Ok(IntrinsicVolumes {
                v: interval::intrinsic_volumes_1d(&c, r).to_vec(),
                jittered: false,
            })
        }
        _ => {
            let c: Vec<disc::Point> = germs.iter().map(|g| [g[0], g[1]]).collect();
            let out = disc::union_volumes_2d_seeded(&c, r, seed)?;
            Ok(IntrinsicVolumes {
                v: out.v.to_vec(),
                jittered: out.jittered,
            })
        }
    }
}

pub fn intrinsic_volumes_1d(scene: &GermGrainScene) -> Result<IntrinsicVolumes> {
    if scene.d != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: scene.d,
        });
    }
    union_intrinsic_volumes(1, &scene.germs, scene.r, scene.seed)
}

pub fn intrinsic_volumes_2d(scene: &GermGrainScene) -> Result<IntrinsicVolumes> {
    if scene.d != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: scene.d,
        });
    }
    union_intrinsic_volumes(2, &scene.germs, scene.r, scene.seed)
}

pub fn intrinsic_volumes(scene: &GermGrainScene) -> Result<IntrinsicVolumes> {
    union_intrinsic_volumes(scene.d, &scene.germs, scene.r, scene.seed)
}
