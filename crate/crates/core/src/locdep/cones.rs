//! Coverings of `R^m` by `60°` cones at the origin, i.e. of the unit sphere
//! by caps of angular radius `30°`.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub const CAP_RADIUS_DEG: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeCover {
    pub m: usize,
    pub count: usize,
    /// Unit cone axes. Empty when the count is a user override.
    pub axes: Vec<Vec<f64>>,
    pub overridden: bool,
}

impl ConeCover {
    /// Whether the direction `u` lies in one of the cones.
    pub fn covers(&self, u: &[f64]) -> bool {
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let cos = CAP_RADIUS_DEG.to_radians().cos() - 1e-12;
        self.axes
            .iter()
            .any(|a| a.iter().zip(u).map(|(x, y)| x * y).sum::<f64>() / norm >= cos)
    }
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn sphere_sample(m: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if m == 2 {
        return (0..count)
            .map(|t| {
                let a = std::f64::consts::TAU * t as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    if m == 3 {
        // Fibonacci lattice
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        return (0..count)
            .map(|t| {
                let z = 1.0 - 2.0 * (t as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let th = golden * t as f64;
                vec![r * th.cos(), r * th.sin(), z]
            })
            .collect();
    }
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|_| unit((0..m).map(|_| StandardNormal.sample(&mut rng)).collect()))
        .collect()
}

/// Greedy set cover of a direction sample by caps centred at sample points.
/// Caps are shrunk by `margin_deg` while covering, so that full `30°` caps
/// still cover the gaps between sample points.
pub fn greedy_cap_cover(m: usize, samples: usize, margin_deg: f64, seed: u64) -> Vec<Vec<f64>> {
    let pts = sphere_sample(m, samples, seed);
    let cos = (CAP_RADIUS_DEG - margin_deg).to_radians().cos() - 1e-12;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let members: Vec<Vec<usize>> = pts
        .iter()
        .map(|p| (0..pts.len()).filter(|&q| dot(p, &pts[q]) >= cos).collect())
        .collect();
    let mut covered = vec![false; pts.len()];
    let mut left = pts.len();
    let mut axes = vec![];
    while left > 0 {
        let mut best = (0usize, 0usize);
        for (c, list) in members.iter().enumerate() {
            let gain = list.iter().filter(|&&q| !covered[q]).count();
            if gain > best.1 {
                best = (c, gain);
            }
        }
        for &q in &members[best.0] {
            if !covered[q] {
                covered[q] = true;
                left -= 1;
            }
        }
        axes.push(pts[best.0].clone());
    }
    axes
}

/// `α(m)`: 2 on the line, 6 in the plane, a greedy covering bound beyond.
/// An override must be at least `m + 1`, the minimum number of cones of
/// opening below `90°` covering `R^m`.
pub fn alpha_cones(m: usize, override_count: Option<usize>) -> Result<ConeCover> {
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    if let Some(c) = override_count {
        if c < m + 1 {
            return Err(Error::invalid(
                "alpha override",
                format!("{c} is below the lower bound {} for dimension {m}", m + 1),
            ));
        }
        return Ok(ConeCover {
            m,
            count: c,
            axes: vec![],
            overridden: true,
        });
    }
    let axes = match m {
        1 => vec![vec![1.0], vec![-1.0]],
        // six sectors of 60° tile the plane
        2 => (0..6)
            .map(|t| {
                let a = std::f64::consts::PI / 3.0 * t as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => greedy_cap_cover(3, 6000, 2.5, 0),
        _ => greedy_cap_cover(m, 4000 * m, 5.0, 0),
    };
    Ok(ConeCover {
        m,
        count: axes.len(),
        axes,
        overridden: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_and_plane() {
        assert_eq!(alpha_cones(1, None).unwrap().count, 2);
        let c = alpha_cones(2, None).unwrap();
        assert_eq!(c.count, 6);
        assert_eq!(greedy_cap_cover(2, 360, 0.0, 0).len(), 6);
        for t in 0..1000 {
            let a = 0.00123 + t as f64 * 0.006283;
            assert!(c.covers(&[a.cos(), a.sin()]));
        }
    }

    #[test]
    fn override_below_lower_bound_is_refused() {
        assert!(alpha_cones(3, Some(3)).is_err());
        assert_eq!(alpha_cones(3, Some(40)).unwrap().count, 40);
    }

    #[test]
    fn three_dimensional_cover_is_certified() {
        let c = alpha_cones(3, None).unwrap();
        assert!(c.count >= 4);
        let mut rng = rng_from_seed(99);
        for _ in 0..100_000 {
            let u: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
            assert!(c.covers(&u));
        }
    }
}
