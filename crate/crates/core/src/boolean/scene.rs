//! Binomial Boolean model scenes.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resample::CoordLaw;
use crate::rng::{rng_from_seed, Rng};

/// `n` i.i.d. germs, uniform in the centred cube `E_n` of volume `n`, each
/// carrying a ball of radius `r`. Grains are not clipped to the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GermGrainScene {
    pub d: usize,
    pub n: usize,
    pub r: f64,
    pub germs: Vec<Vec<f64>>,
    pub seed: Option<u64>,
}

pub fn check_dimension(d: usize) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

/// Half side length `n^{1/d}/2` of `E_n`.
pub fn window_half_width(d: usize, n: usize) -> f64 {
    (n as f64).powf(1.0 / d as f64) / 2.0
}

/// Uniform law on `E_n`.
#[derive(Debug, Clone, Copy)]
pub struct GermLaw {
    pub d: usize,
    pub half_width: f64,
}

impl GermLaw {
    pub fn new(d: usize, n: usize) -> Self {
        GermLaw {
            d,
            half_width: window_half_width(d, n),
        }
    }
}

impl CoordLaw<Vec<f64>> for GermLaw {
    fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        (0..self.d)
            .map(|_| rng.random_range(-self.half_width..=self.half_width))
            .collect()
    }
}

pub fn sample_scene(d: usize, n: usize, r: f64, seed: u64) -> Result<GermGrainScene> {
    check_dimension(d)?;
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("R", "must be positive"));
    }
    let law = GermLaw::new(d, n);
    let mut rng = rng_from_seed(seed);
    Ok(GermGrainScene {
        d,
        n,
        r,
        germs: law.sample_n(n, &mut rng),
        seed: Some(seed),
    })
}

impl GermGrainScene {
    /// Plain-text replay record: a header line then one germ per line, 17
    /// significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "d={} n={} R={:.17e} seed={}\n",
            self.d,
            self.n,
            self.r,
            self.seed.map_or("none".to_string(), |s| s.to_string())
        );
        for g in &self.germs {
            let row: Vec<String> = g.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::invalid("scene", "empty record"))?;
        let mut d = None;
        let mut n = None;
        let mut r = None;
        let mut seed = None;
        for field in header.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::invalid("scene", format!("bad header field {field}")))?;
            let bad = |_| Error::invalid("scene", format!("bad value for {k}"));
            match k {
                "d" => d = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "n" => n = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "R" => r = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "seed" => seed = v.parse::<u64>().ok(),
                _ => {}
            }
        }
        let (d, n, r) = match (d, n, r) {
            (Some(d), Some(n), Some(r)) => (d, n, r),
            _ => return Err(Error::invalid("scene", "header needs d, n and R")),
        };
        let germs: Vec<Vec<f64>> = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|e| Error::invalid("scene", e.to_string())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        if germs.len() != n || germs.iter().any(|g| g.len() != d) {
            return Err(Error::invalid("scene", "germ rows do not match header"));
        }
        Ok(GermGrainScene {
            d,
            n,
            r,
            germs,
            seed,
        })
    }
}
