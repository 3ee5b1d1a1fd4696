//! Bound ingredients and assembled bounds.

pub mod bn;
pub mod gamma;
pub mod report;
pub mod sigma_term;

use serde::{Deserialize, Serialize};

use crate::stats::Estimate;

pub use bn::{estimate_bn_terms, exact_bn_terms, BnConfig, BnTerms};
pub use gamma::{
    estimate_gamma12, estimate_gamma34, exact_gamma12, exact_gamma34, Gamma12, Gamma34,
};
pub use report::{
    assemble_convex_bound, assemble_smooth_bound, example_clt_bounds, BoundReport, ExampleClt,
    ExampleCltBounds, Formula, SmoothBounds, SmoothnessBudget, Term, TheoremTag,
};
pub use sigma_term::{estimate_sigma_term, exact_sigma_term_sq, SigmaTerm};

/// How `Δ̃_i Δ_j f ≠ 0` is decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum ZeroTest {
    /// Bitwise zero. Correct for functionals whose local differences cancel
    /// exactly, which holds for the built-in ones.
    #[default]
    Exact,
    /// Max-norm below the tolerance.
    Tolerance(f64),
}

impl ZeroTest {
    pub fn is_zero(&self, v: &[f64]) -> bool {
        match self {
            ZeroTest::Exact => v.iter().all(|x| *x == 0.0),
            ZeroTest::Tolerance(t) => v.iter().all(|x| x.abs() <= *t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    NestedMc,
    SymmetricLemma,
}

/// All ingredients of the convex-distance bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaEstimates {
    pub gamma1: Estimate,
    pub gamma2: Estimate,
    pub gamma3: Estimate,
    pub gamma4: Estimate,
    pub sigma_term: Estimate,
    pub method: Method,
    /// Names of ingredients whose unbiased inner estimate was negative and clamped.
    pub clamped: Vec<String>,
}

impl GammaEstimates {
    pub fn combine(g12: &Gamma12, g34: &Gamma34, sigma: &SigmaTerm, method: Method) -> Self {
        let mut clamped = g34.clamped.clone();
        if sigma.clamped {
            clamped.push("sigma_term".into());
        }
        GammaEstimates {
            gamma1: g12.gamma1,
            gamma2: g12.gamma2,
            gamma3: g34.gamma3,
            gamma4: g34.gamma4,
            sigma_term: sigma.value,
            method,
            clamped,
        }
    }

    /// All-zero ingredients, for degenerate statistics.
    pub fn zero(method: Method) -> Self {
        let z = Estimate::exact(0.0);
        GammaEstimates {
            gamma1: z,
            gamma2: z,
            gamma3: z,
            gamma4: z,
            sigma_term: z,
            method,
            clamped: vec![],
        }
    }
}

/// One JSON record per estimated quantity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    pub method: Method,
    pub seed: u64,
    pub reps: usize,
}

impl GammaEstimates {
    pub fn records(&self, seed: u64) -> Vec<EstimateRecord> {
        [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("gamma4", self.gamma4),
            ("sigma_term", self.sigma_term),
        ]
        .into_iter()
        .map(|(name, e)| EstimateRecord {
            name: name.into(),
            value: e.value,
            stderr: e.stderr,
            method: self.method,
            seed,
            reps: e.reps,
        })
        .collect()
    }
}
