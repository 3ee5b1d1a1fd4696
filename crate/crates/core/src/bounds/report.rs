//! Assembled bounds with an auditable breakdown.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::GammaEstimates;
use crate::error::{Error, Result};
use crate::linalg::{matrix_norms, MatrixNorms};

/// Sup-norms of the derivatives of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessBudget {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    /// Sup of the Hilbert-Schmidt norm of the Hessian.
    pub m2_tilde: f64,
}

impl SmoothnessBudget {
    /// Checks nonnegativity and `M̃₂ ≤ √d M₂`.
    pub fn validate(&self, d: usize) -> Result<()> {
        for (name, v) in [("m1", self.m1), ("m2", self.m2), ("m3", self.m3), ("m2_tilde", self.m2_tilde)] {
            if !(v >= 0.0) {
                return Err(Error::invalid(name, "must be nonnegative"));
            }
        }
        if self.m2_tilde > (d as f64).sqrt() * self.m2 * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::invalid("m2_tilde", "exceeds sqrt(d) * m2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremTag {
    SmoothNonneg,
    SmoothPosdef,
    Convex,
    ExampleClt,
    SymmetricLemma,
    LocalSmooth,
    LocalConvex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    pub coefficient: f64,
    pub value: f64,
}

impl Term {
    pub fn new(label: impl Into<String>, coefficient: f64, value: f64) -> Self {
        Term {
            label: label.into(),
            coefficient,
            value,
        }
    }

    fn product(&self) -> f64 {
        self.coefficient * self.value
    }
}

/// How `bound_value` is recomputed from its parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    /// `Σ coefficient · value`.
    Sum(Vec<Term>),
    /// `Π factors · max(candidates)`, each entry being `coefficient · value`.
    PrefactorMax {
        factors: Vec<Term>,
        candidates: Vec<Term>,
    },
}

impl Formula {
    pub fn evaluate(&self) -> f64 {
        match self {
            Formula::Sum(terms) => terms.iter().map(Term::product).sum(),
            Formula::PrefactorMax {
                factors,
                candidates,
            } => {
                let pre: f64 = factors.iter().map(Term::product).product();
                pre * candidates
                    .iter()
                    .map(Term::product)
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Label of the largest candidate (first wins on ties).
    pub fn argmax(&self) -> Option<String> {
        match self {
            Formula::Sum(_) => None,
            Formula::PrefactorMax { candidates, .. } => {
                let mut best: Option<&Term> = None;
                for c in candidates {
                    if best.is_none_or(|b| c.product() > b.product()) {
                        best = Some(c);
                    }
                }
                best.map(|t| t.label.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_value: f64,
    pub theorem: TheoremTag,
    pub formula: Formula,
    pub argmax: Option<String>,
    /// Named inputs (norms, constants, raw ingredients) for provenance.
    pub ingredients: BTreeMap<String, f64>,
    pub sigma: Option<Vec<Vec<f64>>>,
    pub sigma_inv_opnorm: Option<f64>,
}

impl BoundReport {
    pub fn from_formula(theorem: TheoremTag, formula: Formula) -> Self {
        BoundReport {
            bound_value: formula.evaluate(),
            argmax: formula.argmax(),
            theorem,
            formula,
            ingredients: BTreeMap::new(),
            sigma: None,
            sigma_inv_opnorm: None,
        }
    }

    fn with_sigma(mut self, sigma: &DMatrix<f64>, norms: &MatrixNorms) -> Self {
        self.sigma = Some(
            (0..sigma.nrows())
                .map(|r| sigma.row(r).iter().copied().collect())
                .collect(),
        );
        self.sigma_inv_opnorm = norms.inv_op;
        self.ingredients.insert("sigma_min_eig".into(), norms.min_eig);
        self
    }

    pub fn ingredient(mut self, name: &str, value: f64) -> Self {
        self.ingredients.insert(name.into(), value);
        self
    }

    /// Re-derives the value from the breakdown; relative agreement to 1e-10.
    pub fn audit(&self) -> bool {
        let v = self.formula.evaluate();
        (v - self.bound_value).abs() <= 1e-10 * self.bound_value.abs().max(1.0)
    }
}

fn require_posdef(sigma: &DMatrix<f64>) -> Result<MatrixNorms> {
    let norms = matrix_norms(sigma)?;
    if !norms.posdef {
        return Err(Error::NotPositiveDefinite {
            min_eig: norms.min_eig,
        });
    }
    Ok(norms)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothBounds {
    /// `M̃₂/2 · σ-term + M₃/12 · γ₁`.
    pub nonneg: BoundReport,
    /// `√2/√π M₁ ‖Σ⁻¹‖ σ-term + √(2π)/16 M₂ ‖Σ⁻¹‖ γ₁`, when requested.
    pub posdef: Option<BoundReport>,
}

/// The smooth-test-function bounds. `sigma_term` enters in place of
/// `E‖E[T|X] − Σ‖_HS`, which it dominates.
pub fn assemble_smooth_bound(
    gamma: &GammaEstimates,
    budget: &SmoothnessBudget,
    sigma: &DMatrix<f64>,
    posdef: bool,
) -> Result<SmoothBounds> {
    budget.validate(sigma.nrows())?;
    let norms = matrix_norms(sigma)?;
    let st = gamma.sigma_term.value;
    let g1 = gamma.gamma1.value;
    let nonneg = BoundReport::from_formula(
        TheoremTag::SmoothNonneg,
        Formula::Sum(vec![
            Term::new("m2_tilde/2 * sigma_term", budget.m2_tilde / 2.0, st),
            Term::new("m3/12 * gamma1", budget.m3 / 12.0, g1),
        ]),
    )
    .with_sigma(sigma, &norms)
    .ingredient("sigma_term", st)
    .ingredient("gamma1", g1);
    let posdef = if posdef {
        let norms = require_posdef(sigma)?;
        let inv = norms.inv_op.unwrap_or(f64::INFINITY);
        Some(
            BoundReport::from_formula(
                TheoremTag::SmoothPosdef,
                Formula::Sum(vec![
                    Term::new(
                        "sqrt(2/pi) m1 |Sigma^-1| * sigma_term",
                        (2.0 / PI).sqrt() * budget.m1 * inv,
                        st,
                    ),
                    Term::new(
                        "sqrt(2 pi)/16 m2 |Sigma^-1| * gamma1",
                        (2.0 * PI).sqrt() / 16.0 * budget.m2 * inv,
                        g1,
                    ),
                ]),
            )
            .with_sigma(sigma, &norms)
            .ingredient("sigma_term", st)
            .ingredient("gamma1", g1),
        )
    } else {
        None
    };
    Ok(SmoothBounds { nonneg, posdef })
}

pub const CONVEX_CONSTANT: f64 = 541.0;

fn convex_prefactor(d: usize, inv_op: f64, constant: f64) -> Vec<Term> {
    vec![
        Term::new("constant", 1.0, constant),
        Term::new("d^4", 1.0, (d as f64).powi(4)),
        Term::new("max(1, |Sigma^-1|^2)", 1.0, (inv_op * inv_op).max(1.0)),
    ]
}

/// `541 d⁴ max{1, ‖Σ⁻¹‖²} max{σ-term, γ₁, γ₂, γ₃, γ₄}`.
pub fn assemble_convex_bound(gamma: &GammaEstimates, sigma: &DMatrix<f64>) -> Result<BoundReport> {
    let norms = require_posdef(sigma)?;
    let inv = norms.inv_op.unwrap_or(f64::INFINITY);
    let formula = Formula::PrefactorMax {
        factors: convex_prefactor(sigma.nrows(), inv, CONVEX_CONSTANT),
        candidates: vec![
            Term::new("sigma_term", 1.0, gamma.sigma_term.value),
            Term::new("gamma1", 1.0, gamma.gamma1.value),
            Term::new("gamma2", 1.0, gamma.gamma2.value),
            Term::new("gamma3", 1.0, gamma.gamma3.value),
            Term::new("gamma4", 1.0, gamma.gamma4.value),
        ],
    };
    Ok(BoundReport::from_formula(TheoremTag::Convex, formula).with_sigma(sigma, &norms))
}

/// Moments `E‖X₁‖^p` of the summands of a standardized sum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExampleClt {
    pub m3: f64,
    pub m4: f64,
    pub m5: f64,
    pub m6: f64,
}

impl ExampleClt {
    pub fn gamma1_bound(&self, n: usize) -> f64 {
        8.0 * self.m3 / (n as f64).sqrt()
    }

    pub fn gamma2_bound(&self, n: usize) -> f64 {
        4.0 * self.m4.sqrt() / (n as f64).sqrt()
    }

    /// Bound on `γ_{p+2}` for `p ∈ {1, 2}`.
    pub fn gamma_p2_bound(&self, p: u32, n: usize) -> f64 {
        let q = p as f64 + 2.0;
        let m = if p == 1 { self.m5 } else { self.m6 };
        2f64.powf(1.0 + 1.0 / q)
            * (30.0 + 27.0 / p as f64).powf(1.0 / q)
            * m.powf(1.0 / q)
            / (n as f64).sqrt()
    }

    pub fn sigma_term_bound(&self, n: usize) -> f64 {
        16.0 * self.m4.sqrt() / (n as f64).sqrt()
    }

    /// Ingredients obtained by inserting the closed-form bounds.
    pub fn gamma_bounds(&self, n: usize) -> GammaEstimates {
        use crate::stats::Estimate;
        let mut g = GammaEstimates::zero(super::Method::SymmetricLemma);
        g.gamma1 = Estimate::exact(self.gamma1_bound(n));
        g.gamma2 = Estimate::exact(self.gamma2_bound(n));
        g.gamma3 = Estimate::exact(self.gamma_p2_bound(1, n));
        g.gamma4 = Estimate::exact(self.gamma_p2_bound(2, n));
        g.sigma_term = Estimate::exact(self.sigma_term_bound(n));
        g
    }
}

/// The three closed-form bounds for a standardized i.i.d. sum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleCltBounds {
    pub smooth_c3: BoundReport,
    pub smooth_c2: Option<BoundReport>,
    pub convex: Option<BoundReport>,
}

pub fn example_clt_bounds(
    moments: &ExampleClt,
    budget: &SmoothnessBudget,
    sigma: &DMatrix<f64>,
    n: usize,
) -> Result<ExampleCltBounds> {
    let rn = 1.0 / (n as f64).sqrt();
    let norms = matrix_norms(sigma)?;
    let smooth_c3 = BoundReport::from_formula(
        TheoremTag::ExampleClt,
        Formula::Sum(vec![
            Term::new("8 m2_tilde sqrt(E|X|^4) n^-1/2", 8.0 * budget.m2_tilde * rn, moments.m4.sqrt()),
            Term::new("3/4 m3 E|X|^3 n^-1/2", 0.75 * budget.m3 * rn, moments.m3),
        ]),
    )
    .with_sigma(sigma, &norms);
    let (smooth_c2, convex) = match norms.inv_op {
        Some(inv) => {
            let c2 = BoundReport::from_formula(
                TheoremTag::ExampleClt,
                Formula::Sum(vec![
                    Term::new(
                        "16 sqrt(2/pi) m1 |Sigma^-1| sqrt(E|X|^4) n^-1/2",
                        16.0 * (2.0 / PI).sqrt() * budget.m1 * inv * rn,
                        moments.m4.sqrt(),
                    ),
                    Term::new(
                        "sqrt(2 pi)/2 m2 |Sigma^-1| E|X|^3 n^-1/2",
                        (2.0 * PI).sqrt() / 2.0 * budget.m2 * inv * rn,
                        moments.m3,
                    ),
                ]),
            )
            .with_sigma(sigma, &norms);
            let mut factors = convex_prefactor(sigma.nrows(), inv, 8656.0);
            factors.push(Term::new("n^-1/2", 1.0, rn));
            let cx = BoundReport::from_formula(
                TheoremTag::ExampleClt,
                Formula::PrefactorMax {
                    factors,
                    candidates: vec![
                        Term::new("sqrt(E|X|^4)", 1.0, moments.m4.sqrt()),
                        Term::new("E|X|^3", 1.0, moments.m3),
                        Term::new("(E|X|^5)^(1/3)", 1.0, moments.m5.cbrt()),
                        Term::new("(E|X|^6)^(1/4)", 1.0, moments.m6.powf(0.25)),
                    ],
                },
            )
            .with_sigma(sigma, &norms);
            (Some(c2), Some(cx))
        }
        None => (None, None),
    };
    Ok(ExampleCltBounds {
        smooth_c3,
        smooth_c2,
        convex,
    })
}
