//! `B_n`, `B_n'` and the symmetric-statistic bound on the conditional-covariance term.
//!
//! Both quantities are suprema over recombinations of `{X, X', X̃}` of
//! expectations that depend only on the sources chosen for a few leading
//! slots and, by exchangeability, on how the remaining slots are filled.
//! Candidates fix the leading slots individually and fill all remaining
//! slots from one source per vector. Choices that make the integrand vanish
//! identically (taking `X'` in a slot that is then resampled) are pruned.
//!
//! `B_n` ranges over every candidate of that family. `B_n'` has millions of
//! candidates, so a seeded random subset is searched. The maximizing candidate
//! is selected on pilot replicates and its value is estimated on independent
//! replicates, which keeps the reported value free of selection bias.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ZeroTest;
use crate::error::{Error, Result};
use crate::functionals::{check_finite, sub, Functional};
use crate::linalg::vec_norm;
use crate::resample::enumerate::{batch_from, for_each_config, EnumCaps};
use crate::resample::{CoordLaw, FiniteLaw, SampleBatch};
use crate::rng::{derive_seed, par_replicates, rng_for, rng_from_seed, stream};
use crate::stats::Estimate;

/// Source of a recombination slot.
pub const SRC_X: u8 = 0;
pub const SRC_PRIME: u8 = 1;
pub const SRC_TILDE: u8 = 2;

const ALL: [u8; 3] = [SRC_X, SRC_PRIME, SRC_TILDE];
const NOT_PRIME: [u8; 2] = [SRC_X, SRC_TILDE];

/// A recombination: explicit sources for the leading slots, one source for the rest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recombination {
    pub lead: Vec<u8>,
    pub bulk: u8,
}

impl Recombination {
    pub fn build<T: Clone>(&self, batch: &SampleBatch<T>) -> Vec<T> {
        (0..batch.n())
            .map(|i| {
                let src = self.lead.get(i).copied().unwrap_or(self.bulk);
                match src {
                    SRC_X => batch.x[i].clone(),
                    SRC_PRIME => batch.x_prime[i].clone(),
                    _ => batch.x_tilde[i].clone(),
                }
            })
            .collect()
    }

    pub fn label(&self) -> String {
        let c = |s: u8| match s {
            SRC_X => 'X',
            SRC_PRIME => 'P',
            _ => 'T',
        };
        let mut out: String = self.lead.iter().map(|s| c(*s)).collect();
        out.push('|');
        out.push(c(self.bulk));
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    /// `1[Δ_{a,b} f(Y) ≠ 0]`.
    Indicator(usize, usize),
    /// `‖Δ_a f(Z)‖²`.
    Square(usize),
}

#[derive(Debug, Clone)]
struct Role {
    kind: Kind,
    options: Vec<Recombination>,
}

#[derive(Debug, Clone)]
struct Family {
    roles: Vec<Role>,
    candidates: Vec<Vec<usize>>,
}

impl Family {
    fn label(&self, cand: &[usize]) -> String {
        cand.iter()
            .zip(&self.roles)
            .map(|(&o, r)| r.options[o].label())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn role_options(allowed: &[&[u8]], n: usize) -> Vec<Recombination> {
    let bulks: &[u8] = if n > allowed.len() { &ALL } else { &[SRC_X] };
    let mut out = vec![Recombination {
        lead: vec![],
        bulk: SRC_X,
    }];
    for slot in allowed {
        out = out
            .into_iter()
            .flat_map(|r| {
                slot.iter().map(move |s| {
                    let mut lead = r.lead.clone();
                    lead.push(*s);
                    Recombination { lead, bulk: SRC_X }
                })
            })
            .collect();
    }
    out.into_iter()
        .flat_map(|r| {
            bulks.iter().map(move |b| Recombination {
                lead: r.lead.clone(),
                bulk: *b,
            })
        })
        .collect()
}

fn cartesian(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &s in sizes {
        out = out
            .into_iter()
            .flat_map(|c: Vec<usize>| {
                (0..s).map(move |k| {
                    let mut c = c.clone();
                    c.push(k);
                    c
                })
            })
            .collect();
    }
    out
}

fn bn_family(n: usize) -> Family {
    let roles = vec![
        Role {
            kind: Kind::Indicator(0, 1),
            options: role_options(&[&NOT_PRIME, &NOT_PRIME], n),
        },
        Role {
            kind: Kind::Square(0),
            options: role_options(&[&NOT_PRIME, &ALL], n),
        },
        Role {
            kind: Kind::Square(1),
            options: role_options(&[&ALL, &NOT_PRIME], n),
        },
    ];
    let sizes: Vec<usize> = roles.iter().map(|r| r.options.len()).collect();
    Family {
        candidates: cartesian(&sizes),
        roles,
    }
}

fn bn_prime_family(n: usize, max_candidates: usize, seed: u64) -> Family {
    let roles = vec![
        Role {
            kind: Kind::Indicator(0, 1),
            options: role_options(&[&NOT_PRIME, &NOT_PRIME, &ALL], n),
        },
        Role {
            kind: Kind::Indicator(0, 2),
            options: role_options(&[&NOT_PRIME, &ALL, &NOT_PRIME], n),
        },
        Role {
            kind: Kind::Square(1),
            options: role_options(&[&ALL, &NOT_PRIME, &ALL], n),
        },
        Role {
            kind: Kind::Square(2),
            options: role_options(&[&ALL, &ALL, &NOT_PRIME], n),
        },
    ];
    let sizes: Vec<usize> = roles.iter().map(|r| r.options.len()).collect();
    let total: usize = sizes.iter().product();
    let candidates = if total <= max_candidates {
        cartesian(&sizes)
    } else {
        let mut rng = rng_from_seed(derive_seed(seed, stream::BN_PILOT, u64::MAX));
        let mut picks = sample(&mut rng, total, max_candidates.max(1)).into_vec();
        if !picks.contains(&0) {
            picks[0] = 0;
        }
        picks.sort_unstable();
        picks
            .into_iter()
            .map(|mut code| {
                sizes
                    .iter()
                    .rev()
                    .map(|&s| {
                        let k = code % s;
                        code /= s;
                        k
                    })
                    .collect::<Vec<_>>()
                    .into_iter()
                    .rev()
                    .collect()
            })
            .collect()
    };
    Family { roles, candidates }
}

fn delta_slot<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    batch: &SampleBatch<T>,
    v: &[T],
    a: usize,
) -> Result<Vec<f64>> {
    f.delta(v, a, &batch.x_prime[a])
}

fn role_value<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    batch: &SampleBatch<T>,
    kind: Kind,
    r: &Recombination,
    zero: ZeroTest,
) -> Result<f64> {
    let v = r.build(batch);
    match kind {
        Kind::Square(a) => Ok(vec_norm(&delta_slot(f, batch, &v, a)?).powi(2)),
        Kind::Indicator(a, b) => {
            let first = delta_slot(f, batch, &v, a)?;
            let mut w = v;
            w[b] = batch.x_prime[b].clone();
            let second = delta_slot(f, batch, &w, a)?;
            Ok(if zero.is_zero(&sub(&first, &second)) {
                0.0
            } else {
                1.0
            })
        }
    }
}

fn all_role_values<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    batch: &SampleBatch<T>,
    fam: &Family,
    zero: ZeroTest,
) -> Result<Vec<Vec<f64>>> {
    fam.roles
        .iter()
        .map(|role| {
            role.options
                .iter()
                .map(|r| role_value(f, batch, role.kind, r, zero))
                .collect()
        })
        .collect()
}

fn candidate_value(vals: &[Vec<f64>], cand: &[usize]) -> f64 {
    cand.iter().zip(vals).map(|(&o, v)| v[o]).product()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BnConfig {
    pub reps: usize,
    /// Pilot replicates used only to select the maximizing recombination.
    pub pilot_reps: usize,
    /// Size of the random candidate subset searched for `B_n'`.
    pub bn_prime_candidates: usize,
    pub seed: u64,
    pub zero: ZeroTest,
}

impl BnConfig {
    pub fn new(reps: usize, seed: u64) -> Self {
        BnConfig {
            reps,
            pilot_reps: (reps / 4).max(64),
            bn_prime_candidates: 2048,
            seed,
            zero: ZeroTest::Exact,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BnTerms {
    pub bn: Estimate,
    pub bn_prime: Estimate,
    /// `E‖Δ₁ f(X)‖⁴`.
    pub delta1_fourth: Estimate,
    /// `4√n (√(n B_n) + √(n² B_n') + √(E‖Δ₁f‖⁴))`.
    pub bound: f64,
    pub bn_argmax: String,
    pub bn_prime_argmax: String,
    pub bn_candidates: usize,
    pub bn_prime_candidates: usize,
}

pub fn lemma_bound(n: usize, bn: f64, bn_prime: f64, delta1_fourth: f64) -> f64 {
    let nf = n as f64;
    4.0 * nf.sqrt()
        * ((nf * bn.max(0.0)).sqrt() + (nf * nf * bn_prime.max(0.0)).sqrt() + delta1_fourth.max(0.0).sqrt())
}

const CHUNK: usize = 256;

/// Pilot means of every candidate, reduced in a fixed order.
fn pilot_means<T, F, L>(
    f: &F,
    law: &L,
    n: usize,
    fam: &Family,
    cfg: &BnConfig,
    salt: u64,
) -> Result<Vec<f64>>
where
    T: Clone + Send + Sync,
    F: Functional<T> + ?Sized,
    L: CoordLaw<T> + ?Sized,
{
    let reps = cfg.pilot_reps.max(1);
    let chunks = reps.div_ceil(CHUNK);
    let sums: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; fam.candidates.len()];
            for r in c * CHUNK..((c + 1) * CHUNK).min(reps) {
                let mut rng = rng_for(cfg.seed ^ salt, stream::BN_PILOT, r as u64);
                let batch = SampleBatch::draw(law, n, &mut rng);
                let vals = all_role_values(f, &batch, fam, cfg.zero)?;
                for (a, cand) in acc.iter_mut().zip(&fam.candidates) {
                    *a += candidate_value(&vals, cand);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; fam.candidates.len()];
    for s in sums {
        for (t, v) in total.iter_mut().zip(s) {
            *t += v;
        }
    }
    Ok(total.into_iter().map(|t| t / reps as f64).collect())
}

fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub fn estimate_bn_terms<T, F, L>(f: &F, law: &L, n: usize, cfg: &BnConfig) -> Result<BnTerms>
where
    T: Clone + Send + Sync,
    F: Functional<T> + ?Sized,
    L: CoordLaw<T> + ?Sized,
{
    if !f.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if n < 2 {
        return Err(Error::invalid("n", "B_n needs at least two coordinates"));
    }
    if cfg.reps < 2 {
        return Err(Error::invalid("reps", "must be at least 2"));
    }
    let fam = bn_family(n);
    let sel = argmax_first(&pilot_means(f, law, n, &fam, cfg, 0)?);
    let fam_p = (n >= 3).then(|| bn_prime_family(n, cfg.bn_prime_candidates, cfg.seed));
    let sel_p = match &fam_p {
        Some(fp) => Some(argmax_first(&pilot_means(f, law, n, fp, cfg, 0x5a5a)?)),
        None => None,
    };

    let rows = par_replicates(cfg.seed, stream::BN_TERMS, cfg.reps, |rseed, rng| {
        let batch = SampleBatch::draw(law, n, rng);
        let d1 = delta_slot(f, &batch, &batch.x, 0)?;
        check_finite(&d1, rseed)?;
        let pick = |fam: &Family, sel: usize| -> Result<f64> {
            let cand = &fam.candidates[sel];
            let mut prod = 1.0;
            for (role, &o) in fam.roles.iter().zip(cand) {
                prod *= role_value(f, &batch, role.kind, &role.options[o], cfg.zero)?;
            }
            Ok(prod)
        };
        let b = pick(&fam, sel)?;
        let bp = match (&fam_p, sel_p) {
            (Some(fp), Some(s)) => pick(fp, s)?,
            _ => 0.0,
        };
        Ok([b, bp, vec_norm(&d1).powi(4)])
    })?;
    let col = |k: usize| Estimate::from_samples(&rows.iter().map(|r| r[k]).collect::<Vec<_>>());
    let (bn, bn_prime, m4) = (col(0), col(1), col(2));
    Ok(BnTerms {
        bound: lemma_bound(n, bn.value, bn_prime.value, m4.value),
        bn,
        bn_prime,
        delta1_fourth: m4,
        bn_argmax: fam.label(&fam.candidates[sel]),
        bn_prime_argmax: match (&fam_p, sel_p) {
            (Some(fp), Some(s)) => fp.label(&fp.candidates[s]),
            _ => String::new(),
        },
        bn_candidates: fam.candidates.len(),
        bn_prime_candidates: fam_p.map_or(0, |f| f.candidates.len()),
    })
}

/// Exact maxima over the same candidate families, by enumeration.
pub fn exact_bn_terms<T, F>(
    f: &F,
    law: &FiniteLaw<T>,
    n: usize,
    caps: EnumCaps,
    cfg: &BnConfig,
) -> Result<BnTerms>
where
    T: Clone,
    F: Functional<T> + ?Sized,
{
    if !f.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if n < 2 {
        return Err(Error::invalid("n", "B_n needs at least two coordinates"));
    }
    caps.check(law, n, 3)?;
    let fam = bn_family(n);
    let fam_p = (n >= 3).then(|| bn_prime_family(n, cfg.bn_prime_candidates, cfg.seed));
    let mut acc = vec![0.0; fam.candidates.len()];
    let mut acc_p = vec![0.0; fam_p.as_ref().map_or(0, |f| f.candidates.len())];
    let mut m4 = 0.0;
    for_each_config(law, 3 * n, |v, p| {
        let batch = batch_from(v, n);
        let vals = all_role_values(f, &batch, &fam, cfg.zero)?;
        for (a, c) in acc.iter_mut().zip(&fam.candidates) {
            *a += p * candidate_value(&vals, c);
        }
        if let Some(fp) = &fam_p {
            let vals = all_role_values(f, &batch, fp, cfg.zero)?;
            for (a, c) in acc_p.iter_mut().zip(&fp.candidates) {
                *a += p * candidate_value(&vals, c);
            }
        }
        m4 += p * vec_norm(&delta_slot(f, &batch, &batch.x, 0)?).powi(4);
        Ok(())
    })?;
    let sel = argmax_first(&acc);
    let (bp, label_p) = match &fam_p {
        Some(fp) => {
            let s = argmax_first(&acc_p);
            (acc_p[s], fp.label(&fp.candidates[s]))
        }
        None => (0.0, String::new()),
    };
    Ok(BnTerms {
        bound: lemma_bound(n, acc[sel], bp, m4),
        bn: Estimate::exact(acc[sel]),
        bn_prime: Estimate::exact(bp),
        delta1_fourth: Estimate::exact(m4),
        bn_argmax: fam.label(&fam.candidates[sel]),
        bn_prime_argmax: label_p,
        bn_candidates: fam.candidates.len(),
        bn_prime_candidates: fam_p.map_or(0, |f| f.candidates.len()),
    })
}
