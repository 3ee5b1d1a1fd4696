//! Difference operators and the covariance decomposition on a small instance.
//!
//!     cargo run --example resampling_calculus

use steinlab::functionals::FnFunctional;
use steinlab::resample::enumerate::{covariance_exact, expected_t_exact, lemma_covariance_decomposition, EnumCaps};
use steinlab::resample::{delta_j, k_weight, tilde_delta_i_delta_j, t_matrix, FiniteLaw, SampleBatch, TStrategy};
use steinlab::rng::rng_from_seed;

fn main() -> steinlab::Result<()> {
    let f = FnFunctional::new(1, |x: &[f64]| vec![x.iter().cloned().fold(f64::MIN, f64::max)]);
    let batch = SampleBatch::new(vec![1.0, 5.0, 2.0], vec![2.0, 0.0, 4.0], vec![3.0, 3.0, 3.0])?;
    for j in 0..3 {
        println!("Δ_{j} max(X) = {:?}", delta_j(&f, &batch, j)?);
    }
    println!("Δ̃_0 Δ_1 max(X) = {:?}", tilde_delta_i_delta_j(&f, &batch, 0, 1)?);

    println!("\nweights k_(n,A) for n = 4:");
    for s in 0..4 {
        println!("  |A| = {s}: {:.6}", k_weight(4, s));
    }

    let t = t_matrix(&f, &batch, TStrategy::exact(), &mut rng_from_seed(0))?;
    println!("\nT on this batch ({} terms): {:.6}", t.n_terms, t.t[(0, 0)]);

    // Cov(g, h) against its decomposition, both by enumeration
    let law = FiniteLaw::new(vec![0.0, 1.0, 3.0], vec![0.2, 0.5, 0.3])?;
    let g = FnFunctional::new(1, |x: &[f64]| vec![x[0] * x[1] + x[2]]);
    let h = FnFunctional::new(1, |x: &[f64]| vec![x[1].max(x[2])]);
    let (lhs, rhs) = lemma_covariance_decomposition(&g, &h, &law, 3, EnumCaps::default())?;
    println!("\nCov(g, h) = {lhs:.15}\ndecomposed = {rhs:.15}");

    let pair = FnFunctional::new(2, |x: &[f64]| vec![x[0] * x[1], x[1] + x[2] * x[2]]);
    let cov = covariance_exact(&pair, &law, 3, EnumCaps::default())?;
    let et = expected_t_exact(&pair, &law, 3, EnumCaps::default())?;
    println!("\nCov(W) = {cov:.6}E[T]   = {et:.6}");
    Ok(())
}
