//! The limiting covariance as a series in the number of overlapping grains,
//! and the convergence of Σ_n towards it.
//!
//!     cargo run --release --example limiting_covariance

use steinlab::boolean::exact_sigma_n_1d;
use steinlab::limiting::{covariance_gap_report, exact_sigma_1d, fit_gap_exponent, p_coefficients, sigma_series, SeriesConfig};

fn main() -> steinlab::Result<()> {
    let r = 0.3;
    println!("P(d=1, R={r}) = {:.6}", p_coefficients(1, r)?);
    let sigma = exact_sigma_1d(r)?;
    println!("closed-form Σ (d=1) = {sigma:.7}");

    let ns: Vec<usize> = (6..=12).map(|k| 1 << k).collect();
    let gaps = ns
        .iter()
        .map(|&n| covariance_gap_report(&exact_sigma_n_1d(n, r), &sigma))
        .collect::<steinlab::Result<Vec<_>>>()?;
    for (n, g) in ns.iter().zip(&gaps) {
        println!("n = {n:>5}: max |Σ_n − Σ| = {:.3e}", g.max_gap);
    }
    if let Some(fit) = fit_gap_exponent(&ns, &gaps) {
        println!("fitted exponent {:.3}", fit.slope);
    }

    let s = sigma_series(2, 0.4, &SeriesConfig::new(8, 20_000, 3))?;
    println!("\nd = 2, R = 0.4: {} terms, converged = {}", s.k_used, s.converged);
    println!("Σ ≈ {:.5}stderr {:.5}", s.sigma, s.stderr);
    Ok(())
}
