//! Bound ingredients for the standardized sum of i.i.d. uniform-cube vectors,
//! the assembled smooth and convex bounds, and the measured discrepancy.
//!
//!     cargo run --release --example linear_statistic_bounds

use nalgebra::DMatrix;
use steinlab::bounds::{
    assemble_convex_bound, assemble_smooth_bound, estimate_gamma12, estimate_gamma34, estimate_sigma_term,
    GammaEstimates, Method, ZeroTest,
};
use steinlab::distance::{sample_statistic, smooth_discrepancy, GaussianBump, GaussianTarget, TestFunction};
use steinlab::functionals::LinearStatistic;
use steinlab::resample::UniformCube;

fn main() -> steinlab::Result<()> {
    let d = 2;
    let f = LinearStatistic::new(d);
    let law = UniformCube::standardized(d);
    let sigma = DMatrix::identity(d, d);
    let bump = GaussianBump::new(1.0)?;
    let budget = bump.budget(d);
    println!("budget: {budget:?}\n");
    println!("{:>5} {:>10} {:>10} {:>10} {:>12} {:>12} {:>12}", "n", "gamma1", "gamma2", "sigma_term", "smooth", "convex", "measured");
    for n in [8, 32, 128] {
        let g12 = estimate_gamma12(&f, &law, n, 20_000, 1)?;
        let g34 = estimate_gamma34(&f, &law, n, 2000, 8, 2, ZeroTest::Exact)?;
        let st = estimate_sigma_term(&f, &sigma, &law, n, 2000, 8, 3)?;
        let g = GammaEstimates::combine(&g12, &g34, &st, Method::NestedMc);
        let smooth = assemble_smooth_bound(&g, &budget, &sigma, true)?;
        let convex = assemble_convex_bound(&g, &sigma)?;
        let w = sample_statistic(&f, &law, n, 50_000, 4)?;
        let disc = smooth_discrepancy(&bump, &w, &GaussianTarget::identity(d), 5)?;
        println!(
            "{n:>5} {:>10.4} {:>10.4} {:>10.4} {:>12.4} {:>12.1} {:>12.2e}",
            g.gamma1.value, g.gamma2.value, g.sigma_term.value, smooth.nonneg.bound_value, convex.bound_value, disc.value
        );
    }
    Ok(())
}
