//! Intrinsic volumes of random disc unions and the empirical covariance of
//! the Boolean-model functional.
//!
//!     cargo run --release --example boolean_intrinsic_volumes

use steinlab::boolean::{empirical_covariance, exact_sigma_n_1d, sample_scene, union_intrinsic_volumes, BooleanFunctional, GermLaw};

fn main() -> steinlab::Result<()> {
    for seed in 0..3 {
        let scene = sample_scene(2, 12, 0.6, seed)?;
        let v = union_intrinsic_volumes(2, &scene.germs, scene.r, scene.seed)?;
        println!("scene {seed}: χ = {:.0}, half-perimeter = {:.4}, area = {:.4}", v.v[0], v.v[1], v.v[2]);
    }

    let (n, r) = (256, 0.3);
    let f = BooleanFunctional::uncentered(1, n, r)?;
    let cov = empirical_covariance(&f, &GermLaw::new(1, n), n, 10_000, 7)?;
    let exact = exact_sigma_n_1d(n, r);
    println!("\nd = 1, n = {n}, R = {r}");
    println!("empirical Σ_n = {:.5}", cov.sigma);
    println!("stderr        = {:.5}", cov.stderr);
    println!("exact Σ_n     = {:.5}", exact);
    Ok(())
}
