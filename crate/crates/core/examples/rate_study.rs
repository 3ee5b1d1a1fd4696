//! Proxy convex distance of standardized sums across n, with log-log fits.
//! The lattice law shows the n^{-1/2} rate; the uniform cube sits at the
//! sampling floor because its error is of order 1/n.
//!
//!     cargo run --release --example rate_study

use steinlab::distance::{rate_study, ClassSpec, GaussianTarget};
use steinlab::functionals::LinearStatistic;
use steinlab::resample::{CubeVertices, UniformCube};

fn main() -> steinlab::Result<()> {
    let ns = [16, 32, 64, 128, 256];
    let spec = ClassSpec { directions: 16, thresholds: 128, ..ClassSpec::default() };
    let f = LinearStatistic::new(2);
    let target = GaussianTarget::identity(2);
    for (name, study) in [
        ("cube vertices", rate_study(&f, &CubeVertices { d: 2 }, &target, &ns, 40_000, &spec, 1)?),
        ("uniform cube", rate_study(&f, &UniformCube::standardized(2), &target, &ns, 40_000, &spec, 1)?),
    ] {
        println!("{name}:");
        for r in &study.rows {
            println!("  n = {:>4}  proxy = {:.4}  envelope = {:.4}", r.n, r.value, r.envelope);
        }
        if let Some(fit) = study.fit {
            println!("  slope {:.3} ± {:.3}", fit.slope, fit.half_width);
        }
    }
    Ok(())
}
