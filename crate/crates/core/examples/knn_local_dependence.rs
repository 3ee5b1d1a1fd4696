//! Nearest-neighbour ball counts: interaction graph, δ statistic and the
//! local-dependence bound report.
//!
//!     cargo run --release --example knn_local_dependence

use steinlab::locdep::{alpha_cones, delta_statistic, interaction_rule_graph, knn_bound_report, KnnBallFeatures, KnnReportConfig};
use steinlab::resample::{CoordLaw, UniformCube};
use steinlab::rng::rng_from_seed;

fn main() -> steinlab::Result<()> {
    let (m, k) = (2, 2);
    println!("α({m}) = {}", alpha_cones(m, None)?.count);
    let n = 200;
    let law = UniformCube { d: m, half_width: (n as f64).sqrt() / 2.0 };
    let x = law.sample_n(n + 4, &mut rng_from_seed(1));
    let g = interaction_rule_graph(&x[..n], k)?;
    println!("n = {n}: {} edges, max degree {}", g.edges.len(), g.max_degree());
    println!("δ = {} (bound {})", delta_statistic(&x, k)?, 6 * (k + 1) * (k + 5) + 1);

    let radii = vec![0.6, 1.0];
    for n in [64, 256] {
        let law = UniformCube { d: m, half_width: (n as f64).sqrt() / 2.0 };
        let probe = KnnBallFeatures::new(m, n, k, radii.clone(), vec![0.0; 2])?;
        let center = probe.pilot_center(&law, 500, 9)?.iter().map(|c| c.value).collect();
        let f = KnnBallFeatures::new(m, n, k, radii.clone(), center)?;
        let r = knn_bound_report(&f, &law, &KnnReportConfig::new(12.0, 500, 11))?;
        println!(
            "n = {n}: smooth bound {:.3}, convex bound {:?}, max δ {}, M-bound violations {}",
            r.knn_smooth.bound_value,
            r.knn_convex.as_ref().map(|b| b.bound_value),
            r.max_delta,
            r.m_bound_violations
        );
    }
    Ok(())
}
