//! Acceptance checks. Runs as a plain binary so every criterion prints its
//! PASS/FAIL line even when an earlier one fails; exits nonzero on any FAIL.
//!
//!     cargo test --release --test acceptance

mod common;

use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use steinlab::boolean::{
    empirical_covariance, exact_sigma_n_1d, sample_scene, union_volumes_2d, BooleanFunctional,
    GermLaw,
};
use steinlab::bounds::{
    estimate_bn_terms, estimate_gamma12, estimate_gamma34, estimate_sigma_term, exact_bn_terms,
    exact_gamma34, exact_sigma_term_sq, BnConfig, ExampleClt, ZeroTest,
};
use steinlab::distance::{rate_study, ClassSpec, GaussianTarget};
use steinlab::functionals::{FnFunctional, Functional, LinearStatistic};
use steinlab::harness::{self, ExperimentConfig, ExperimentKind};
use steinlab::limiting::{exact_sigma_series_1d, pp_identity, SeriesConfig};
use steinlab::locdep::{
    delta_statistic, interaction_rule_graph, knn_bound_report, noninteracting, KnnBallFeatures,
    KnnReportConfig,
};
use steinlab::resample::enumerate::{
    covariance_exact, expected_t_exact, lemma_covariance_decomposition, EnumCaps,
};
use steinlab::resample::{
    t_matrix, tilde_delta_i_delta_j, CoordLaw, FiniteLaw, SampleBatch, StandardNormal, TStrategy,
    UniformCube,
};
use steinlab::stats::Estimate;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random finite law with 2 or 3 atoms.
fn random_law(r: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let s = r.random_range(2..=3usize);
    let support: Vec<f64> = (0..s).map(|k| k as f64 + r.random_range(-0.3..0.3)).collect();
    let w: Vec<f64> = (0..s).map(|_| r.random_range(0.2..1.0)).collect();
    let tot: f64 = w.iter().sum();
    (support, w.iter().map(|v| v / tot).collect())
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

// 1: covariance decomposition on random lookup functionals
fn criterion1() -> Verdict {
    let t0 = Instant::now();
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for trial in 0..100u64 {
        let n = 1 + (trial as usize % 4);
        let (support, probs) = random_law(&mut r);
        let law = FiniteLaw::new(support.clone(), probs.clone()).unwrap();
        let g = common::lookup_functional(&support, n, 1, 1000 + trial);
        let h = common::lookup_functional(&support, n, 1, 5000 + trial);
        let (lhs, rhs) = lemma_covariance_decomposition(&g, &h, &law, n, EnumCaps::default()).unwrap();
        // Cov(g, h) from the joint covariance of (g, h)
        let gh = {
            let (g, h) = (g.clone(), h.clone());
            FnFunctional::new(2, move |x: &[f64]| vec![g.eval(x).unwrap()[0], h.eval(x).unwrap()[0]])
        };
        let oracle = common::covariance(&gh, &support, &probs, n, 2)[(0, 1)];
        worst = worst.max((lhs - oracle).abs()).max((rhs - oracle).abs());
    }
    let secs = t0.elapsed().as_secs_f64();
    Verdict::new(
        worst <= 1e-12 && secs < 10.0,
        format!("100 pairs, max |error| {worst:.2e} (tol 1e-12), {secs:.2} s (limit 10 s)"),
    )
}

// 2: E[T] = Cov(W)
fn criterion2() -> Verdict {
    let mut r = rng(202);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for trial in 0..40u64 {
        let n = 1 + (trial as usize % 4);
        let (support, probs) = random_law(&mut r);
        let law = FiniteLaw::new(support.clone(), probs.clone()).unwrap();
        let f = common::lookup_functional(&support, n, 2, 9000 + trial);
        let et = expected_t_exact(&f, &law, n, EnumCaps::default()).unwrap();
        let oracle = common::covariance(&f, &support, &probs, n, 2);
        worst = worst.max(max_abs_diff(&et, &oracle));
        count += 1;
    }
    Verdict::new(worst <= 1e-12, format!("{count} instances, max entry error {worst:.2e} (tol 1e-12)"))
}

// 3: linear statistic
fn criterion3() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;

    // second differences vanish exactly
    let mut r = rng(303);
    let mut nonzero = 0;
    for _ in 0..1000 {
        let n = r.random_range(2..12usize);
        let b: SampleBatch<f64> = SampleBatch::draw(&StandardNormal, n, &mut r);
        let f = LinearStatistic::new(1);
        for i in 0..n {
            for j in 0..n {
                if i != j && tilde_delta_i_delta_j(&f, &b, i, j).unwrap().iter().any(|v| *v != 0.0) {
                    nonzero += 1;
                }
            }
        }
    }
    pass &= nonzero == 0;
    notes.push(format!("nonzero second differences {nonzero}"));

    // B_n, B_n' vanish exactly
    let f = LinearStatistic::new(1);
    let mc = estimate_bn_terms(&f, &StandardNormal, 6, &BnConfig::new(2000, 7)).unwrap();
    let fl = FiniteLaw::new(vec![-1.0, 0.5, 2.0], vec![0.3, 0.3, 0.4]).unwrap();
    let mut cfg = BnConfig::new(0, 7);
    cfg.bn_prime_candidates = 64;
    let ex = exact_bn_terms(&f, &fl, 3, EnumCaps::default(), &cfg).unwrap();
    let zeros = [mc.bn.value, mc.bn_prime.value, ex.bn.value, ex.bn_prime.value];
    pass &= zeros.iter().all(|v| *v == 0.0);
    notes.push(format!("B_n, B_n' (MC, exact) = {zeros:?}"));

    // γ₁ against the closed form E|X - X'|³ n^{-1/2}
    let n = 16;
    let g = estimate_gamma12(&f, &StandardNormal, n, 1_000_000, 11).unwrap();
    let closed = 2f64.powf(1.5) * common::normal_abs_moment(3) / (n as f64).sqrt();
    let rel = (g.gamma1.value - closed).abs() / closed;
    pass &= rel <= 0.02;
    notes.push(format!("gamma1 {:.5} vs {:.5} (rel {:.2e}, tol 2e-2)", g.gamma1.value, closed, rel));

    // the four example inequalities
    let m = ExampleClt {
        m3: common::normal_abs_moment(3),
        m4: common::normal_abs_moment(4),
        m5: common::normal_abs_moment(5),
        m6: common::normal_abs_moment(6),
    };
    let sigma = DMatrix::identity(1, 1);
    let mut held = 0;
    let mut total = 0;
    for n in [4, 16, 64] {
        let g12 = estimate_gamma12(&f, &StandardNormal, n, 200_000, 21).unwrap();
        let g34 = estimate_gamma34(&f, &StandardNormal, n, 20_000, 2, 22, ZeroTest::Exact).unwrap();
        let st = estimate_sigma_term(&f, &sigma, &StandardNormal, n, 20_000, 4, 23).unwrap();
        for (est, bound) in [
            (g12.gamma1.value, m.gamma1_bound(n)),
            (g12.gamma2.value, m.gamma2_bound(n)),
            (g34.gamma3.value, m.gamma_p2_bound(1, n)),
            (g34.gamma4.value, m.gamma_p2_bound(2, n)),
            (st.value.value, m.sigma_term_bound(n)),
        ] {
            total += 1;
            if est <= bound {
                held += 1;
            }
        }
    }
    pass &= held == total;
    notes.push(format!("example inequalities held {held}/{total}"));
    Verdict::new(pass, notes.join("; "))
}

// 4: rate of the proxy convex distance for a sum of uniform-cube vectors
fn criterion4() -> Verdict {
    let t0 = Instant::now();
    let ns: Vec<usize> = (4..=10).map(|k| 1usize << k).collect();
    let f = LinearStatistic::new(2);
    let law = UniformCube::standardized(2);
    let study = rate_study(&f, &law, &GaussianTarget::identity(2), &ns, 100_000, &ClassSpec::default(), 404).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let values: Vec<String> = study.rows.iter().map(|r| format!("{:.4}", r.value)).collect();
    match study.fit {
        Some(fit) => Verdict::new(
            (-0.65..=-0.35).contains(&fit.slope) && secs < 600.0,
            format!(
                "slope {:.3} ± {:.3} (accept [-0.65, -0.35]); distances [{}]; envelope {:.4}; {secs:.0} s",
                fit.slope,
                fit.half_width,
                values.join(", "),
                study.rows[0].envelope
            ),
        ),
        None => Verdict::new(false, format!("no fit: {:?}", study.fit_error)),
    }
}

// 5: disc-union intrinsic volumes
fn criterion5() -> Verdict {
    let mut r = rng(505);
    let (mut worst_a, mut worst_p): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let m = r.random_range(3..=10usize);
        let rad = r.random_range(0.3..1.0);
        let c: Vec<[f64; 2]> = (0..m).map(|_| [r.random_range(0.0..3.0), r.random_range(0.0..3.0)]).collect();
        let v = union_volumes_2d(&c, rad).unwrap();
        let area = common::disc_union_area(&c, rad, 20_000);
        let perim = common::disc_union_perimeter(&c, rad, 100_000);
        worst_a = worst_a.max((v.v[2] - area).abs() / area);
        // V_1 is half the perimeter
        worst_p = worst_p.max((v.v[1] - 0.5 * perim).abs() / (0.5 * perim));
    }
    let mut worst_res: f64 = 0.0;
    let mut non_integral = 0;
    for s in 0..10_000u64 {
        let m = 3 + (s as usize % 8);
        let rad = 0.3 + 0.1 * (s % 7) as f64;
        let scene = sample_scene(2, m, rad, 7_000 + s).unwrap();
        let c: Vec<[f64; 2]> = scene.germs.iter().map(|g| [g[0], g[1]]).collect();
        let v = union_volumes_2d(&c, rad).unwrap();
        worst_res = worst_res.max(v.residual);
        if v.v[0] != v.v[0].round() {
            non_integral += 1;
        }
    }
    Verdict::new(
        worst_a <= 0.005 && worst_p <= 0.01 && worst_res < 1e-6 && non_integral == 0,
        format!(
            "V2 rel err {worst_a:.2e} (tol 5e-3), V1 rel err {worst_p:.2e} (tol 1e-2), \
             V0 residual {worst_res:.2e} (tol 1e-6), non-integral {non_integral}/10000"
        ),
    )
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

// 6: Boolean model in one dimension
fn criterion6() -> Verdict {
    let r = 0.3;
    let cfg = SeriesConfig { eps_rel: 1e-16, ..SeriesConfig::new(40, 1, 0) };
    let series = exact_sigma_series_1d(r, &cfg).unwrap().sigma;
    let oracle = common::boolean_limit_covariance_1d(r);
    let series_err = max_abs_diff(&series, &oracle);

    let ns = [8usize, 16, 32, 64, 128, 256, 512];
    let gaps: Vec<f64> = ns.iter().map(|&n| max_abs_diff(&exact_sigma_n_1d(n, r), &series)).collect();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let xs: Vec<f64> = ns.iter().map(|n| *n as f64).collect();
    let slope = common::loglog_slope(&xs, &gaps);

    let mut worst_z: f64 = 0.0;
    for &n in &[8usize, 32, 128] {
        let f = BooleanFunctional::uncentered(1, n, r).unwrap();
        let emp = empirical_covariance(&f, &GermLaw::new(1, n), n, 10_000, 600 + n as u64).unwrap();
        let exact = exact_sigma_n_1d(n, r);
        for a in 0..2 {
            for b in 0..2 {
                let z = (emp.sigma[(a, b)] - exact[(a, b)]).abs() / emp.stderr[(a, b)];
                worst_z = worst_z.max(z);
            }
        }
    }

    let mins: Vec<f64> = [0.2, 0.5, 1.0]
        .iter()
        .map(|&rr| min_eigenvalue(&exact_sigma_series_1d(rr, &cfg).unwrap().sigma))
        .collect();
    let pass = series_err < 1e-10
        && decreasing
        && (-1.4..=-0.6).contains(&slope)
        && worst_z < 4.0
        && mins.iter().all(|v| *v > 0.0);
    Verdict::new(
        pass,
        format!(
            "series vs closed form {series_err:.1e}; gaps decreasing {decreasing}; exponent {slope:.3} \
             (accept [-1.4, -0.6]); MC max z {worst_z:.2} (tol 4); min eigenvalues {:?}",
            mins.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        ),
    )
}

// 7: series identity for the P coefficients
fn criterion7() -> Verdict {
    let mut r = rng(707);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let rad = r.random_range(0.05..2.0);
        let len = r.random_range(0.05..3.0);
        // a segment: V_0 = 1, V_1 = length
        for i in 0..=1 {
            let (lhs, rhs) = pp_identity(1, rad, &[1.0, len], i, 40).unwrap();
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Verdict::new(worst <= 1e-8, format!("10 pairs, max |lhs - rhs| {worst:.2e} (tol 1e-8)"))
}

fn cube(n: usize) -> UniformCube {
    UniformCube { d: 2, half_width: (n as f64).sqrt() / 2.0 }
}

// 8: nearest-neighbour local dependence
fn criterion8() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;

    let mut r = rng(808);
    let (mut checked, mut failed) = (0usize, 0usize);
    while checked < 10_000 {
        let n = r.random_range(10..30usize);
        let k = r.random_range(1..=3usize);
        let law = cube(n);
        let f = KnnBallFeatures::new(2, n, k, vec![0.5, 0.9], vec![0.0, 0.0]).unwrap();
        let x = law.sample_n(n, &mut r);
        let xp = law.sample_n(n, &mut r);
        let i = r.random_range(0..n);
        let j = (i + r.random_range(1..n)) % n;
        let mut xi = x.clone();
        xi[i] = xp[i].clone();
        let mut xj = x.clone();
        xj[j] = xp[j].clone();
        let mut xij = xi.clone();
        xij[j] = xp[j].clone();
        let absent = [&x, &xi, &xj, &xij]
            .iter()
            .all(|p| !interaction_rule_graph(p, k).unwrap().has_edge(i, j));
        if absent {
            checked += 1;
            if !noninteracting(&f, &x, &xp, i, j).unwrap() {
                failed += 1;
            }
        }
    }
    pass &= failed == 0;
    notes.push(format!("noninteraction {}/{checked}", checked - failed));

    // α(2) = 6 cones of half-angle 30°
    let n = 200;
    for k in 1..=3usize {
        let bound = 6 * (k + 1) * (k + 5) + 1;
        let law = cube(n);
        let mut worst = 0;
        for _ in 0..10_000 {
            let x = law.sample_n(n + 4, &mut r);
            worst = worst.max(delta_statistic(&x, k).unwrap());
        }
        pass &= worst <= bound;
        notes.push(format!("k={k} max δ {worst} ≤ {bound}"));
    }

    let p = 12.0;
    let target = -(p - 8.0) / (2.0 * p);
    let ns = [64usize, 128, 256, 512];
    let mut vals = Vec::new();
    for &n in &ns {
        let law = cube(n);
        let radii = vec![0.6, 1.0];
        let probe = KnnBallFeatures::new(2, n, 2, radii.clone(), vec![0.0; 2]).unwrap();
        let center = probe.pilot_center(&law, 400, 80 + n as u64).unwrap().iter().map(|c| c.value).collect();
        let f = KnnBallFeatures::new(2, n, 2, radii, center).unwrap();
        let rep = knn_bound_report(&f, &law, &KnnReportConfig::new(p, 400, 90 + n as u64)).unwrap();
        vals.push(rep.knn_smooth.bound_value);
    }
    let xs: Vec<f64> = ns.iter().map(|n| *n as f64).collect();
    let slope = common::loglog_slope(&xs, &vals);
    pass &= (slope - target).abs() <= 0.15;
    notes.push(format!("smooth bound slope {slope:.3} vs {target:.3} (tol 0.15)"));
    Verdict::new(pass, notes.join("; "))
}

fn within(est: &Estimate, exact: f64, worst: &mut f64, label: &str, log: &mut Vec<String>) -> bool {
    if est.stderr == 0.0 {
        let ok = (est.value - exact).abs() <= 1e-12;
        if !ok {
            log.push(format!("{label}: {} vs {exact} with zero stderr", est.value));
        }
        return ok;
    }
    let z = (est.value - exact).abs() / est.stderr;
    *worst = worst.max(z);
    if z >= 4.0 {
        log.push(format!("{label}: z = {z:.2}"));
    }
    z < 4.0
}

// 9: Monte-Carlo estimators against enumeration
fn criterion9() -> Verdict {
    let reps = 100_000;
    let mut worst: f64 = 0.0;
    let mut log = Vec::new();
    let mut pass = true;
    // (support, probabilities, n, f)
    type Instance = (Vec<f64>, Vec<f64>, usize, FnFunctional<f64>);
    let instances: Vec<Instance> = vec![
        (
            vec![0.0, 1.0, 3.0],
            vec![0.2, 0.5, 0.3],
            3,
            FnFunctional::new(2, |x: &[f64]| {
                let n = x.len() as f64;
                vec![
                    x.iter().cloned().fold(f64::MIN, f64::max) / n.sqrt(),
                    x.iter().map(|v| v * v).sum::<f64>() / n,
                ]
            })
            .symmetric(true),
        ),
        (
            vec![-1.0, 2.0],
            vec![0.6, 0.4],
            2,
            FnFunctional::new(1, |x: &[f64]| vec![x[0] * x[1] + x[0] + x[1]]).symmetric(true),
        ),
    ];
    for (idx, (support, probs, n, f)) in instances.into_iter().enumerate() {
        let law = FiniteLaw::new(support.clone(), probs.clone()).unwrap();
        let caps = EnumCaps::default();
        let tag = |s: &str| format!("#{idx} {s}");
        let seed = 900 + 10 * idx as u64;

        let (s3, s4) = common::gamma12_raw(&f, &support, &probs, n);
        let g = estimate_gamma12(&f, &law, n, reps, seed).unwrap();
        pass &= within(&g.gamma1, s3, &mut worst, &tag("gamma1"), &mut log);
        pass &= within(&g.gamma2_sq, s4, &mut worst, &tag("gamma2^2"), &mut log);

        let g34 = estimate_gamma34(&f, &law, n, reps, 2, seed + 1, ZeroTest::Exact).unwrap();
        let e34 = exact_gamma34(&f, &law, n, caps, ZeroTest::Exact).unwrap();
        pass &= within(&g34.gamma3_cubed, e34.gamma3_cubed.value, &mut worst, &tag("gamma3^3"), &mut log);
        pass &= within(&g34.gamma4_fourth, e34.gamma4_fourth.value, &mut worst, &tag("gamma4^4"), &mut log);

        let sigma = common::covariance(&f, &support, &probs, n, f.dim());
        let st = estimate_sigma_term(&f, &sigma, &law, n, reps, 2, seed + 2).unwrap();
        let est = exact_sigma_term_sq(&f, &sigma, &law, n, caps).unwrap();
        pass &= within(&st.squared, est.squared.value, &mut worst, &tag("sigma_term^2"), &mut log);

        let mut cfg = BnConfig::new(reps, seed + 3);
        cfg.bn_prime_candidates = 64;
        let bn = estimate_bn_terms(&f, &law, n, &cfg).unwrap();
        let ebn = exact_bn_terms(&f, &law, n, caps, &cfg).unwrap();
        pass &= within(&bn.bn, ebn.bn.value, &mut worst, &tag("B_n"), &mut log);
        pass &= within(&bn.bn_prime, ebn.bn_prime.value, &mut worst, &tag("B_n'"), &mut log);

        let mut r = rng(seed + 4);
        let batch = SampleBatch::draw(&law, n, &mut r);
        let exact_t = t_matrix(&f, &batch, TStrategy::exact(), &mut r).unwrap().t;
        let mc_t = t_matrix(&f, &batch, TStrategy::MonteCarlo { reps }, &mut r).unwrap();
        let se = mc_t.stderr.expect("monte-carlo stderr");
        for a in 0..f.dim() {
            for b in 0..f.dim() {
                let e = Estimate { value: mc_t.t[(a, b)], stderr: se[(a, b)], reps };
                pass &= within(&e, exact_t[(a, b)], &mut worst, &tag("T"), &mut log);
            }
        }

        // the covariance oracle and the library enumeration agree too
        let lib = covariance_exact(&f, &law, n, caps).unwrap();
        pass &= max_abs_diff(&lib, &sigma) <= 1e-12;
    }
    let mut detail = format!("max z {worst:.2} (tol 4)");
    if !log.is_empty() {
        detail.push_str(&format!("; {}", log.join(", ")));
    }
    Verdict::new(pass, detail)
}

fn in_pool<R: Send>(threads: usize, job: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(job)
}

fn selftest_csv(dir: &Path) -> Vec<u8> {
    let (_, arts) = harness::selftest_to(Some(dir)).unwrap();
    std::fs::read(arts.unwrap().csv).unwrap()
}

fn rate_csv(dir: &Path) -> Vec<u8> {
    let mut c = ExperimentConfig::new(ExperimentKind::RateStudy, 10);
    c.model.d = 2;
    c.model.n_grid = vec![4, 8, 16, 32];
    c.estimator.samples = 5000;
    c.estimator.directions = 16;
    c.estimator.thresholds = 64;
    c.output.dir = Some(dir.to_path_buf());
    let res = harness::run(&c).unwrap();
    std::fs::read(res.artifacts.csv).unwrap()
}

// 10: byte-identical artifacts across runs and worker counts
fn criterion10() -> Verdict {
    let mut self_csvs = Vec::new();
    let mut rate_csvs = Vec::new();
    for threads in [1, 4, 1, 4] {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().to_path_buf();
        self_csvs.push(in_pool(threads, || selftest_csv(&p)));
        rate_csvs.push(in_pool(threads, || rate_csv(&p)));
    }
    let same_self = self_csvs.windows(2).all(|w| w[0] == w[1]);
    let same_rate = rate_csvs.windows(2).all(|w| w[0] == w[1]);
    Verdict::new(
        same_self && same_rate,
        format!("selftest identical {same_self}, rate study identical {same_rate} (threads 1, 4, 1, 4)"),
    )
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(usize, fn() -> Verdict); 10] = [
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
        (8, criterion8),
        (9, criterion9),
        (10, criterion10),
    ];
    let mut failed = Vec::new();
    for (id, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let v = run();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id}: {status} [{:.1} s] {}", t0.elapsed().as_secs_f64(), v.detail);
        if !v.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
