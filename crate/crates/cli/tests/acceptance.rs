//! Acceptance criteria 1-12. Each test prints one `criterion N PASS|FAIL`
//! line and fails when its criterion does.

use std::path::Path;
use std::sync::{Arc, OnceLock};

use horolab_cli::{execute_scenario, RunOptions, Scenario};
use horolab_core::asymptotics::*;
use horolab_core::conformal::{DiskAutomorphism, RiemannMap};
use horolab_core::domain::{DomainSpec, PlanarDomain};
use horolab_core::metric::{
    solve_metric_field, GeodesicPath, MethodChoice, MetricEngine, MetricField, DEFAULT_SEED,
};
use horolab_core::C64;
use horolab_oracles as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn verdict(n: u32, title: &str, ok: bool, detail: String) {
    println!(
        "criterion {n:>2} {}: {title} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

fn engine(domain: PlanarDomain, h: f64, method: MethodChoice) -> MetricEngine {
    let field = solve_metric_field(Arc::new(domain), h, method).unwrap();
    MetricEngine::new(Arc::new(field))
}

fn disk() -> &'static MetricEngine {
    static E: OnceLock<MetricEngine> = OnceLock::new();
    E.get_or_init(|| engine(PlanarDomain::disk(), 1.0 / 256.0, MethodChoice::Auto))
}

fn square() -> &'static MetricEngine {
    static E: OnceLock<MetricEngine> = OnceLock::new();
    E.get_or_init(|| engine(PlanarDomain::square(), 1.0 / 128.0, MethodChoice::Auto))
}

/// Uniform points of the disk of radius `1 - min_delta`.
fn disk_points(n: usize, min_delta: f64, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let r = 1.0 - min_delta;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = c(rng.gen_range(-r..r), rng.gen_range(-r..r));
        if z.norm() <= r {
            out.push(z);
        }
    }
    out
}

fn ray(e: &MetricEngine, o: C64, target: C64, t_max: f64) -> GeodesicPath {
    let p = e.domain().locate_boundary_point(target, None).unwrap();
    e.geodesic_ray(o, &p, t_max).unwrap()
}

#[test]
fn criterion_01_disk_distance_oracle() {
    let e = disk();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let pts = disk_points(200, 0.05, &mut rng);
    let worst = pts
        .chunks(2)
        .map(|p| (e.distance(p[0], p[1]).unwrap() / oracle::disk::distance(p[0], p[1]) - 1.0).abs())
        .fold(0.0, f64::max);
    verdict(
        1,
        "disk distances against the closed form",
        worst <= 1e-2,
        format!("100 pairs, worst relative error {worst:.2e}"),
    );
}

#[test]
fn criterion_02_conformal_invariance() {
    let e = disk();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 2);
    let maps: Vec<DiskAutomorphism> = (0..5)
        .map(|_| {
            let a = disk_points(1, 0.4, &mut rng)[0];
            DiskAutomorphism::new(a, rng.gen_range(0.0..std::f64::consts::TAU)).unwrap()
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    while pairs < 50 {
        let p = disk_points(2, 0.05, &mut rng);
        // Images must stay at boundary distance 0.05 as well.
        if maps
            .iter()
            .any(|t| t.eval(p[0]).norm() > 0.95 || t.eval(p[1]).norm() > 0.95)
        {
            continue;
        }
        pairs += 1;
        let k = e.distance(p[0], p[1]).unwrap();
        for t in &maps {
            worst = worst.max((e.distance(t.eval(p[0]), t.eval(p[1])).unwrap() - k).abs());
        }
    }
    verdict(
        2,
        "distances are invariant under disk automorphisms",
        worst <= 1e-2,
        format!("50 pairs x 5 maps, worst change {worst:.2e}"),
    );
}

#[test]
fn criterion_03_busemann_monotonicity() {
    let mut worst = f64::NEG_INFINITY;
    let mut detail = Vec::new();
    for (name, e, o, target) in [
        ("disk", disk(), c(0.0, 0.0), c(1.0, 0.0)),
        ("square", square(), c(0.0, 0.0), c(0.5, 0.0)),
    ] {
        let r = ray(e, o, target, DEFAULT_T_MAX);
        let probes = ProbeSet::default_for(e.domain(), DEFAULT_SEED).unwrap();
        let it = busemann_iterates(e, &r, &probes, &default_schedule(DEFAULT_T_MAX)).unwrap();
        worst = worst.max(it.max_increase);
        detail.push(format!("{name} {:.2e}", it.max_increase));
    }
    verdict(
        3,
        "Busemann iterates do not increase",
        worst <= 1e-2,
        format!("largest increase: {}", detail.join(", ")),
    );
}

#[test]
fn criterion_04_rays_to_one_point_share_a_busemann_function() {
    let e = disk();
    let th = Thresholds::default();
    let t = DEFAULT_T_MAX;
    let g = ray(e, c(0.0, 0.0), c(1.0, 0.0), t + 1.0);
    let s = ray(e, c(0.0, 0.3), c(1.0, 0.0), t + 1.0);
    let schedule = default_schedule(t);
    let rep = strong_asymptoticity_test(e, &g, &s, &schedule, &default_shift_grid(), &th).unwrap();
    let probes = ProbeSet::default_for(e.domain(), DEFAULT_SEED).unwrap();
    let bg = busemann_eval(e, &g, &probes, &schedule, &th).unwrap();
    let bs = busemann_eval(e, &s, &probes, &schedule, &th).unwrap();
    let gap = bg.gap(&bs).unwrap();
    let strong = rep.strongly_asymptotic == Some(true);
    verdict(
        4,
        "disk rays from 0 and 0.3i to 1",
        strong && gap <= 5e-2,
        format!(
            "strong {strong}, final tail {:.2e}, Busemann gap {gap:.2e}",
            rep.shifted_tail.last().copied().unwrap_or(f64::NAN)
        ),
    );
}

#[test]
fn criterion_05_square_rays_are_strongly_asymptotic() {
    let e = square();
    let th = Thresholds::default();
    let t = DEFAULT_T_MAX;
    let target = c(0.5, 0.0);
    let g = ray(e, c(0.0, 0.0), target, t + 1.0);
    let s = ray(e, c(-0.2, 0.25), target, t + 1.0);
    let rep =
        strong_asymptoticity_test(e, &g, &s, &default_schedule(t), &default_shift_grid(), &th)
            .unwrap();
    let tail = rep.shifted_tail.last().copied().unwrap_or(f64::NAN);
    verdict(
        5,
        "square rays to one boundary point",
        rep.strongly_asymptotic == Some(true) && tail <= 5e-2,
        format!("final shifted tail {tail:.2e}, shift {:?}", rep.best_shift),
    );
}

#[test]
fn criterion_06_square_boundary_map() {
    let e = square();
    let d = e.domain();
    let th = Thresholds::default();
    let probes = ProbeSet::default_for(d, DEFAULT_SEED).unwrap();
    let base = d.base_point();
    let targets = [c(0.5, 0.0), c(0.1, 0.5), c(-0.5, -0.2), c(-0.25, -0.5)];
    let mut limits = Vec::new();
    for (ti, &t) in targets.iter().enumerate() {
        let p = d.locate_boundary_point(t, None).unwrap();
        let nu = d.components()[0].inward_normal(p.parameter);
        let mut seqs = vec![d.approach_sequence(&p, 10, DEFAULT_D0).unwrap()];
        for slant in [0.6, -0.6] {
            let dir = nu * c(1.0, slant);
            let dir = dir / dir.norm();
            let pts = (0..10)
                .map(|k| t + dir * (DEFAULT_D0 * 0.5f64.powi(k)))
                .collect();
            seqs.push(d.custom_approach(&p, pts).unwrap());
        }
        for s in seqs {
            let sample = horofunction_limit(e, &s, &probes, &th).unwrap();
            limits.push((ti, s.points, sample));
        }
    }
    let (mut same, mut distinct, mut step) = (0.0f64, f64::INFINITY, f64::INFINITY);
    for i in 0..limits.len() {
        for j in i + 1..limits.len() {
            let gap = limits[i].2.gap(&limits[j].2).unwrap();
            if limits[i].0 == limits[j].0 {
                same = same.max(gap);
                let g: Vec<f64> = (7..10)
                    .map(|k| gromov_product(e, base, limits[i].1[k], limits[j].1[k]).unwrap())
                    .collect();
                step = step.min(g[1] - g[0]).min(g[2] - g[1]);
            } else {
                distinct = distinct.min(gap);
            }
        }
    }
    verdict(
        6,
        "square boundary map is well defined and injective",
        same <= 5e-2 && distinct >= 0.1 && step > 0.0,
        format!(
            "same-point gap {same:.2e}, distinct-point gap {distinct:.3}, smallest Gromov step {step:.3}"
        ),
    );
}

/// Busemann function of the slit disk at one side of 0.5, from the
/// half-plane picture.
fn slit_busemann(upper: bool, y: C64) -> f64 {
    let (a, b) = oracle::slit_disk::slit_images(0.5);
    oracle::half_plane::busemann(
        if upper { a } else { b },
        oracle::slit_disk::to_half_plane(y).0,
    )
}

#[test]
fn criterion_07_slit_disk_has_no_limit() {
    let e = engine(PlanarDomain::slit_disk(), 1.0 / 128.0, MethodChoice::Auto);
    let d = e.domain();
    let th = Thresholds::default();
    let probes = ProbeSet::default_for(d, DEFAULT_SEED).unwrap();
    let mut samples = Vec::new();
    for side in [c(0.0, 1.0), c(0.0, -1.0)] {
        let p = d.locate_boundary_point(c(0.5, 0.0), Some(side)).unwrap();
        let seq = d.approach_sequence(&p, 10, DEFAULT_D0).unwrap();
        samples.push(horofunction_limit(&e, &seq, &probes, &th).unwrap());
    }
    let gap = samples[0].gap(&samples[1]).unwrap();
    let base = probes.base_point();
    let margin = probes
        .points
        .iter()
        .map(|&y| {
            let up = slit_busemann(true, y) - slit_busemann(true, base);
            let lo = slit_busemann(false, y) - slit_busemann(false, base);
            (up - lo).abs()
        })
        .fold(0.0, f64::max);
    verdict(
        7,
        "two-sided approach to 0.5 on the slit disk",
        gap >= 0.1 && margin >= 0.1,
        format!("sample gap {gap:.3}, oracle gap {margin:.3}"),
    );
}

#[test]
fn criterion_08_annulus_squeezing() {
    let annulus = PlanarDomain::annulus(0.3).unwrap();
    let env = Arc::new(enveloping_domain(&annulus).unwrap());
    let map = RiemannMap::compute(env.clone(), env.base_point()).unwrap();
    let deltas = [1e-1, 10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5), 1e-3];
    let est: Vec<SqueezingEstimate> = deltas
        .iter()
        .map(|d| squeezing_lower_bound(&annulus, c(1.0 - d, 0.0), &map).unwrap())
        .collect();
    let monotone = est.windows(2).all(|w| w[1].lower_bound >= w[0].lower_bound);
    let identity = est
        .iter()
        .all(|s| s.lower_bound == s.disk_gap.unwrap().tanh());
    let last = est.last().unwrap().lower_bound;
    verdict(
        8,
        "squeezing tends to 1 at the outer circle",
        monotone && identity && last >= 0.99,
        format!("monotone {monotone}, tanh identity {identity}, bound {last:.5} at delta 1e-3"),
    );
}

#[test]
fn criterion_09_localization() {
    let d = PlanarDomain::disk();
    let u = Rect::new(c(0.2, -2.0), c(2.0, 2.0));
    let w = Rect::new(c(0.6, -1.5), c(1.5, 1.5));
    let local = restrict_to_rectangle(&d, &u).unwrap();
    let mut est = Vec::new();
    for h in [1.0 / 128.0, 1.0 / 256.0] {
        let g = engine(d.clone(), h, MethodChoice::Auto);
        let l = engine(local.clone(), h, MethodChoice::Auto);
        est.push(localization_constant(&g, &l, &u, &w, 50, DEFAULT_SEED).unwrap());
    }
    let violations: usize = est.iter().map(|e| e.left_violations).sum();
    let excess = est
        .iter()
        .map(|e| e.left_excess)
        .fold(f64::NEG_INFINITY, f64::max);
    let change = (est[1].c_hat / est[0].c_hat - 1.0).abs();
    verdict(
        9,
        "localization of the metric near 1",
        violations == 0 && change <= 0.1,
        format!(
            "left excess {excess:.2e}, C {:.4} then {:.4} ({:.1e} change)",
            est[0].c_hat, est[1].c_hat, change
        ),
    );
}

fn worst_relative(field: &MetricField, exact: impl Fn(C64) -> f64) -> f64 {
    let grid = field.grid();
    let mut worst: f64 = 0.0;
    for k in 0..grid.len() {
        let (i, j) = grid.coords(k);
        let z = grid.node(i, j);
        if field.node_delta()[k] >= 0.05 && field.domain().inside(z) {
            worst = worst.max((field.node_log_density()[k].exp() / exact(z) - 1.0).abs());
        }
    }
    worst
}

#[test]
fn criterion_10_liouville_solver() {
    let h = 1.0 / 256.0;
    let disk = solve_metric_field(Arc::new(PlanarDomain::disk()), h, MethodChoice::Pde).unwrap();
    let disk_err = worst_relative(&disk, oracle::disk::density);
    let annulus = solve_metric_field(
        Arc::new(PlanarDomain::annulus(0.3).unwrap()),
        h,
        MethodChoice::Pde,
    )
    .unwrap();
    let annulus_err = worst_relative(&annulus, |z| oracle::annulus::density(0.3, z));
    let holed = PlanarDomain::new(DomainSpec::circle_domain(&[(c(0.4, 0.0), 0.2)])).unwrap();
    let holed = solve_metric_field(Arc::new(holed), h, MethodChoice::Pde).unwrap();
    let grid = holed.grid();
    let mut worst_drop: f64 = 0.0;
    for k in 0..grid.len() {
        let u = holed.node_log_density()[k];
        if u.is_finite() {
            let (i, j) = grid.coords(k);
            let lam = oracle::disk::density(grid.node(i, j));
            worst_drop = worst_drop.max(1.0 - u.exp() / lam);
        }
    }
    verdict(
        10,
        "Liouville fields against closed forms",
        disk_err <= 1e-2 && annulus_err <= 2e-2 && worst_drop <= 1e-3,
        format!(
            "disk {disk_err:.2e}, annulus {annulus_err:.2e}, Schwarz-Pick shortfall {worst_drop:.2e}"
        ),
    );
}

/// Four-point δ of a quadruple from its pairwise distances: half the gap
/// between the two largest of the three pair sums.
fn brute_force_delta(q: &[C64; 4]) -> f64 {
    let d = |i: usize, j: usize| oracle::disk::distance(q[i], q[j]);
    let mut s = [d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)];
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    0.5 * (s[0] - s[1])
}

#[test]
fn criterion_11_delta_hyperbolicity() {
    let e = disk();
    let line = [c(-0.8, 0.0), c(-0.3, 0.0), c(0.2, 0.0), c(0.7, 0.0)];
    let collinear = four_point_delta(e, &[line]).unwrap().delta_hat;
    let est = delta_hyperbolicity_estimate(e, 200, None, DEFAULT_SEED).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let pts = sample_region(e.domain(), None, SURVEY_MIN_DELTA, 800, &mut rng).unwrap();
    let reference = pts
        .chunks(4)
        .map(|q| brute_force_delta(&[q[0], q[1], q[2], q[3]]))
        .fold(f64::NEG_INFINITY, f64::max);
    let diff = (est.delta_hat - reference).abs();
    verdict(
        11,
        "four-point delta",
        collinear <= 1e-2 && diff <= 0.1,
        format!(
            "collinear {collinear:.2e}, disk {:.4} vs brute force {reference:.4}",
            est.delta_hat
        ),
    );
}

#[test]
fn criterion_12_reports_are_reproducible() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut names: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "scenario"))
        .collect();
    names.sort();
    let cache = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    let mut failing = Vec::new();
    for path in &names {
        let s = Scenario::load(path).unwrap();
        // First run fills the cache, the second reads from it.
        let opts = RunOptions {
            cache_dir: Some(cache.path().to_path_buf()),
            ..Default::default()
        };
        let (a, _) = execute_scenario(&s, &dir, &opts).unwrap();
        let (b, _) = execute_scenario(&s, &dir, &opts).unwrap();
        if a.to_json() != b.to_json() {
            differing.push(s.name.clone());
        }
        if !a.passed {
            failing.push(s.name.clone());
        }
    }
    verdict(
        12,
        "bundled scenarios reproduce byte-identical reports",
        names.len() == 6 && differing.is_empty() && failing.is_empty(),
        format!(
            "{} scenarios, differing {differing:?}, failing {failing:?}",
            names.len()
        ),
    );
}
