use std::sync::{Arc, OnceLock};

use horolab_core::asymptotics::*;
use horolab_core::conformal::RiemannMap;
use horolab_core::domain::{DomainSpec, PlanarDomain};
use horolab_core::metric::{
    solve_metric_field, GeodesicPath, MethodChoice, MetricEngine, PathKind, DEFAULT_SEED,
};
use horolab_core::{Error, C64};
use horolab_oracles as oracle;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn engine(domain: PlanarDomain, h: f64) -> MetricEngine {
    let field = solve_metric_field(Arc::new(domain), h, MethodChoice::Auto).unwrap();
    MetricEngine::new(Arc::new(field))
}

fn disk() -> &'static MetricEngine {
    static E: OnceLock<MetricEngine> = OnceLock::new();
    E.get_or_init(|| engine(PlanarDomain::disk(), 1.0 / 256.0))
}

fn slit() -> &'static MetricEngine {
    static E: OnceLock<MetricEngine> = OnceLock::new();
    E.get_or_init(|| engine(PlanarDomain::slit_disk(), 1.0 / 128.0))
}

fn annulus() -> &'static MetricEngine {
    static E: OnceLock<MetricEngine> = OnceLock::new();
    E.get_or_init(|| engine(PlanarDomain::annulus(0.3).unwrap(), 1.0 / 128.0))
}

fn ray(e: &MetricEngine, o: C64, target: C64, t_max: f64) -> GeodesicPath {
    let p = e.domain().locate_boundary_point(target, None).unwrap();
    e.geodesic_ray(o, &p, t_max).unwrap()
}

fn disk_ray(o: C64, target: C64, t_max: f64) -> &'static GeodesicPath {
    static CACHE: OnceLock<std::sync::Mutex<Vec<(C64, C64, f64, &'static GeodesicPath)>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut v = cache.lock().unwrap();
    if let Some(r) = v.iter().find(|r| r.0 == o && r.1 == target && r.2 == t_max) {
        return r.3;
    }
    let r: &'static GeodesicPath = Box::leak(Box::new(ray(disk(), o, target, t_max)));
    v.push((o, target, t_max, r));
    r
}

fn probes(e: &MetricEngine) -> ProbeSet {
    ProbeSet::default_for(e.domain(), DEFAULT_SEED).unwrap()
}

#[test]
fn gromov_product_examples() {
    let e = disk();
    let (o, x, y) = (c(0.0, 0.0), c(0.4, 0.3), c(-0.2, 0.5));
    assert!((gromov_product(e, o, x, x).unwrap() - e.distance(o, x).unwrap()).abs() < 1e-12);
    assert_eq!(gromov_product(e, o, o, y).unwrap(), 0.0);
    let g = gromov_product(e, o, c(0.9, 0.0), c(-0.9, 0.0)).unwrap();
    assert!(g.abs() <= 0.05);
    let g = gromov_product(e, o, x, y).unwrap();
    assert!((g - oracle::disk::gromov(x, y)).abs() <= 1e-2);
}

#[test]
fn probe_sets_are_seeded_and_interior() {
    let d = PlanarDomain::square();
    let p = ProbeSet::default_for(&d, DEFAULT_SEED).unwrap();
    assert_eq!(p.len(), 24);
    assert_eq!(p.base_point(), d.base_point());
    assert!(p.points[1..]
        .iter()
        .all(|&z| d.inside(z) && d.boundary_distance(z) >= 0.1));
    assert_eq!(p, ProbeSet::default_for(&d, DEFAULT_SEED).unwrap());
    assert_ne!(p, ProbeSet::default_for(&d, DEFAULT_SEED + 1).unwrap());
}

#[test]
fn psi_samples() {
    let e = disk();
    let pr = probes(e);
    let s = psi_sample(e, c(0.3, -0.6), &pr).unwrap();
    assert_eq!(s.base_value(), 0.0);
    assert!(lipschitz_excess(e, &s).unwrap() <= Thresholds::default().lipschitz_slack);
    let at_base = psi_sample(e, pr.base_point(), &pr).unwrap();
    for (v, &y) in at_base.values.iter().zip(&pr.points) {
        assert!((v - e.distance(pr.base_point(), y).unwrap()).abs() < 1e-12);
    }
    assert!(matches!(
        psi_sample(e, c(1.2, 0.0), &pr),
        Err(Error::OutsideDomain(_))
    ));
}

#[test]
fn disk_busemann_function() {
    let e = disk();
    let pr = probes(e);
    let r = disk_ray(c(0.0, 0.0), c(1.0, 0.0), 6.0);
    let th = Thresholds::default();
    let it = busemann_iterates(e, r, &pr, &default_schedule(6.0)).unwrap();
    assert!(it.max_increase <= th.monotone_slack);
    let b = busemann_eval(e, r, &pr, &default_schedule(6.0), &th).unwrap();
    // The ray starts at the base point, where the limit vanishes.
    assert!(b.base_offset.abs() <= 1e-2);
    let base = oracle::disk::busemann(0.0, pr.base_point());
    for (v, &y) in b.values.iter().zip(&pr.points) {
        assert!((v - (oracle::disk::busemann(0.0, y) - base)).abs() <= 2e-2);
    }
    assert!(lipschitz_excess(e, &b).unwrap() <= th.lipschitz_slack);
    // Real probes, as in the closed-form example.
    let real = ProbeSet::new(vec![
        c(0.0, 0.0),
        c(-0.8, 0.0),
        c(-0.3, 0.0),
        c(0.5, 0.0),
        c(0.9, 0.0),
    ])
    .unwrap();
    let b = busemann_eval(e, r, &real, &default_schedule(6.0), &th).unwrap();
    for (v, &y) in b.values.iter().zip(&real.points) {
        let exact = 0.5 * ((1.0 - y.re).powi(2) / (1.0 - y.re * y.re)).ln();
        assert!((v - exact).abs() <= 2e-2);
    }
}

#[test]
fn busemann_needs_a_ray() {
    let e = disk();
    let seg = e.geodesic(c(0.0, 0.0), c(0.5, 0.0)).unwrap();
    assert!(matches!(
        busemann_eval(e, &seg, &probes(e), &[0.1, 0.2], &Thresholds::default()),
        Err(Error::Precondition(_))
    ));
    let r = disk_ray(c(0.0, 0.0), c(1.0, 0.0), 6.0);
    assert!(busemann_iterates(e, r, &probes(e), &[1.0, 7.0]).is_err());
}

#[test]
fn identical_rays_have_no_gap() {
    let e = disk();
    let r = disk_ray(c(0.0, 0.0), c(1.0, 0.0), 6.0);
    let rep = asymptoticity_test(e, r, r, &default_schedule(6.0), &Thresholds::default()).unwrap();
    assert_eq!(rep.sup_gap, 0.0);
    assert!(rep.asymptotic);
}

#[test]
fn opposite_rays_are_not_asymptotic() {
    let e = disk();
    let a = disk_ray(c(0.0, 0.0), c(1.0, 0.0), 6.0);
    let b = disk_ray(c(0.0, 0.0), c(-1.0, 0.0), 6.0);
    let th = Thresholds::default();
    let rep =
        strong_asymptoticity_test(e, a, b, &default_schedule(6.0), &default_shift_grid(), &th)
            .unwrap();
    assert!(!rep.asymptotic && rep.unbounded);
    let n = rep.gaps.len();
    assert!(rep.gaps[n - 1] - rep.gaps[n - 1 - n / 3] >= 1.0);
    for (g, &t) in rep.gaps.iter().zip(&rep.schedule) {
        assert!((g - 2.0 * t).abs() <= 2e-2 * t);
    }
    assert_eq!(rep.strongly_asymptotic, Some(false));
}

#[test]
fn rays_to_one_point_are_strongly_asymptotic() {
    let e = disk();
    let th = Thresholds::default();
    let a = disk_ray(c(0.0, 0.0), c(1.0, 0.0), 7.0);
    let b = disk_ray(c(0.0, 0.3), c(1.0, 0.0), 7.0);
    let rep =
        strong_asymptoticity_test(e, a, b, &default_schedule(6.0), &default_shift_grid(), &th)
            .unwrap();
    assert!(rep.asymptotic);
    assert_eq!(rep.strongly_asymptotic, Some(true));
    assert!(*rep.shifted_tail.last().unwrap() <= th.strong_tail);
    // The shift is the difference of the Busemann values of the two origins.
    let expected =
        oracle::disk::busemann(0.0, c(0.0, 0.3)) - oracle::disk::busemann(0.0, c(0.0, 0.0));
    assert!(
        (rep.best_shift.unwrap() - expected).abs() <= 2e-2,
        "{rep:?}"
    );
    let pr = probes(e);
    let ba = busemann_eval(e, a, &pr, &default_schedule(6.0), &th).unwrap();
    let bb = busemann_eval(e, b, &pr, &default_schedule(6.0), &th).unwrap();
    assert!(ba.gap(&bb).unwrap() <= th.strong_tail);
}

#[test]
fn shifted_copy_recovers_the_shift() {
    let e = disk();
    let a = disk_ray(c(0.0, 0.0), c(0.0, 1.0), 7.0);
    let l = a.parameter_length();
    let mut b = a.reversed().truncated(l - 0.5).reversed();
    b.kind = PathKind::Ray;
    let rep = strong_asymptoticity_test(
        e,
        a,
        &b,
        &default_schedule(6.0),
        &default_shift_grid(),
        &Thresholds::default(),
    )
    .unwrap();
    assert!((rep.best_shift.unwrap() + 0.5).abs() <= 1e-2);
    assert!(*rep.shifted_tail.last().unwrap() <= 1e-2);
}

#[test]
fn horofunction_limit_matches_busemann() {
    let e = disk();
    let pr = probes(e);
    let th = Thresholds::default();
    let target = e.domain().locate_boundary_point(c(1.0, 0.0), None).unwrap();
    let seq = e.domain().approach_sequence(&target, 10, 0.25).unwrap();
    let lim = horofunction_limit(e, &seq, &pr, &th).unwrap();
    assert!(lim.converged);
    let b = busemann_eval(
        e,
        disk_ray(c(0.0, 0.0), c(1.0, 0.0), 6.0),
        &pr,
        &default_schedule(6.0),
        &th,
    )
    .unwrap();
    assert!(lim.gap(&b).unwrap() <= 3e-2);
    assert!(lipschitz_excess(e, &lim).unwrap() <= th.lipschitz_slack);

    let x = c(0.2, 0.7);
    let constant = e.domain().custom_approach(&target, vec![x]).unwrap();
    let lim = horofunction_limit(e, &constant, &pr, &th).unwrap();
    assert_eq!(lim.values, psi_sample(e, x, &pr).unwrap().values);
}

/// Busemann function of the slit disk at the upper or lower side of 0.5,
/// pulled back from the half-plane.
fn slit_busemann(upper: bool, y: C64) -> f64 {
    let (a, b) = oracle::slit_disk::slit_images(0.5);
    oracle::half_plane::busemann(
        if upper { a } else { b },
        oracle::slit_disk::to_half_plane(y).0,
    )
}

#[test]
fn slit_disk_has_two_limits() {
    let e = slit();
    let pr = probes(e);
    let th = Thresholds::default();
    let mut samples = Vec::new();
    for (upper, side) in [(true, c(0.0, 1.0)), (false, c(0.0, -1.0))] {
        let p = e
            .domain()
            .locate_boundary_point(c(0.5, 0.0), Some(side))
            .unwrap();
        let seq = e.domain().approach_sequence(&p, 10, 0.25).unwrap();
        let s = horofunction_limit(e, &seq, &pr, &th).unwrap();
        assert!(s.converged);
        let base = slit_busemann(upper, pr.base_point());
        for (v, &y) in s.values.iter().zip(&pr.points) {
            assert!((v - (slit_busemann(upper, y) - base)).abs() <= 2e-2);
        }
        samples.push(s);
    }
    assert!(samples[0].gap(&samples[1]).unwrap() >= th.separation);

    // Alternating sides never settle.
    let p = e
        .domain()
        .locate_boundary_point(c(0.5, 0.0), Some(c(0.0, 1.0)))
        .unwrap();
    let pts = (0..8)
        .map(|k| {
            c(
                0.5,
                0.25 * 0.5f64.powi(k) * if k % 2 == 0 { 1.0 } else { -1.0 },
            )
        })
        .collect();
    let seq = e.domain().custom_approach(&p, pts).unwrap();
    let s = horofunction_limit(e, &seq, &pr, &th).unwrap();
    assert!(!s.converged);
    assert!(s.cauchy_gap >= th.separation);
}

#[test]
fn squeezing_bounds_on_the_annulus() {
    let annulus = PlanarDomain::annulus(0.3).unwrap();
    let envelope = Arc::new(enveloping_domain(&annulus).unwrap());
    assert_eq!(envelope.components().len(), 1);
    let map = RiemannMap::compute(envelope, annulus.base_point()).unwrap();
    let s = squeezing_lower_bound(&annulus, c(0.99, 0.0), &map).unwrap();
    assert!(s.lower_bound >= 0.95);
    let exact = oracle::disk::distance(c(0.99, 0.0), c(0.3, 0.0));
    assert!((s.disk_gap.unwrap() - exact).abs() <= 1e-2);
    let mut last = 0.0;
    for k in 0..=8 {
        let delta = 10f64.powf(-1.0 - 0.25 * k as f64);
        let z = C64::from_polar(1.0 - delta, 0.7);
        let s = squeezing_lower_bound(&annulus, z, &map).unwrap();
        assert_eq!(s.lower_bound, s.disk_gap.unwrap().tanh());
        assert!(s.lower_bound >= last);
        last = s.lower_bound;
    }
    assert!(last >= 0.99);
    assert!(matches!(
        squeezing_lower_bound(&annulus, c(0.1, 0.0), &map),
        Err(Error::OutsideDomain(_))
    ));
}

#[test]
fn squeezing_without_holes_is_one() {
    let d = PlanarDomain::disk();
    let map = RiemannMap::compute(Arc::new(enveloping_domain(&d).unwrap()), c(0.0, 0.0)).unwrap();
    let s = squeezing_lower_bound(&d, c(0.3, 0.2), &map).unwrap();
    assert_eq!((s.lower_bound, s.disk_gap), (1.0, None));
    let slit = PlanarDomain::slit_disk();
    assert_eq!(enveloping_domain(&slit).unwrap().components().len(), 2);
    // A map of the wrong domain is refused.
    let square = PlanarDomain::square();
    let other = RiemannMap::compute(Arc::new(square), c(0.0, 0.0)).unwrap();
    let annulus = PlanarDomain::annulus(0.3).unwrap();
    assert!(matches!(
        squeezing_lower_bound(&annulus, c(0.6, 0.0), &other),
        Err(Error::Precondition(_))
    ));
}

/// Four-point δ from the sorted pair sums.
fn brute_force_delta(q: &[C64; 4]) -> f64 {
    let d = |i: usize, j: usize| oracle::disk::distance(q[i], q[j]);
    let mut s = [d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)];
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    0.5 * (s[0] - s[1])
}

#[test]
fn delta_hyperbolicity_of_the_disk() {
    let e = disk();
    let est = delta_hyperbolicity_estimate(e, 200, None, DEFAULT_SEED).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let pts =
        horolab_core::asymptotics::sample_region(e.domain(), None, 0.05, 800, &mut rng).unwrap();
    let exact = pts
        .chunks(4)
        .map(|q| brute_force_delta(&[q[0], q[1], q[2], q[3]]))
        .fold(0.0, f64::max);
    assert!(
        (est.delta_hat - exact).abs() <= 1e-1,
        "{} vs {exact}",
        est.delta_hat
    );
    assert!(est.delta_hat <= 0.8);
    assert_eq!(est.quadruples, 200);

    let line = [c(-0.7, 0.0), c(-0.2, 0.0), c(0.3, 0.0), c(0.75, 0.0)];
    assert!(four_point_delta(e, &[line]).unwrap().delta_hat <= 1e-2);
}

#[test]
fn visibility_of_antipodal_points() {
    let e = disk();
    let d = e.domain();
    let (p, q) = (
        d.locate_boundary_point(c(1.0, 0.0), None).unwrap(),
        d.locate_boundary_point(c(-1.0, 0.0), None).unwrap(),
    );
    let v = visibility_probe(e, c(0.0, 0.0), &p, &q, 8, 0.2).unwrap();
    assert_eq!(v.min_core_distance, 0.0);
    assert_eq!(v.max_core_distance, 0.0);
    assert!(v.gromov_sup <= 0.1);
    assert!(matches!(
        visibility_probe(e, c(0.0, 0.0), &p, &p, 8, 0.2),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn boundary_points_are_separated() {
    let e = disk();
    let d = e.domain();
    let (p, q) = (
        d.locate_boundary_point(c(1.0, 0.0), None).unwrap(),
        d.locate_boundary_point(c(-1.0, 0.0), None).unwrap(),
    );
    assert!(boundary_separation_test(e, &p, &q, 8).unwrap().liminf_hat >= 1.0);
    assert!(matches!(
        boundary_separation_test(e, &p, &p, 8),
        Err(Error::Precondition(_))
    ));

    let a = annulus();
    let outer = a.domain().locate_boundary_point(c(0.0, 1.0), None).unwrap();
    let inner = a
        .domain()
        .locate_boundary_point(c(0.0, -0.3), None)
        .unwrap();
    assert!(
        boundary_separation_test(a, &outer, &inner, 8)
            .unwrap()
            .liminf_hat
            > 0.1
    );
}

#[test]
fn localization_without_restriction_is_trivial() {
    let square = PlanarDomain::square();
    let u = Rect::new(c(-1.0, -1.0), c(1.0, 1.0));
    let w = Rect::new(c(-0.4, -0.4), c(0.4, 0.4));
    let local = restrict_to_rectangle(&square, &u).unwrap();
    assert_eq!(local.spec().components, square.spec().components);
    let g = engine(square, 1.0 / 128.0);
    let l = engine(local, 1.0 / 128.0);
    let est = localization_constant(&g, &l, &u, &w, 20, DEFAULT_SEED).unwrap();
    assert!(est.c_hat <= 1e-2);
    assert_eq!(est.left_violations, 0);
}

#[test]
fn localization_near_a_boundary_point() {
    let d = PlanarDomain::disk();
    let u = Rect::new(c(0.2, -2.0), c(2.0, 2.0));
    let w = Rect::new(c(0.6, -1.5), c(1.5, 1.5));
    let local = restrict_to_rectangle(&d, &u).unwrap();
    assert!(local.inside(c(0.5, 0.0)) && !local.inside(c(0.1, 0.0)));
    let l = engine(local, 1.0 / 128.0);
    let est = localization_constant(disk(), &l, &u, &w, 20, DEFAULT_SEED).unwrap();
    assert_eq!(est.left_violations, 0);
    assert!(est.c_hat > 0.0 && est.c_hat < 1.0, "{est:?}");
    assert!(localization_constant(disk(), &l, &w, &u, 20, DEFAULT_SEED).is_err());
}

#[test]
fn disconnected_restrictions_are_refused() {
    let mut spec = DomainSpec::jordan(&[
        c(-0.5, -0.5),
        c(0.5, -0.5),
        c(0.5, 0.5),
        c(0.2, 0.5),
        c(0.2, -0.2),
        c(-0.2, -0.2),
        c(-0.2, 0.5),
        c(-0.5, 0.5),
    ]);
    spec.base_point = [0.0, -0.35];
    let u_shape = PlanarDomain::new(spec).unwrap();
    let rect = Rect::new(c(-1.0, 0.0), c(1.0, 1.0));
    assert!(matches!(
        restrict_to_rectangle(&u_shape, &rect),
        Err(Error::UnsupportedTopology(_))
    ));
    let annulus = PlanarDomain::annulus(0.3).unwrap();
    let rect = Rect::new(c(0.0, -1.0), c(1.0, 1.0));
    assert!(matches!(
        restrict_to_rectangle(&annulus, &rect),
        Err(Error::UnsupportedTopology(_))
    ));
}
