use std::sync::{Arc, OnceLock};

use horolab_core::conformal::DiskAutomorphism;
use horolab_core::domain::{DomainSpec, PlanarDomain};
use horolab_core::metric::{
    density_at, hausdorff, solve_metric_field, GeodesicPath, Method, MethodChoice, MetricEngine,
    MetricField, PathKind, DEFAULT_SEED, OPTIMIZATION_TOLERANCE,
};
use horolab_core::{Error, C64};
use horolab_oracles as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn engine(domain: PlanarDomain, h: f64, method: MethodChoice) -> MetricEngine {
    let field = solve_metric_field(Arc::new(domain), h, method).unwrap();
    MetricEngine::new(Arc::new(field))
}

fn disk_engine() -> &'static MetricEngine {
    static E: OnceLock<MetricEngine> = OnceLock::new();
    E.get_or_init(|| engine(PlanarDomain::disk(), 1.0 / 256.0, MethodChoice::Auto))
}

fn square_engine() -> &'static MetricEngine {
    static E: OnceLock<MetricEngine> = OnceLock::new();
    E.get_or_init(|| engine(PlanarDomain::square(), 1.0 / 128.0, MethodChoice::Auto))
}

fn slit_engine() -> &'static MetricEngine {
    static E: OnceLock<MetricEngine> = OnceLock::new();
    E.get_or_init(|| engine(PlanarDomain::slit_disk(), 1.0 / 128.0, MethodChoice::Auto))
}

fn sample_points(
    domain: &PlanarDomain,
    n: usize,
    min_delta: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<C64> {
    let (lo, hi) = domain.bounding_box();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = c(rng.gen_range(lo.re..hi.re), rng.gen_range(lo.im..hi.im));
        if domain.inside(z) && domain.boundary_distance(z) >= min_delta {
            out.push(z);
        }
    }
    out
}

#[test]
fn densities_have_the_expected_normalisation() {
    let disk = Arc::new(PlanarDomain::disk());
    assert_eq!(
        density_at(&disk, c(0.0, 0.0), MethodChoice::Auto).unwrap(),
        1.0
    );
    assert!(
        (density_at(&disk, c(0.5, 0.0), MethodChoice::Auto).unwrap() - 4.0 / 3.0).abs() < 1e-14
    );
    let annulus = Arc::new(PlanarDomain::annulus(0.3).unwrap());
    for z in [c(0.3f64.sqrt(), 0.0), c(0.0, -0.5), c(0.6, 0.7)] {
        let got = density_at(&annulus, z, MethodChoice::Auto).unwrap();
        assert!((got / oracle::annulus::density(0.3, z) - 1.0).abs() < 1e-6);
    }
    let square = Arc::new(PlanarDomain::square());
    let z = c(0.2, -0.1);
    let got = density_at(&square, z, MethodChoice::Auto).unwrap();
    assert!((got / oracle::square::density(z) - 1.0).abs() < 1e-3);
    let holed =
        Arc::new(PlanarDomain::new(DomainSpec::circle_domain(&[(c(0.4, 0.0), 0.2)])).unwrap());
    assert!(matches!(
        density_at(&holed, c(-0.3, 0.0), MethodChoice::Auto),
        Err(Error::NeedsField(_))
    ));
    assert!(matches!(
        density_at(&disk, c(1.5, 0.0), MethodChoice::Auto),
        Err(Error::OutsideDomain(_))
    ));
}

fn worst_relative(field: &MetricField, exact: impl Fn(C64) -> f64) -> f64 {
    let grid = field.grid();
    let mut worst: f64 = 0.0;
    for k in 0..grid.len() {
        let (i, j) = grid.coords(k);
        let z = grid.node(i, j);
        if field.node_delta()[k] >= 0.05 && field.domain().inside(z) {
            let lam = field.node_log_density()[k].exp();
            worst = worst.max((lam / exact(z) - 1.0).abs());
        }
    }
    worst
}

#[test]
fn liouville_fields_match_closed_forms() {
    let disk = Arc::new(PlanarDomain::disk());
    let field = solve_metric_field(disk, 1.0 / 256.0, MethodChoice::Pde).unwrap();
    assert_eq!(field.method(), Method::LiouvillePde);
    assert!(field.residual().unwrap() < 1e-6);
    assert!(worst_relative(&field, oracle::disk::density) <= 1e-2);
    let z = c(0.31, -0.42);
    assert!((field.density(z).unwrap() / oracle::disk::density(z) - 1.0).abs() <= 1e-2);

    let annulus = Arc::new(PlanarDomain::annulus(0.3).unwrap());
    let field = solve_metric_field(annulus, 1.0 / 256.0, MethodChoice::Pde).unwrap();
    assert!(worst_relative(&field, |z| oracle::annulus::density(0.3, z)) <= 2e-2);
}

#[test]
fn removing_a_hole_only_increases_the_density() {
    let holed =
        Arc::new(PlanarDomain::new(DomainSpec::circle_domain(&[(c(0.4, 0.0), 0.2)])).unwrap());
    let field = solve_metric_field(holed, 1.0 / 256.0, MethodChoice::Auto).unwrap();
    assert_eq!(field.method(), Method::LiouvillePde);
    let grid = field.grid();
    let mut violations = 0;
    for k in 0..grid.len() {
        let u = field.node_log_density()[k];
        if u.is_finite() {
            let (i, j) = grid.coords(k);
            let disk = oracle::disk::density(grid.node(i, j));
            if u.exp() < disk * (1.0 - 1e-3) {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn field_dump_round_trips() {
    let domain = Arc::new(PlanarDomain::annulus(0.5).unwrap());
    let field = solve_metric_field(domain.clone(), 1.0 / 32.0, MethodChoice::Pde).unwrap();
    let bytes = field.to_bytes();
    let back = MetricField::from_bytes(&bytes, domain, None).unwrap();
    assert_eq!(back.method(), Method::LiouvillePde);
    assert_eq!(back.residual(), field.residual());
    let z = c(0.1, 0.7);
    assert_eq!(back.density(z), field.density(z));
    let other = Arc::new(PlanarDomain::disk());
    assert!(MetricField::from_bytes(&bytes, other, None).is_err());
}

#[test]
fn pde_needs_a_connected_grid() {
    let thin = Arc::new(PlanarDomain::annulus(0.9).unwrap());
    assert!(matches!(
        solve_metric_field(thin, 0.2, MethodChoice::Pde),
        Err(Error::Resolution(_))
    ));
}

#[test]
fn disk_distances_match_the_closed_form() {
    let e = disk_engine();
    assert!((e.distance(c(0.0, 0.0), c(0.5, 0.0)).unwrap() - 0.5 * 3f64.ln()).abs() < 1e-2);
    assert_eq!(e.distance(c(0.2, 0.1), c(0.2, 0.1)).unwrap(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let pts = sample_points(e.domain(), 200, 0.05, &mut rng);
    for p in pts.chunks(2) {
        let (z, w) = (p[0], p[1]);
        let k = e.distance(z, w).unwrap();
        let exact = oracle::disk::distance(z, w);
        assert!((k / exact - 1.0).abs() <= 1e-2, "{z} {w}: {k} vs {exact}");
        assert!((e.distance(w, z).unwrap() - k).abs() <= 1e-6);
    }
}

#[test]
fn disk_distances_are_mobius_invariant() {
    let e = disk_engine();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 1);
    let pts = sample_points(e.domain(), 20, 0.05, &mut rng);
    for t in [
        DiskAutomorphism::new(c(0.3, -0.2), 0.7).unwrap(),
        DiskAutomorphism::to_origin(c(-0.4, 0.1)).unwrap(),
    ] {
        for p in pts.chunks(2) {
            let (a, b) = (t.eval(p[0]), t.eval(p[1]));
            if e.domain()
                .boundary_distance(a)
                .min(e.domain().boundary_distance(b))
                < 0.05
            {
                continue;
            }
            let d0 = e.distance(p[0], p[1]).unwrap();
            let d1 = e.distance(a, b).unwrap();
            assert!((d0 - d1).abs() <= 1e-2);
        }
    }
}

#[test]
fn pde_distances_on_the_disk() {
    let e = engine(PlanarDomain::disk(), 1.0 / 128.0, MethodChoice::Pde);
    for (z, w) in [
        (c(0.0, 0.0), c(0.5, 0.0)),
        (c(-0.3, 0.6), c(0.4, -0.5)),
        (c(0.8, 0.1), c(0.1, 0.8)),
    ] {
        let k = e.distance(z, w).unwrap();
        assert!((k / oracle::disk::distance(z, w) - 1.0).abs() <= 1e-2);
    }
}

#[test]
fn square_distances_match_schwarz_christoffel() {
    let e = square_engine();
    for (z, w) in [
        (c(0.0, 0.0), c(0.3, 0.2)),
        (c(-0.4, -0.4), c(0.4, 0.4)),
        (c(-0.45, 0.3), c(0.45, 0.3)),
    ] {
        let k = e.distance(z, w).unwrap();
        assert!((k / oracle::square::distance(z, w) - 1.0).abs() <= 1e-2);
    }
}

#[test]
fn triangle_inequality_on_seeded_triples() {
    let e = square_engine();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let pts = sample_points(e.domain(), 60, 0.05, &mut rng);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let (a, b, d) = (
            rng.gen_range(0..60),
            rng.gen_range(0..60),
            rng.gen_range(0..60),
        );
        let (x, y, z) = (pts[a], pts[b], pts[d]);
        let v = e.distance(x, z).unwrap() - e.distance(x, y).unwrap() - e.distance(y, z).unwrap();
        worst = worst.max(v);
    }
    assert!(worst <= 1e-3, "worst violation {worst}");
}

#[test]
fn smaller_domains_have_larger_distances() {
    let holed = engine(
        PlanarDomain::new(DomainSpec::circle_domain(&[(c(0.4, 0.0), 0.2)])).unwrap(),
        1.0 / 128.0,
        MethodChoice::Auto,
    );
    let disk = disk_engine();
    for (z, w) in [
        (c(-0.5, 0.0), c(0.0, 0.5)),
        (c(0.4, 0.4), c(0.4, -0.4)),
        (c(0.85, 0.0), c(-0.2, -0.3)),
    ] {
        assert!(disk.distance(z, w).unwrap() <= holed.distance(z, w).unwrap() + 1e-2);
    }
}

#[test]
fn slit_sides_are_far_apart() {
    let e = slit_engine();
    let (z, w) = (c(0.5, 0.05), c(0.5, -0.05));
    let path = e.geodesic(z, w).unwrap();
    assert!(path.length >= 2.0 * oracle::disk::distance(z, w));
    assert!((path.length / oracle::slit_disk::distance(z, w) - 1.0).abs() <= 1e-2);
    // The path goes around the tip at 0 and never crosses the slit.
    assert!(path.vertices.iter().any(|v| v.re < 0.0));
    for s in path.vertices.windows(2) {
        assert!(!e.domain().segment_hits_boundary(s[0], s[1]));
        assert!(e.domain().inside(s[1]));
    }
}

#[test]
fn diameter_is_straight_and_unit_speed() {
    let e = disk_engine();
    let path = e.geodesic(c(-0.5, 0.0), c(0.5, 0.0)).unwrap();
    assert_eq!(path.kind, PathKind::Segment);
    assert!(path.vertices.iter().all(|v| v.im.abs() <= 1e-3));
    assert!(path.length >= e.distance(c(-0.5, 0.0), c(0.5, 0.0)).unwrap() - 1e-12);
    for s in [0.1, 0.4, 0.77, 1.0] {
        let k = e.distance(path.start(), path.point_at(s)).unwrap();
        assert!((k - s).abs() <= 1e-2);
    }
    let table = &path.parameter_table;
    for (i, d) in path.segment_density.iter().enumerate() {
        let step =
            (path.vertices[i + 1] - path.vertices[i]).norm() * (d[0] + 4.0 * d[1] + d[2]) / 6.0;
        assert!(((table[i + 1] - table[i]) - step).abs() <= 1e-6 * step);
    }
}

#[test]
fn geodesics_are_additive_along_themselves() {
    let e = square_engine();
    let path = e.geodesic(c(-0.4, 0.1), c(0.3, -0.35)).unwrap();
    let l = path.parameter_length();
    let (a, b, d) = (
        path.point_at(0.1 * l),
        path.point_at(0.45 * l),
        path.point_at(0.9 * l),
    );
    let sum = e.distance(a, b).unwrap() + e.distance(b, d).unwrap();
    assert!((sum - e.distance(a, d).unwrap()).abs() <= 1e-2);
}

#[test]
fn truncation_and_reversal_preserve_the_trace() {
    let e = square_engine();
    let path = e.geodesic(c(-0.3, 0.2), c(0.35, -0.1)).unwrap();
    let head = path.truncated(0.6 * path.length);
    assert!((head.length - 0.6 * path.length).abs() < 1e-12);
    assert!((head.point_at(0.3) - path.point_at(0.3)).norm() < 1e-12);
    assert!((head.end() - path.point_at(0.6 * path.length)).norm() < 1e-12);
    let back = path.reversed();
    assert!((back.point_at(0.25) - path.point_at(path.length - 0.25)).norm() < 1e-9);
}

#[test]
fn disk_ray_follows_tanh() {
    let e = disk_engine();
    let target = e.domain().locate_boundary_point(c(1.0, 0.0), None).unwrap();
    let ray = e.geodesic_ray(c(0.0, 0.0), &target, 6.0).unwrap();
    assert_eq!(ray.kind, PathKind::Ray);
    assert_eq!(ray.landing.unwrap().coordinate, c(1.0, 0.0));
    for k in 0..=30 {
        let t = 0.1 * k as f64;
        assert!((ray.point_at(t) - c(t.tanh(), 0.0)).norm() <= 1e-2);
    }
    let end = (ray.point_at(6.0) - target.coordinate).norm();
    for k in 0..60 {
        assert!(end <= (ray.point_at(0.1 * k as f64) - target.coordinate).norm());
    }
}

#[test]
fn slit_rays_depend_on_the_side() {
    // Both rays land at 0.5, so the final thirds separate only for moderate
    // lengths: the exact gap is about 0.19 at length 3 and 0.003 at length 6.
    let e = slit_engine();
    let o = c(-0.5, 0.0);
    let mut tails = Vec::new();
    for side in [c(0.0, 1.0), c(0.0, -1.0)] {
        let target = e
            .domain()
            .locate_boundary_point(c(0.5, 0.0), Some(side))
            .unwrap();
        let ray = e.geodesic_ray(o, &target, 3.0).unwrap();
        tails.push(
            (0..=100)
                .map(|k| ray.point_at(2.0 + 0.01 * k as f64))
                .collect::<Vec<_>>(),
        );
    }
    let gap = hausdorff(&tails[0], &tails[1]);
    assert!(gap >= 0.05);
    let exact: Vec<Vec<C64>> = [true, false]
        .iter()
        .map(|&upper| slit_oracle_ray(o, upper, 2.0, 3.0))
        .collect();
    assert!((gap - hausdorff(&exact[0], &exact[1])).abs() <= 1e-2);
    for (a, b) in tails.iter().zip(&exact) {
        assert!(hausdorff(a, b) <= 1e-2);
    }
}

/// Points of the exact slit-disk ray from `o` to the given side of 0.5,
/// pulled back from the straight ray in the disk picture.
fn slit_oracle_ray(o: C64, upper: bool, from: f64, to: f64) -> Vec<C64> {
    let (a, b) = oracle::slit_disk::slit_images(0.5);
    let theta = oracle::slit_disk::boundary_angle(o, if upper { a } else { b });
    let ho = oracle::slit_disk::to_half_plane(o).0;
    (0..=100)
        .map(|k| {
            let t = from + (to - from) * k as f64 / 100.0;
            let w = C64::from_polar(t.tanh(), theta);
            let h = (ho - w * ho.conj()) / (1.0 - w);
            let d = (h * h - 4.0).sqrt();
            let s = [(-h + d) / 2.0, (-h - d) / 2.0]
                .into_iter()
                .find(|s| s.im > 0.0 && s.norm() < 1.0)
                .unwrap();
            s * s
        })
        .collect()
}

#[test]
fn ray_needs_a_long_enough_sequence() {
    let e = disk_engine();
    let target = e.domain().locate_boundary_point(c(0.0, 1.0), None).unwrap();
    let seq = e.domain().approach_sequence(&target, 3, 0.5).unwrap();
    let err = e
        .geodesic_ray_along(c(0.0, 0.0), &seq, 6.0, &Default::default())
        .unwrap_err();
    assert!(matches!(err, Error::Convergence(_)));
}

#[test]
fn quasi_geodesic_certificates() {
    let e = square_engine();
    let path = e.geodesic(c(-0.35, -0.3), c(0.4, 0.25)).unwrap();
    let cert = e
        .quasi_geodesic_check(&path, 1.0, 2.0 * OPTIMIZATION_TOLERANCE, 200, DEFAULT_SEED)
        .unwrap();
    assert!(cert.is_valid(), "{cert:?}");
    assert_eq!(cert.checked_pairs, 200);
    let slow = path.with_speed(0.5);
    assert!((slow.parameter_length() - 2.0 * path.length).abs() < 1e-12);
    let cert = e
        .quasi_geodesic_check(&slow, 2.0, 0.01, 200, DEFAULT_SEED)
        .unwrap();
    assert!(cert.is_valid());
}

#[test]
fn doubled_back_path_is_not_quasi_geodesic() {
    let e = disk_engine();
    // 0 -> tanh(0.5) -> 0 has intrinsic length 1.
    let r = 0.5f64.tanh();
    let path: GeodesicPath = e
        .path_through(&[c(0.0, 0.0), c(r, 0.0), c(0.0, 0.0)])
        .unwrap();
    assert!((path.length - 1.0).abs() < 1e-3);
    let cert = e
        .quasi_geodesic_check(&path, 1.0, 0.1, 2000, DEFAULT_SEED)
        .unwrap();
    assert!(!cert.is_valid());
    assert!(cert.worst_violation >= 0.8, "{cert:?}");
}

#[test]
fn transport_requires_simple_connectivity() {
    let annulus = Arc::new(PlanarDomain::annulus(0.3).unwrap());
    assert!(matches!(
        solve_metric_field(annulus, 1.0 / 64.0, MethodChoice::Transport),
        Err(Error::UnsupportedTopology(_))
    ));
}
