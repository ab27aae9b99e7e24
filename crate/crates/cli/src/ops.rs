use std::sync::Arc;

use horolab_core::asymptotics::{
    asymptoticity_test, boundary_separation_test, busemann_eval, busemann_iterates,
    default_schedule, default_shift_grid, delta_hyperbolicity_estimate, enveloping_domain,
    four_point_delta, gromov_product, horofunction_limit, localization_constant,
    restrict_to_rectangle, squeezing_lower_bound, strong_asymptoticity_test, visibility_probe,
    HorofunctionSample, ProbeSet, Thresholds,
};
use horolab_core::domain::{ApproachSequence, BoundaryPoint, PlanarDomain};
use horolab_core::metric::{GeodesicPath, MetricEngine};
use horolab_core::C64;
use serde_json::{json, Value};

use crate::error::CliResult;
use crate::lab::{point, Lab};
use crate::report::Verdict;
use crate::scenario::{Approach, LevelsetSpec, Operation, Point, RaySpec, Target};

fn at_most(name: &str, value: f64, threshold: f64) -> Verdict {
    Verdict {
        name: name.into(),
        passed: value <= threshold,
        value: Some(value),
        threshold: Some(threshold),
    }
}

fn at_least(name: &str, value: f64, threshold: f64) -> Verdict {
    Verdict {
        name: name.into(),
        passed: value >= threshold,
        value: Some(value),
        threshold: Some(threshold),
    }
}

fn expect_flag(name: &str, actual: bool, expected: bool) -> Verdict {
    Verdict {
        name: name.into(),
        passed: actual == expected,
        value: Some(if actual { 1.0 } else { 0.0 }),
        threshold: Some(if expected { 1.0 } else { 0.0 }),
    }
}

fn boundary_point(domain: &PlanarDomain, t: &Target) -> CliResult<BoundaryPoint> {
    Ok(domain.locate_boundary_point(point(t.at), t.side.map(point))?)
}

fn origin(lab: &Lab, o: Option<Point>) -> C64 {
    o.map(point).unwrap_or_else(|| lab.domain.base_point())
}

/// Build the interior sequence described by `approach`.
pub fn approach_sequence(
    domain: &PlanarDomain,
    target: &Target,
    approach: &Approach,
) -> CliResult<ApproachSequence> {
    let p = boundary_point(domain, target)?;
    let dyadic = |n: usize, d0: f64, dir: &dyn Fn(usize) -> C64| -> Vec<C64> {
        (0..n)
            .map(|k| p.coordinate + dir(k) * (d0 * 0.5f64.powi(k as i32)))
            .collect()
    };
    let nu = match p.side_hint {
        Some(s) => s,
        None => domain.components()[p.component].inward_normal(p.parameter),
    };
    let seq = match *approach {
        Approach::Radial { n, d0 } => domain.approach_sequence(&p, n, d0)?,
        Approach::Oblique { n, d0, slant } => {
            let dir = nu + nu * C64::i() * slant;
            let dir = dir / dir.norm();
            domain.custom_approach(&p, dyadic(n, d0, &|_| dir))?
        }
        Approach::Alternating { n, d0 } => {
            if p.side_hint.is_none() {
                return Err(horolab_core::Error::Precondition(
                    "an alternating approach needs a side hint".into(),
                )
                .into());
            }
            let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            domain.custom_approach(&p, dyadic(n, d0, &|k| nu * sign(k)))?
        }
        Approach::Points { ref points } => {
            domain.custom_approach(&p, points.iter().copied().map(point).collect())?
        }
    };
    Ok(seq)
}

fn ray(lab: &Lab, engine: &MetricEngine, spec: &RaySpec, t_max: f64) -> CliResult<GeodesicPath> {
    let target = boundary_point(&lab.domain, &spec.target)?;
    Ok(engine.geodesic_ray(origin(lab, spec.origin), &target, t_max)?)
}

fn polyline(label: &str, path: &GeodesicPath, t_max: f64) -> Value {
    let cut = if path.parameter_length() > t_max {
        path.truncated(t_max)
    } else {
        path.clone()
    };
    json!({ "label": label, "vertices": cut.vertices })
}

fn probes(lab: &Lab, count: usize) -> CliResult<ProbeSet> {
    Ok(ProbeSet::seeded(
        &lab.domain,
        count,
        ProbeSet::DEFAULT_MIN_DELTA,
        lab.seed,
    )?)
}

/// Thresholds under which a Busemann evaluation never refuses; the
/// monotonicity check is reported as a verdict instead.
fn lenient(th: &Thresholds) -> Thresholds {
    Thresholds {
        monotone_slack: f64::INFINITY,
        ..*th
    }
}

fn levelset(
    lab: &Lab,
    engine: &MetricEngine,
    path: &GeodesicPath,
    schedule: &[f64],
    spec: &LevelsetSpec,
) -> CliResult<Value> {
    let (lo, hi) = lab.domain.bounding_box();
    let n = spec.n.max(2);
    let mut pts = vec![lab.domain.base_point()];
    for j in 0..n {
        for i in 0..n {
            let z = C64::new(
                lo.re + (hi.re - lo.re) * i as f64 / (n - 1) as f64,
                lo.im + (hi.im - lo.im) * j as f64 / (n - 1) as f64,
            );
            if lab.domain.inside(z) && lab.domain.boundary_distance(z) >= spec.min_delta {
                pts.push(z);
            }
        }
    }
    let probes = ProbeSet::new(pts)?;
    let s = busemann_eval(engine, path, &probes, schedule, &lenient(&lab.thresholds))?;
    Ok(json!({ "points": s.probes.points[1..], "values": s.values[1..] }))
}

fn sample_json(s: &HorofunctionSample) -> Value {
    json!({
        "values": s.values,
        "cauchy_gap": s.cauchy_gap,
        "converged": s.converged,
        "base_offset": s.base_offset,
        "source": s.source,
    })
}

/// Run one operation: its outputs and verdicts.
pub fn execute(lab: &Lab, op: &Operation) -> CliResult<(Value, Vec<Verdict>)> {
    if let Operation::Squeeze {
        points,
        expect_monotone,
        expect_final_min,
    } = op
    {
        return squeeze(lab, points, *expect_monotone, *expect_final_min);
    }
    let engine = lab.engine()?;
    let e = engine.as_ref();
    let th = &lab.thresholds;
    let mut verdicts = Vec::new();
    let outputs = match op {
        Operation::Distance {
            z,
            w,
            expect,
            rel_tol,
        } => {
            let d = e.distance(point(*z), point(*w))?;
            if let Some(x) = expect {
                verdicts.push(at_most(
                    "relative_error",
                    (d - x).abs() / x.abs().max(f64::MIN_POSITIVE),
                    *rel_tol,
                ));
            }
            json!({ "distance": d })
        }
        Operation::Gromov { o, x, y } => {
            let g = gromov_product(e, origin(lab, *o), point(*x), point(*y))?;
            json!({ "gromov_product": g })
        }
        Operation::Ray {
            origin: o,
            target,
            t_max,
        } => {
            let t = t_max.unwrap_or(lab.t_max);
            let spec = RaySpec {
                origin: *o,
                target: *target,
            };
            let r = ray(lab, e, &spec, t)?;
            json!({
                "landing": r.landing,
                "parameter_length": r.parameter_length(),
                "rays": [polyline("ray", &r, t)],
            })
        }
        Operation::Busemann {
            origin: o,
            target,
            t_max,
            probes: count,
            levelset: grid,
        } => {
            let t = t_max.unwrap_or(lab.t_max);
            let spec = RaySpec {
                origin: *o,
                target: *target,
            };
            let r = ray(lab, e, &spec, t)?;
            let schedule = default_schedule(t);
            let p = probes(lab, *count)?;
            let it = busemann_iterates(e, &r, &p, &schedule)?;
            verdicts.push(at_most(
                "monotone_iterates",
                it.max_increase,
                th.monotone_slack,
            ));
            let s = busemann_eval(e, &r, &p, &schedule, &lenient(th))?;
            let mut out = json!({
                "probes": p.points,
                "schedule": schedule,
                "max_increase": it.max_increase,
                "iterates": it.raw,
                "sample": sample_json(&s),
                "rays": [polyline("ray", &r, t)],
            });
            if let Some(g) = grid {
                out["levelset"] = levelset(lab, e, &r, &schedule, g)?;
            }
            out
        }
        Operation::RayPair {
            a,
            b,
            t_max,
            strong,
            compare_busemann,
            probes: count,
            expect_asymptotic,
            expect_strong,
        } => {
            let t = t_max.unwrap_or(lab.t_max);
            // Room for the largest shift of the strong test.
            let reach = t + 1.0;
            let ga = ray(lab, e, a, reach)?;
            let gb = ray(lab, e, b, reach)?;
            let schedule = default_schedule(t);
            let report = if *strong {
                strong_asymptoticity_test(e, &ga, &gb, &schedule, &default_shift_grid(), th)?
            } else {
                asymptoticity_test(e, &ga, &gb, &schedule, th)?
            };
            if let Some(x) = expect_asymptotic {
                verdicts.push(expect_flag("asymptotic", report.asymptotic, *x));
            }
            if let Some(x) = expect_strong {
                verdicts.push(expect_flag(
                    "strongly_asymptotic",
                    report.strongly_asymptotic.unwrap_or(false),
                    *x,
                ));
            }
            let mut out = json!({
                "report": report,
                "rays": [polyline("a", &ga, reach), polyline("b", &gb, reach)],
            });
            if *compare_busemann {
                let p = probes(lab, *count)?;
                let sa = busemann_eval(e, &ga, &p, &schedule, &lenient(th))?;
                let sb = busemann_eval(e, &gb, &p, &schedule, &lenient(th))?;
                let gap = sa.gap(&sb)?;
                verdicts.push(at_most("busemann_gap", gap, th.cauchy_gap));
                out["busemann"] = json!({
                    "probes": p.points,
                    "a": sample_json(&sa),
                    "b": sample_json(&sb),
                    "gap": gap,
                });
            }
            out
        }
        Operation::Limit {
            target,
            approach,
            probes: count,
            expect_converged,
        } => {
            let seq = approach_sequence(&lab.domain, target, approach)?;
            let p = probes(lab, *count)?;
            let s = horofunction_limit(e, &seq, &p, th)?;
            if let Some(x) = expect_converged {
                verdicts.push(expect_flag("converged", s.converged, *x));
            }
            json!({
                "sequence": seq.points,
                "probes": p.points,
                "sample": sample_json(&s),
            })
        }
        Operation::BoundaryMap {
            sequences,
            probes: count,
            gromov,
        } => {
            let p = probes(lab, *count)?;
            let base = lab.domain.base_point();
            let mut seqs = Vec::with_capacity(sequences.len());
            let mut samples = Vec::with_capacity(sequences.len());
            for s in sequences {
                let seq = approach_sequence(&lab.domain, &s.target, &s.approach)?;
                samples.push(horofunction_limit(e, &seq, &p, th)?);
                seqs.push(seq);
            }
            let mut pairs = Vec::new();
            let (mut same_max, mut distinct_min) = (None::<f64>, None::<f64>);
            let mut gromov_step = None::<f64>;
            for i in 0..samples.len() {
                for j in i + 1..samples.len() {
                    let gap = samples[i].gap(&samples[j])?;
                    let same = sequences[i].target == sequences[j].target;
                    let mut entry = json!({ "i": i, "j": j, "same_target": same, "gap": gap });
                    if same {
                        same_max = Some(same_max.map_or(gap, |m| m.max(gap)));
                        if *gromov {
                            let (x, y) = (&seqs[i].points, &seqs[j].points);
                            let n = x.len().min(y.len());
                            let products = (n.saturating_sub(3)..n)
                                .map(|k| gromov_product(e, base, x[k], y[k]))
                                .collect::<horolab_core::Result<Vec<_>>>()?;
                            let step = products
                                .windows(2)
                                .map(|w| w[1] - w[0])
                                .fold(f64::INFINITY, f64::min);
                            gromov_step = Some(gromov_step.map_or(step, |m| m.min(step)));
                            entry["gromov_tail"] = json!(products);
                        }
                    } else {
                        distinct_min = Some(distinct_min.map_or(gap, |m| m.min(gap)));
                    }
                    pairs.push(entry);
                }
            }
            let converged = samples.iter().all(|s| s.converged);
            verdicts.push(expect_flag("all_converged", converged, true));
            if let Some(m) = same_max {
                verdicts.push(at_most("same_point_gap", m, th.cauchy_gap));
            }
            if let Some(m) = distinct_min {
                verdicts.push(at_least("distinct_point_gap", m, th.separation));
            }
            if let Some(s) = gromov_step {
                verdicts.push(Verdict {
                    name: "gromov_increasing".into(),
                    passed: s > 0.0,
                    value: Some(s),
                    threshold: Some(0.0),
                });
            }
            json!({
                "probes": p.points,
                "samples": samples.iter().map(sample_json).collect::<Vec<_>>(),
                "pairs": pairs,
            })
        }
        Operation::Squeeze { .. } => unreachable!("handled above"),
        Operation::DeltaHyperbolicity {
            samples,
            region,
            quadruples,
            expect_max,
        } => {
            let est = match quadruples {
                Some(q) => {
                    let q: Vec<[C64; 4]> = q.iter().map(|q| q.map(point)).collect();
                    four_point_delta(e, &q)?
                }
                None => delta_hyperbolicity_estimate(e, *samples, region.as_ref(), lab.seed)?,
            };
            if let Some(m) = expect_max {
                verdicts.push(at_most("delta_hat", est.delta_hat, *m));
            }
            json!({ "estimate": est })
        }
        Operation::Visibility {
            xi1,
            xi2,
            n,
            core_delta,
            o,
            expect_core_max,
            expect_gromov_max,
        } => {
            let a = boundary_point(&lab.domain, xi1)?;
            let b = boundary_point(&lab.domain, xi2)?;
            let est = visibility_probe(e, origin(lab, *o), &a, &b, *n, *core_delta)?;
            if let Some(m) = expect_core_max {
                verdicts.push(at_most("core_distance", est.max_core_distance, *m));
            }
            if let Some(m) = expect_gromov_max {
                verdicts.push(at_most("gromov_sup", est.gromov_sup, *m));
            }
            json!({ "estimate": est })
        }
        Operation::Separation {
            p,
            q,
            n,
            expect_min,
        } => {
            let a = boundary_point(&lab.domain, p)?;
            let b = boundary_point(&lab.domain, q)?;
            let est = boundary_separation_test(e, &a, &b, *n)?;
            if let Some(m) = expect_min {
                verdicts.push(at_least("liminf", est.liminf_hat, *m));
            }
            json!({ "estimate": est })
        }
        Operation::Localization {
            u,
            w,
            pairs,
            refine,
            stability,
        } => {
            let local = Arc::new(restrict_to_rectangle(&lab.domain, u)?);
            let levels: Vec<f64> = if *refine {
                vec![lab.h, 0.5 * lab.h]
            } else {
                vec![lab.h]
            };
            let mut estimates = Vec::new();
            for &h in &levels {
                let g = lab.engine_for(&lab.domain, h)?;
                let l = lab.engine_for(&local, h)?;
                estimates.push(localization_constant(&g, &l, u, w, *pairs, lab.seed)?);
            }
            let violations: usize = estimates.iter().map(|s| s.left_violations).sum();
            let excess = estimates
                .iter()
                .map(|s| s.left_excess)
                .fold(f64::NEG_INFINITY, f64::max);
            verdicts.push(Verdict {
                name: "left_inequality".into(),
                passed: violations == 0,
                value: Some(excess),
                threshold: Some(estimates[0].left_tolerance),
            });
            if let [c1, c2] = &estimates[..] {
                let change = (c2.c_hat - c1.c_hat).abs() / c1.c_hat.abs().max(f64::MIN_POSITIVE);
                verdicts.push(at_most("refinement_change", change, *stability));
            }
            json!({
                "local_domain": local.spec(),
                "spacings": levels,
                "estimates": estimates,
            })
        }
        Operation::QuasiGeodesic {
            z,
            w,
            lambda,
            kappa,
            samples,
            expect_valid,
        } => {
            let path = e.geodesic(point(*z), point(*w))?;
            let cert = e.quasi_geodesic_check(&path, *lambda, *kappa, *samples, lab.seed)?;
            verdicts.push(expect_flag("valid", cert.is_valid(), *expect_valid));
            json!({ "certificate": cert, "length": path.length })
        }
    };
    Ok((outputs, verdicts))
}

/// Squeezing bounds need only the Riemann map of the enveloping domain.
fn squeeze(
    lab: &Lab,
    points: &[Point],
    expect_monotone: bool,
    expect_final_min: Option<f64>,
) -> CliResult<(Value, Vec<Verdict>)> {
    let env = Arc::new(enveloping_domain(&lab.domain)?);
    let map = lab.cache.map(&env, env.base_point())?;
    let estimates = points
        .iter()
        .map(|&z| squeezing_lower_bound(&lab.domain, point(z), &map))
        .collect::<horolab_core::Result<Vec<_>>>()?;
    let mut verdicts = Vec::new();
    let identity = estimates
        .iter()
        .map(|s| (s.lower_bound - s.disk_gap.map_or(1.0, |g| g.tanh())).abs())
        .fold(0.0, f64::max);
    verdicts.push(at_most("tanh_identity", identity, 0.0));
    if expect_monotone {
        let drop = estimates
            .windows(2)
            .map(|w| w[0].lower_bound - w[1].lower_bound)
            .fold(0.0, f64::max);
        verdicts.push(at_most("monotone", drop, 0.0));
    }
    if let (Some(m), Some(last)) = (expect_final_min, estimates.last()) {
        verdicts.push(at_least("final_lower_bound", last.lower_bound, m));
    }
    Ok((json!({ "estimates": estimates }), verdicts))
}
