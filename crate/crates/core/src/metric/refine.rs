//! Discrete geodesic-energy minimisation on a polyline.
//!
//! Segment lengths are Simpson estimates `l = L (lambda_a + 4 lambda_m + lambda_b) / 6`
//! along chords. Minimising `sum l_i^2` with fixed endpoints both shortens the
//! path and equalises the segments, so the result is close to unit speed.
//! Steps are damped Newton steps with the exact block-tridiagonal Hessian.

use log::{debug, trace};
use num_complex::Complex64 as C64;

use super::closed::Jet;
use super::field::MetricField;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct RefineOptions {
    /// Target intrinsic length of one segment.
    pub segment_length: f64,
    pub min_segments: usize,
    pub max_segments: usize,
    pub max_iterations: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            segment_length: 0.05,
            min_segments: 8,
            max_segments: 400,
            max_iterations: 80,
        }
    }
}

/// Relative energy decrease below which the iteration stops.
const CONVERGED: f64 = 1e-12;
const MAX_REJECTIONS: usize = 12;
const NOISE: f64 = 1e-9;

pub(crate) struct Refined {
    pub vertices: Vec<C64>,
    /// `[lambda_a, lambda_mid, lambda_b]` per segment.
    pub densities: Vec<[f64; 3]>,
    pub lengths: Vec<f64>,
}

type V2 = [f64; 2];
type M2 = [[f64; 2]; 2];

fn outer(a: V2, b: V2) -> M2 {
    [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]]
}

fn add(a: M2, b: M2) -> M2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

fn scale(a: M2, s: f64) -> M2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

fn transpose(a: M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn mul(a: M2, b: M2) -> M2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn mulv(a: M2, v: V2) -> V2 {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

fn inverse(a: M2) -> Option<M2> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(det > 0.0) || !(a[0][0] > 0.0) {
        return None;
    }
    Some([
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ])
}

/// `lambda (grad u grad u^T + hess u)`, the Hessian of `lambda = e^u`.
fn lambda_hessian(j: &Jet) -> M2 {
    let l = j.u.exp();
    [
        [l * (j.ux * j.ux + j.uxx), l * (j.ux * j.uy + j.uxy)],
        [l * (j.uy * j.ux + j.uxy), l * (j.uy * j.uy + j.uyy)],
    ]
}

struct Evaluation {
    energy: f64,
    lengths: Vec<f64>,
    densities: Vec<[f64; 3]>,
    grad: Vec<V2>,
    diag: Vec<M2>,
    off: Vec<M2>,
}

fn evaluate(field: &MetricField, x: &[C64], with_derivatives: bool) -> Option<Evaluation> {
    let m = x.len() - 1;
    let mut pts = Vec::with_capacity(2 * m + 1);
    pts.extend_from_slice(x);
    pts.extend(x.windows(2).map(|w| (w[0] + w[1]) * 0.5));
    let jets = field.jets(&pts);
    let mut js = Vec::with_capacity(jets.len());
    for j in jets {
        js.push(j?);
    }
    let lam: Vec<f64> = js.iter().map(|j| j.u.exp()).collect();
    let nvar = m.saturating_sub(1);
    let mut ev = Evaluation {
        energy: 0.0,
        lengths: Vec::with_capacity(m),
        densities: Vec::with_capacity(m),
        grad: vec![[0.0; 2]; nvar],
        diag: vec![[[0.0; 2]; 2]; nvar],
        off: vec![[[0.0; 2]; 2]; nvar.saturating_sub(1)],
    };
    for s in 0..m {
        let (ja, jb, jm) = (&js[s], &js[s + 1], &js[m + 1 + s]);
        let (la, lb, lm) = (lam[s], lam[s + 1], lam[m + 1 + s]);
        let d = x[s + 1] - x[s];
        let len = d.norm();
        let sum = la + 4.0 * lm + lb;
        let ell = len * sum / 6.0;
        ev.energy += ell * ell;
        ev.lengths.push(ell);
        ev.densities.push([la, lm, lb]);
        if !with_derivatives || len == 0.0 {
            continue;
        }
        let e = [d.re / len, d.im / len];
        let ds_a = [la * ja.ux + 2.0 * lm * jm.ux, la * ja.uy + 2.0 * lm * jm.uy];
        let ds_b = [lb * jb.ux + 2.0 * lm * jm.ux, lb * jb.uy + 2.0 * lm * jm.uy];
        let ga = [
            (-e[0] * sum + len * ds_a[0]) / 6.0,
            (-e[1] * sum + len * ds_a[1]) / 6.0,
        ];
        let gb = [
            (e[0] * sum + len * ds_b[0]) / 6.0,
            (e[1] * sum + len * ds_b[1]) / 6.0,
        ];
        let p = [
            [1.0 - e[0] * e[0], -e[0] * e[1]],
            [-e[1] * e[0], 1.0 - e[1] * e[1]],
        ];
        let km = lambda_hessian(jm);
        let haa = scale(
            add(
                add(
                    scale(p, sum / len),
                    add(outer([-e[0], -e[1]], ds_a), outer(ds_a, [-e[0], -e[1]])),
                ),
                scale(add(lambda_hessian(ja), km), len),
            ),
            1.0 / 6.0,
        );
        let hbb = scale(
            add(
                add(scale(p, sum / len), add(outer(e, ds_b), outer(ds_b, e))),
                scale(add(lambda_hessian(jb), km), len),
            ),
            1.0 / 6.0,
        );
        let hab = scale(
            add(
                add(
                    scale(p, -sum / len),
                    add(outer([-e[0], -e[1]], ds_b), outer(ds_a, e)),
                ),
                scale(km, len),
            ),
            1.0 / 6.0,
        );
        // E = sum l^2: grad 2 l grad l, hess 2 (grad l grad l^T + l hess l).
        let (a, b) = (s as isize - 1, s as isize);
        if a >= 0 {
            let a = a as usize;
            ev.grad[a][0] += 2.0 * ell * ga[0];
            ev.grad[a][1] += 2.0 * ell * ga[1];
            ev.diag[a] = add(ev.diag[a], scale(add(outer(ga, ga), scale(haa, ell)), 2.0));
        }
        if (b as usize) < nvar {
            let b = b as usize;
            ev.grad[b][0] += 2.0 * ell * gb[0];
            ev.grad[b][1] += 2.0 * ell * gb[1];
            ev.diag[b] = add(ev.diag[b], scale(add(outer(gb, gb), scale(hbb, ell)), 2.0));
        }
        if a >= 0 && (b as usize) < nvar {
            let a = a as usize;
            ev.off[a] = add(ev.off[a], scale(add(outer(ga, gb), scale(hab, ell)), 2.0));
        }
    }
    Some(ev)
}

/// Solve `(H + mu diag(H)) dx = -g` for the block-tridiagonal `H`; `None`
/// when the damped matrix is not positive definite.
fn solve(ev: &Evaluation, mu: f64) -> Option<Vec<V2>> {
    let n = ev.grad.len();
    let mut s_inv: Vec<M2> = Vec::with_capacity(n);
    let mut y: Vec<V2> = Vec::with_capacity(n);
    for i in 0..n {
        let mut d = ev.diag[i];
        d[0][0] += mu * d[0][0].abs().max(1e-300);
        d[1][1] += mu * d[1][1].abs().max(1e-300);
        let mut rhs = [-ev.grad[i][0], -ev.grad[i][1]];
        if i > 0 {
            // Eliminate with the previous block: B^T S^{-1} B and B^T S^{-1} y.
            let b = ev.off[i - 1];
            let bt = transpose(b);
            let bt_sinv = mul(bt, s_inv[i - 1]);
            let corr = mul(bt_sinv, b);
            d = add(d, scale(corr, -1.0));
            let cy = mulv(bt_sinv, y[i - 1]);
            rhs = [rhs[0] - cy[0], rhs[1] - cy[1]];
        }
        s_inv.push(inverse(d)?);
        y.push(rhs);
    }
    let mut x = vec![[0.0; 2]; n];
    for i in (0..n).rev() {
        let mut r = y[i];
        if i + 1 < n {
            let bx = mulv(ev.off[i], x[i + 1]);
            r = [r[0] - bx[0], r[1] - bx[1]];
        }
        x[i] = mulv(s_inv[i], r);
    }
    Some(x)
}

fn feasible(field: &MetricField, x: &[C64], floor: f64) -> bool {
    let domain = field.domain();
    for &p in &x[1..x.len() - 1] {
        if !domain.inside(p) || domain.boundary_distance(p) < floor {
            return false;
        }
    }
    !x.windows(2)
        .any(|w| domain.segment_hits_boundary(w[0], w[1]))
}

/// Resample a polyline at roughly equal intrinsic spacing using the cheap
/// density estimate.
fn resample(field: &MetricField, poly: &[C64], opts: &RefineOptions) -> Result<Vec<C64>> {
    let sub = opts.segment_length / 4.0;
    let mut pts = vec![poly[0]];
    let mut cum = vec![0.0];
    let mut total = 0.0;
    for w in poly.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b - a).norm();
        let mut s = 0.0;
        let mut guard = 0;
        while s < len {
            let p = a + (b - a) * (s / len);
            let u = field
                .approx_log_density(p)
                .or_else(|| field.approx_log_density(a + (b - a) * ((s + 1e-3 * (len - s)) / len)))
                .ok_or_else(|| {
                    Error::Geometry(format!("initial path leaves the domain near {p}"))
                })?;
            let lam = u.exp();
            let ds = (sub / lam).min(len - s);
            s += ds;
            total += ds * lam;
            guard += 1;
            if guard > 100_000 {
                return Err(Error::Geometry(
                    "initial path resampling did not terminate".into(),
                ));
            }
            pts.push(a + (b - a) * (s / len));
            cum.push(total);
        }
    }
    let m =
        ((total / opts.segment_length).ceil() as usize).clamp(opts.min_segments, opts.max_segments);
    let mut out = Vec::with_capacity(m + 1);
    out.push(poly[0]);
    let mut k = 0;
    for i in 1..m {
        let target = total * i as f64 / m as f64;
        while k + 1 < cum.len() && cum[k + 1] < target {
            k += 1;
        }
        let f = if cum[k + 1] > cum[k] {
            (target - cum[k]) / (cum[k + 1] - cum[k])
        } else {
            0.0
        };
        out.push(pts[k] + (pts[k + 1] - pts[k]) * f);
    }
    out.push(*poly.last().unwrap());
    Ok(out)
}

pub(crate) fn refine(field: &MetricField, poly: &[C64], opts: &RefineOptions) -> Result<Refined> {
    let domain = field.domain();
    let mut x = resample(field, poly, opts)?;
    let end_floor = 0.5
        * domain
            .boundary_distance(x[0])
            .min(domain.boundary_distance(*x.last().unwrap()));
    let start_floor = x[1..x.len() - 1]
        .iter()
        .map(|p| domain.boundary_distance(*p))
        .fold(f64::INFINITY, f64::min);
    let floor = field.grid().h.min(end_floor).min(0.5 * start_floor);
    let mut ev = evaluate(field, &x, true)
        .ok_or_else(|| Error::Geometry("initial path has a vertex outside the domain".into()))?;
    let mut mu = 1e-6;
    let mut iterations = 0;
    let mut rejections = 0;
    let (mut accepted, mut infeasible) = (0, 0);
    while iterations < opts.max_iterations && !ev.grad.is_empty() {
        iterations += 1;
        let Some(dx) = solve(&ev, mu) else {
            mu = (mu * 10.0).max(1e-6);
            rejections += 1;
            if rejections > MAX_REJECTIONS {
                break;
            }
            continue;
        };
        // Decrease predicted by the quadratic model (exact for mu = 0).
        let predicted: f64 = -0.5
            * ev.grad
                .iter()
                .zip(&dx)
                .map(|(g, d)| g[0] * d[0] + g[1] * d[1])
                .sum::<f64>();
        trace!(
            "energy {:.16e} predicted decrease {predicted:.3e} mu {mu:.1e}",
            ev.energy
        );
        if predicted <= CONVERGED * ev.energy {
            break;
        }
        let trial: Vec<C64> = x
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                if i == 0 || i == x.len() - 1 {
                    p
                } else {
                    p + C64::new(dx[i - 1][0], dx[i - 1][1])
                }
            })
            .collect();
        let candidate = if feasible(field, &trial, floor) {
            evaluate(field, &trial, true)
        } else {
            infeasible += 1;
            None
        };
        match candidate {
            Some(next) if next.energy < ev.energy => {
                let gain = ev.energy - next.energy;
                x = trial;
                ev = next;
                accepted += 1;
                mu = if mu < 1e-9 { 0.0 } else { mu / 4.0 };
                rejections = 0;
                if gain <= CONVERGED * ev.energy {
                    break;
                }
            }
            _ => {
                if predicted <= NOISE * ev.energy {
                    // Near the noise floor of the density evaluation.
                    break;
                }
                mu = (mu * 8.0).max(1e-6);
                rejections += 1;
                if rejections > MAX_REJECTIONS {
                    break;
                }
            }
        }
    }
    debug!(
        "refined {} segments: {iterations} iterations, {accepted} accepted, {infeasible} infeasible",
        x.len() - 1
    );
    Ok(Refined {
        vertices: x,
        densities: ev.densities,
        lengths: ev.lengths,
    })
}
