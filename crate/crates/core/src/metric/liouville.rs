//! Finite-difference solver for `Delta u = 4 e^{2u}`.
//!
//! Unknowns are the nodes whose four neighbours are reachable without
//! crossing the boundary; the remaining interior nodes form the first layer
//! and carry `u = -log(2 delta) - kappa delta / 2`, `kappa` being the
//! Laplacian of `delta`. Each Newton step solves
//! `(-Delta_h + 8 e^{2u}) du = Delta_h u - 4 e^{2u}` by Jacobi-preconditioned
//! conjugate gradients.
//!
//! Near the boundary `u` behaves like `u0 = -log(2 delta)`, whose fourth
//! derivatives blow up and swamp the five-point stencil. Where `delta` is
//! smooth across a stencil the discrete Laplacian of `u0` is replaced by the
//! exact one, `1 / delta^2 - kappa / delta`; in effect the scheme solves for
//! the bounded remainder `u - u0`.

use std::sync::Arc;

use log::debug;
use num_complex::Complex64 as C64;

use super::field::{Method, MetricField, Source};
use super::grid::Grid;
use crate::domain::PlanarDomain;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct LiouvilleOptions {
    pub max_newton: usize,
    /// Stop when `max |Delta_h u - 4 e^{2u}| / (4 e^{2u})` falls below this.
    pub tolerance: f64,
    pub cg_tolerance: f64,
    pub max_cg: usize,
}

impl Default for LiouvilleOptions {
    fn default() -> Self {
        LiouvilleOptions {
            max_newton: 30,
            tolerance: 1e-9,
            cg_tolerance: 1e-10,
            max_cg: 20_000,
        }
    }
}

const NONE: u32 = u32::MAX;

struct System {
    /// Grid index of each unknown.
    nodes: Vec<usize>,
    /// Unknown index of the four neighbours, or `NONE` for first-layer nodes.
    nbr: Vec<[u32; 4]>,
    /// Sum of first-layer neighbour values for each unknown.
    fixed: Vec<f64>,
    /// Exact minus discrete Laplacian of `u0`, zero where `delta` has a kink.
    correction: Vec<f64>,
    h2: f64,
}

impl System {
    fn residual(&self, u: &[f64], out: &mut [f64]) {
        for (k, nb) in self.nbr.iter().enumerate() {
            let mut s = self.fixed[k] - 4.0 * u[k];
            for &n in nb {
                if n != NONE {
                    s += u[n as usize];
                }
            }
            out[k] = s / self.h2 + self.correction[k] - 4.0 * (2.0 * u[k]).exp();
        }
    }

    fn apply(&self, diag_extra: &[f64], x: &[f64], out: &mut [f64]) {
        for (k, nb) in self.nbr.iter().enumerate() {
            let mut s = 4.0 * x[k];
            for &n in nb {
                if n != NONE {
                    s -= x[n as usize];
                }
            }
            out[k] = s / self.h2 + diag_extra[k] * x[k];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn conjugate_gradient(
    sys: &System,
    extra: &[f64],
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize) {
    let n = rhs.len();
    let inv_diag: Vec<f64> = extra.iter().map(|e| 1.0 / (4.0 / sys.h2 + e)).collect();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let target = tol * dot(rhs, rhs).sqrt();
    let mut it = 0;
    while it < max_iter {
        sys.apply(extra, &p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        it += 1;
        if dot(&r, &r).sqrt() <= target {
            break;
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    (x, it)
}

fn relative_max(res: &[f64], u: &[f64]) -> f64 {
    res.iter()
        .zip(u)
        .map(|(r, u)| r.abs() / (4.0 * (2.0 * u).exp()))
        .fold(0.0, f64::max)
}

/// Solve the Liouville equation for the hyperbolic log-density of `domain`
/// on a grid of spacing `h`.
pub fn solve_liouville(
    domain: Arc<PlanarDomain>,
    h: f64,
    opts: LiouvilleOptions,
) -> Result<MetricField> {
    if !domain.is_validated() {
        return Err(Error::ValidationRequired(domain.name().to_string()));
    }
    let grid = Grid::covering(domain.bounding_box(), h, 3);
    let n = grid.len();
    let mut inside = vec![false; n];
    let mut delta = vec![0.0; n];
    for k in 0..n {
        let (i, j) = grid.coords(k);
        let z = grid.node(i, j);
        if domain.inside(z) {
            inside[k] = true;
            delta[k] = domain.boundary_distance(z);
        }
    }
    let dirs: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    let reach = |k: usize, d: (isize, isize)| -> Option<usize> {
        let (i, j) = grid.coords(k);
        let (ni, nj) = (i as isize + d.0, j as isize + d.1);
        if ni < 0 || nj < 0 || ni as usize >= grid.nx || nj as usize >= grid.ny {
            return None;
        }
        let m = grid.index(ni as usize, nj as usize);
        if !inside[m] {
            return None;
        }
        if delta[k] > h
            || !domain.segment_hits_boundary(grid.node(i, j), grid.node(ni as usize, nj as usize))
        {
            Some(m)
        } else {
            None
        }
    };
    let mut unknown = vec![NONE; n];
    let mut nodes = Vec::new();
    for k in 0..n {
        if inside[k] && dirs.iter().all(|&d| reach(k, d).is_some()) {
            unknown[k] = nodes.len() as u32;
            nodes.push(k);
        }
    }
    if nodes.is_empty() {
        return Err(Error::Resolution(format!(
            "no interior unknowns at h = {h}"
        )));
    }
    let mut u_grid = vec![f64::NAN; n];
    for k in 0..n {
        if inside[k] {
            u_grid[k] = -(2.0 * delta[k]).ln();
            if unknown[k] == NONE {
                let (i, j) = grid.coords(k);
                let jet = domain.boundary_jet(grid.node(i, j));
                u_grid[k] -= 0.5 * jet.curvature * jet.delta;
            }
        }
    }
    let mut nbr = Vec::with_capacity(nodes.len());
    let mut fixed = Vec::with_capacity(nodes.len());
    let mut correction = Vec::with_capacity(nodes.len());
    for &k in &nodes {
        let mut nb = [NONE; 4];
        let mut f = 0.0;
        let mut lap = 4.0 * (2.0 * delta[k]).ln();
        let (i, j) = grid.coords(k);
        let jet = domain.boundary_jet(grid.node(i, j));
        let mut smooth = true;
        for (s, &d) in dirs.iter().enumerate() {
            let m = reach(k, d).expect("unknowns have four neighbours");
            lap -= (2.0 * delta[m]).ln();
            if unknown[m] == NONE {
                f += u_grid[m];
            } else {
                nb[s] = unknown[m];
            }
            let step = C64::new(d.0 as f64 * h, d.1 as f64 * h);
            let along = jet.normal.re * step.re + jet.normal.im * step.im;
            let predicted = jet.delta + along + 0.5 * jet.curvature * (h * h - along * along);
            if (delta[m] - predicted).abs() > 1e-3 * h {
                smooth = false;
            }
        }
        nbr.push(nb);
        fixed.push(f);
        correction.push(if smooth {
            1.0 / (jet.delta * jet.delta) - jet.curvature / jet.delta - lap / (h * h)
        } else {
            0.0
        });
    }
    // One connected component of unknowns.
    let mut seen = vec![false; nodes.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(a) = stack.pop() {
        for &b in &nbr[a] {
            if b != NONE && !seen[b as usize] {
                seen[b as usize] = true;
                count += 1;
                stack.push(b as usize);
            }
        }
    }
    if count != nodes.len() {
        return Err(Error::Resolution(format!(
            "interior grid at h = {h} is disconnected ({count} of {} nodes reachable)",
            nodes.len()
        )));
    }
    let sys = System {
        nodes,
        nbr,
        fixed,
        correction,
        h2: h * h,
    };
    let mut u: Vec<f64> = sys.nodes.iter().map(|&k| u_grid[k]).collect();
    let mut res = vec![0.0; u.len()];
    sys.residual(&u, &mut res);
    let mut history = vec![relative_max(&res, &u)];
    let mut converged = history[0] <= opts.tolerance;
    for it in 0..opts.max_newton {
        if converged {
            break;
        }
        let extra: Vec<f64> = u.iter().map(|u| 8.0 * (2.0 * u).exp()).collect();
        let (du, cg_its) = conjugate_gradient(&sys, &extra, &res, opts.cg_tolerance, opts.max_cg);
        let before: f64 = dot(&res, &res);
        let mut step = 1.0;
        let mut trial = vec![0.0; u.len()];
        let mut trial_res = vec![0.0; u.len()];
        loop {
            for k in 0..u.len() {
                trial[k] = u[k] + step * du[k];
            }
            sys.residual(&trial, &mut trial_res);
            if dot(&trial_res, &trial_res) < before || step < 1e-3 {
                break;
            }
            step *= 0.5;
        }
        std::mem::swap(&mut u, &mut trial);
        std::mem::swap(&mut res, &mut trial_res);
        let r = relative_max(&res, &u);
        debug!("liouville h={h} newton {it}: step {step} cg {cg_its} residual {r:.3e}");
        history.push(r);
        converged = r <= opts.tolerance;
    }
    if !converged {
        return Err(Error::Solver {
            message: format!(
                "Newton iteration did not converge on `{}` at h = {h}",
                domain.name()
            ),
            residual_history: history,
        });
    }
    for (idx, &k) in sys.nodes.iter().enumerate() {
        u_grid[k] = u[idx];
    }
    let residual = sys
        .nodes
        .iter()
        .zip(&res)
        .filter(|(&k, _)| delta[k] >= 3.0 * h)
        .map(|(_, r)| r.abs())
        .fold(0.0, f64::max);
    let v: Vec<f64> = (0..n)
        .map(|k| {
            if inside[k] && unknown[k] != NONE {
                u_grid[k] + (2.0 * delta[k]).ln()
            } else {
                0.0
            }
        })
        .collect();
    Ok(MetricField::from_parts(
        domain,
        grid,
        u_grid,
        delta,
        v,
        Method::LiouvillePde,
        Some(residual),
        Source::Pde,
    ))
}
