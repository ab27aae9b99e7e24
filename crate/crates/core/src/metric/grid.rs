use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Uniform node lattice `origin + h (i + i j)`, `0 <= i < nx`, `0 <= j < ny`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: C64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Smallest lattice with spacing `h` covering the box plus `pad` nodes on each side.
    pub fn covering(bbox: (C64, C64), h: f64, pad: usize) -> Self {
        let (lo, hi) = bbox;
        let origin = C64::new(
            (lo.re / h).floor() * h - pad as f64 * h,
            (lo.im / h).floor() * h - pad as f64 * h,
        );
        let nx = ((hi.re - origin.re) / h).ceil() as usize + pad + 1;
        let ny = ((hi.im - origin.im) / h).ceil() as usize + pad + 1;
        Grid { origin, h, nx, ny }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn node(&self, i: usize, j: usize) -> C64 {
        self.origin + C64::new(i as f64 * self.h, j as f64 * self.h)
    }

    /// Cell containing `z` and the fractional offsets inside it.
    pub fn locate(&self, z: C64) -> Option<(usize, usize, f64, f64)> {
        let x = (z.re - self.origin.re) / self.h;
        let y = (z.im - self.origin.im) / self.h;
        if !(x >= 0.0 && y >= 0.0) {
            return None;
        }
        let (i, j) = (x.floor() as usize, y.floor() as usize);
        if i + 1 >= self.nx || j + 1 >= self.ny {
            return None;
        }
        Some((i, j, x - i as f64, y - j as f64))
    }
}

/// Catmull-Rom weights for the nodes `-1, 0, 1, 2` and their first and second derivatives.
fn catmull_rom(t: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        [
            0.5 * (-t + 2.0 * t2 - t3),
            0.5 * (2.0 - 5.0 * t2 + 3.0 * t3),
            0.5 * (t + 4.0 * t2 - 3.0 * t3),
            0.5 * (-t2 + t3),
        ],
        [
            0.5 * (-1.0 + 4.0 * t - 3.0 * t2),
            0.5 * (-10.0 * t + 9.0 * t2),
            0.5 * (1.0 + 8.0 * t - 9.0 * t2),
            0.5 * (-2.0 * t + 3.0 * t2),
        ],
        [
            0.5 * (4.0 - 6.0 * t),
            0.5 * (-10.0 + 18.0 * t),
            0.5 * (8.0 - 18.0 * t),
            0.5 * (-2.0 + 6.0 * t),
        ],
    )
}

/// Bicubic value, gradient and Hessian `[f, fx, fy, fxx, fxy, fyy]` of
/// node data at `z`, or `None` when the 4x4 stencil leaves the grid or
/// touches a non-finite value.
pub fn bicubic(grid: &Grid, values: &[f64], z: C64) -> Option<[f64; 6]> {
    let (i, j, tx, ty) = grid.locate(z)?;
    if i == 0 || j == 0 || i + 2 >= grid.nx || j + 2 >= grid.ny {
        return None;
    }
    let (wx, dx, ddx) = catmull_rom(tx);
    let (wy, dy, ddy) = catmull_rom(ty);
    let mut out = [0.0; 6];
    for b in 0..4 {
        let row = grid.index(i - 1, j + b - 1);
        let vals = &values[row..row + 4];
        let (mut r0, mut r1, mut r2) = (0.0, 0.0, 0.0);
        for a in 0..4 {
            let v = vals[a];
            r0 += wx[a] * v;
            r1 += dx[a] * v;
            r2 += ddx[a] * v;
        }
        out[0] += wy[b] * r0;
        out[1] += wy[b] * r1;
        out[2] += dy[b] * r0;
        out[3] += wy[b] * r2;
        out[4] += dy[b] * r1;
        out[5] += ddy[b] * r0;
    }
    if !out[0].is_finite() {
        return None;
    }
    let h = grid.h;
    Some([
        out[0],
        out[1] / h,
        out[2] / h,
        out[3] / (h * h),
        out[4] / (h * h),
        out[5] / (h * h),
    ])
}
