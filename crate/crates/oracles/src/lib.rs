//! Closed-form reference geometry, kept apart from the library so tests
//! never check the library against itself.
//!
//! All metrics have curvature -4: the disk density is `1 / (1 - |z|^2)`
//! and the half-plane density is `1 / (2 Im w)`.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

pub mod disk {
    use super::*;

    pub fn density(z: C64) -> f64 {
        1.0 / (1.0 - z.norm_sqr())
    }

    pub fn distance(z: C64, w: C64) -> f64 {
        ((z - w) / (ONE - w.conj() * z)).norm().atanh()
    }

    /// Busemann function of the radial ray towards `e^{i theta}`, zero at the origin.
    pub fn busemann(theta: f64, z: C64) -> f64 {
        let p = C64::from_polar(1.0, theta);
        0.5 * ((p - z).norm_sqr() / (1.0 - z.norm_sqr())).ln()
    }

    /// Point at distance `t` from the origin along the ray towards `e^{i theta}`.
    pub fn ray_point(theta: f64, t: f64) -> C64 {
        C64::from_polar(t.tanh(), theta)
    }

    /// Gromov product at the origin.
    pub fn gromov(z: C64, w: C64) -> f64 {
        let o = C64::new(0.0, 0.0);
        0.5 * (distance(z, o) + distance(w, o) - distance(z, w))
    }
}

pub mod half_plane {
    use super::*;

    pub fn density(w: C64) -> f64 {
        1.0 / (2.0 * w.im)
    }

    pub fn distance(a: C64, b: C64) -> f64 {
        ((a - b) / (a - b.conj())).norm().atanh()
    }

    /// Busemann function centred at the real point `a`, up to a constant.
    pub fn busemann(a: f64, w: C64) -> f64 {
        0.5 * ((w - a).norm_sqr() / w.im).ln()
    }
}

/// Hyperbolic geometry pulled back from the half-plane by a map `h` with
/// its derivative.
fn pulled_density(h: C64, dh: C64) -> f64 {
    dh.norm() / (2.0 * h.im)
}

pub mod annulus {
    use super::*;

    /// `(h, h')` for the covering map of `{r < |z| < 1}` onto the upper
    /// half-plane through the strip `log z`.
    fn cover(r: f64, z: C64) -> (C64, C64) {
        let l = (1.0 / r).ln();
        // log z - log r lies in the strip 0 < Re < L; rotate and exponentiate.
        let zeta = z.ln() - r.ln();
        let h = (I * zeta * (PI / l)).exp();
        let dh = h * (PI / l) * I / z;
        (h, dh)
    }

    pub fn density(r: f64, z: C64) -> f64 {
        let (h, dh) = cover(r, z);
        pulled_density(h, dh)
    }
}

pub mod strip {
    use super::*;

    /// Density of `{0 < Im z < width}` at height `y`.
    pub fn density(width: f64, y: f64) -> f64 {
        let z = C64::new(0.0, y);
        let h = (z * (PI / width)).exp();
        pulled_density(h, h * (PI / width))
    }
}

pub mod slit_disk {
    use super::*;

    /// Conformal map of the unit disk minus `[0, 1]` onto the upper half-plane
    /// with its derivative: `s = i sqrt(-z)` opens the slit onto the upper
    /// half-disk and the Joukowski map `-(s + 1/s)` unfolds that.
    pub fn to_half_plane(z: C64) -> (C64, C64) {
        let q = (-z).sqrt();
        let s = I * q;
        let ds = I * (-ONE) / (2.0 * q);
        let h = -(s + ONE / s);
        let dh = -(ONE - ONE / (s * s)) * ds;
        (h, dh)
    }

    /// Half-plane images of the two sides of the slit at `x` in `(0, 1)`,
    /// upper side first.
    pub fn slit_images(x: f64) -> (f64, f64) {
        let s = x.sqrt();
        (-(s + 1.0 / s), s + 1.0 / s)
    }

    pub fn density(z: C64) -> f64 {
        let (h, dh) = to_half_plane(z);
        pulled_density(h, dh)
    }

    pub fn distance(z: C64, w: C64) -> f64 {
        half_plane::distance(to_half_plane(z).0, to_half_plane(w).0)
    }

    /// Unit-disk picture normalised at `o` (no rotation fixed).
    pub fn to_disk(o: C64, z: C64) -> C64 {
        let ho = to_half_plane(o).0;
        let h = to_half_plane(z).0;
        (h - ho) / (h - ho.conj())
    }

    /// Disk angle of a real half-plane point under [`to_disk`].
    pub fn boundary_angle(o: C64, x: f64) -> f64 {
        let ho = to_half_plane(o).0;
        let h = C64::new(x, 0.0);
        ((h - ho) / (h - ho.conj())).arg()
    }
}

pub mod square {
    use super::*;

    /// `int_0^1 (1 + t^4)^{-1/2} dt`, which fixes the scale of the map.
    pub fn scale_integral() -> f64 {
        simpson(|t| (1.0 + t.powi(4)).powf(-0.5), 0.0, 1.0, 4000)
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    /// Schwarz-Christoffel map of the unit disk onto `[-1/2, 1/2]^2` with
    /// `0 -> 0` and `1 -> 1/2`.
    pub fn from_disk(w: C64) -> C64 {
        let c = 0.5 / scale_integral();
        let n = 4000;
        let h = 1.0 / n as f64;
        let g = |s: f64| (ONE + (w * s).powi(4)).powf(-0.5);
        let mut acc = g(0.0) + g(1.0);
        for k in 1..n {
            acc += g(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        c * w * acc * (h / 3.0)
    }

    pub fn derivative(w: C64) -> C64 {
        let c = 0.5 / scale_integral();
        c * (ONE + w.powi(4)).powf(-0.5)
    }

    /// Inverse by Newton iteration from the origin.
    pub fn to_disk(z: C64) -> C64 {
        let mut w = z;
        for _ in 0..60 {
            let step = (from_disk(w) - z) / derivative(w);
            w -= step;
            if step.norm() < 1e-15 {
                break;
            }
        }
        w
    }

    pub fn density(z: C64) -> f64 {
        let w = to_disk(z);
        1.0 / ((1.0 - w.norm_sqr()) * derivative(w).norm())
    }

    pub fn distance(z: C64, u: C64) -> f64 {
        disk::distance(to_disk(z), to_disk(u))
    }
}
