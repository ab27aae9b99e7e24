//! Closed-form hyperbolic densities (curvature -4).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::{PlanarDomain, Shape};

/// Log-density `u = log lambda` with its gradient and Hessian.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub u: f64,
    pub ux: f64,
    pub uy: f64,
    pub uxx: f64,
    pub uxy: f64,
    pub uyy: f64,
}

impl Jet {
    pub fn density(&self) -> f64 {
        self.u.exp()
    }

    pub fn gradient(&self) -> C64 {
        C64::new(self.ux, self.uy)
    }

    /// Jet of `u(s (z - c))` rescaled to the original coordinates, with the
    /// density picking up the factor `s`.
    fn rescaled(self, s: f64) -> Jet {
        Jet {
            u: self.u + s.ln(),
            ux: self.ux * s,
            uy: self.uy * s,
            uxx: self.uxx * s * s,
            uxy: self.uxy * s * s,
            uyy: self.uyy * s * s,
        }
    }
}

/// `lambda(z) = 1 / (1 - |z|^2)` on the unit disk.
pub fn unit_disk_jet(z: C64) -> Jet {
    let q = 1.0 - z.norm_sqr();
    let (x, y) = (z.re, z.im);
    Jet {
        u: -q.ln(),
        ux: 2.0 * x / q,
        uy: 2.0 * y / q,
        uxx: 2.0 / q + 4.0 * x * x / (q * q),
        uxy: 4.0 * x * y / (q * q),
        uyy: 2.0 / q + 4.0 * y * y / (q * q),
    }
}

/// Density of `{r < |z| < 1}` through the strip covering `log z`:
/// `lambda = pi / (2 L |z| sin(pi log(|z| / r) / L))` with `L = log(1 / r)`.
pub fn unit_annulus_jet(r: f64, z: C64) -> Jet {
    let l = -r.ln();
    let k = PI / l;
    let rho2 = z.norm_sqr();
    let s = 0.5 * rho2.ln();
    let theta = k * (s - r.ln());
    let (sin, cos) = theta.sin_cos();
    let u = (k / 2.0).ln() - sin.ln() - s;
    let du = -k * cos / sin - 1.0;
    let ddu = k * k / (sin * sin);
    let (x, y) = (z.re, z.im);
    let (sx, sy) = (x / rho2, y / rho2);
    let rho4 = rho2 * rho2;
    let (sxx, sxy, syy) = (
        (y * y - x * x) / rho4,
        -2.0 * x * y / rho4,
        (x * x - y * y) / rho4,
    );
    Jet {
        u,
        ux: du * sx,
        uy: du * sy,
        uxx: ddu * sx * sx + du * sxx,
        uxy: ddu * sx * sy + du * sxy,
        uyy: ddu * sy * sy + du * syy,
    }
}

/// `lambda(w) = 1 / (2 Im w)` on the upper half-plane.
pub fn half_plane_density(w: C64) -> f64 {
    1.0 / (2.0 * w.im)
}

/// Domains with a closed-form density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClosedForm {
    Disk { center: C64, radius: f64 },
    Annulus { center: C64, inner: f64, outer: f64 },
}

impl ClosedForm {
    /// Recognise round disks and concentric round annuli.
    pub fn detect(domain: &PlanarDomain) -> Option<Self> {
        let comps = domain.components();
        let circle = |i: usize| match comps[i].shape() {
            Shape::Circle { center, radius } => Some((*center, *radius)),
            _ => None,
        };
        match comps.len() {
            1 => circle(0).map(|(center, radius)| ClosedForm::Disk { center, radius }),
            2 => {
                let (c0, r0) = circle(0)?;
                let (c1, r1) = circle(1)?;
                ((c0 - c1).norm() <= 1e-14 * r0).then_some(ClosedForm::Annulus {
                    center: c0,
                    inner: r1,
                    outer: r0,
                })
            }
            _ => None,
        }
    }

    pub fn jet(&self, z: C64) -> Jet {
        match *self {
            ClosedForm::Disk { center, radius } => {
                unit_disk_jet((z - center) / radius).rescaled(1.0 / radius)
            }
            ClosedForm::Annulus {
                center,
                inner,
                outer,
            } => unit_annulus_jet(inner / outer, (z - center) / outer).rescaled(1.0 / outer),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(C64) -> Jet, z: C64) {
        let e = 1e-5;
        let j = f(z);
        let jx = f(z + e);
        let jy = f(z + C64::new(0.0, e));
        let jx0 = f(z - e);
        let jy0 = f(z - C64::new(0.0, e));
        assert!(((jx.u - jx0.u) / (2.0 * e) - j.ux).abs() < 1e-6 * (1.0 + j.ux.abs()));
        assert!(((jy.u - jy0.u) / (2.0 * e) - j.uy).abs() < 1e-6 * (1.0 + j.uy.abs()));
        assert!(((jx.ux - jx0.ux) / (2.0 * e) - j.uxx).abs() < 1e-5 * (1.0 + j.uxx.abs()));
        assert!(((jy.ux - jy0.ux) / (2.0 * e) - j.uxy).abs() < 1e-5 * (1.0 + j.uxy.abs()));
        assert!(((jy.uy - jy0.uy) / (2.0 * e) - j.uyy).abs() < 1e-5 * (1.0 + j.uyy.abs()));
    }

    #[test]
    fn derivatives_match_differences() {
        for z in [C64::new(0.3, -0.2), C64::new(-0.1, 0.7), C64::new(0.0, 0.0)] {
            fd_check(unit_disk_jet, z);
        }
        for z in [
            C64::new(0.5, 0.1),
            C64::new(-0.2, -0.6),
            C64::new(0.0, 0.95),
        ] {
            fd_check(|z| unit_annulus_jet(0.3, z), z);
        }
        let cf = ClosedForm::Disk {
            center: C64::new(0.2, 0.1),
            radius: 2.0,
        };
        fd_check(|z| cf.jet(z), C64::new(1.0, -0.5));
    }

    #[test]
    fn disk_values() {
        assert_eq!(unit_disk_jet(C64::new(0.0, 0.0)).density(), 1.0);
        assert!((unit_disk_jet(C64::new(0.5, 0.0)).density() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(half_plane_density(C64::new(3.0, 0.5)), 1.0);
    }

    #[test]
    fn annulus_is_symmetric_about_the_core_circle() {
        let r: f64 = 0.3;
        let mid = r.sqrt();
        let a = unit_annulus_jet(r, C64::new(mid * 1.2, 0.0)).u + (mid * 1.2f64).ln();
        let b = unit_annulus_jet(r, C64::new(mid / 1.2, 0.0)).u + (mid / 1.2f64).ln();
        assert!((a - b).abs() < 1e-12);
    }
}
