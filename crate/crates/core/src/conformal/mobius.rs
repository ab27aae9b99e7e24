use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Disk automorphism `z -> e^{i theta} (z - a) / (1 - conj(a) z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskAutomorphism {
    pub a: C64,
    pub theta: f64,
}

impl DiskAutomorphism {
    pub fn new(a: C64, theta: f64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return Err(Error::Domain(format!(
                "automorphism centre {a} is not in the unit disk"
            )));
        }
        Ok(DiskAutomorphism { a, theta })
    }

    pub fn identity() -> Self {
        DiskAutomorphism {
            a: C64::new(0.0, 0.0),
            theta: 0.0,
        }
    }

    /// The automorphism sending `z` to the origin, with no rotation.
    pub fn to_origin(z: C64) -> Result<Self> {
        Self::new(z, 0.0)
    }

    pub fn eval(&self, z: C64) -> C64 {
        C64::from_polar(1.0, self.theta) * (z - self.a) / (C64::new(1.0, 0.0) - self.a.conj() * z)
    }

    pub fn derivative(&self, z: C64) -> C64 {
        let den = C64::new(1.0, 0.0) - self.a.conj() * z;
        C64::from_polar(1.0, self.theta) * (1.0 - self.a.norm_sqr()) / (den * den)
    }

    pub fn inverse(&self) -> Self {
        DiskAutomorphism {
            a: -C64::from_polar(1.0, self.theta) * self.a,
            theta: -self.theta,
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &DiskAutomorphism) -> Self {
        let a = inner.inverse().eval(self.a);
        let d = self.derivative(inner.eval(a)) * inner.derivative(a) * (1.0 - a.norm_sqr());
        DiskAutomorphism { a, theta: d.arg() }
    }
}

/// Closed-form hyperbolic distance on the unit disk (curvature -4):
/// `artanh |(z - w) / (1 - conj(w) z)|`.
pub fn disk_distance(z: C64, w: C64) -> f64 {
    let num = (z - w).norm();
    let den = (C64::new(1.0, 0.0) - w.conj() * z).norm();
    (num / den).min(1.0).atanh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sends_point_to_origin() {
        let t = DiskAutomorphism::to_origin(c(0.5, 0.)).unwrap();
        assert!(t.eval(c(0.5, 0.)).norm() < 1e-15);
        assert!((t.eval(c(0., 0.)) - c(-0.5, 0.)).norm() < 1e-15);
        let id = DiskAutomorphism::to_origin(c(0., 0.)).unwrap();
        assert_eq!(id.eval(c(0.3, 0.1)), c(0.3, 0.1));
        assert!(DiskAutomorphism::to_origin(c(1.0, 0.)).is_err());
    }

    fn disk_point() -> impl Strategy<Value = C64> {
        (0.0..0.95f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
    }

    proptest! {
        #[test]
        fn inverse_round_trip(a in disk_point(), theta in -3.0..3.0f64, w in disk_point()) {
            let t = DiskAutomorphism::new(a, theta).unwrap();
            let back = t.inverse().eval(t.eval(w));
            prop_assert!((back - w).norm() < 1e-13);
        }

        #[test]
        fn composition_matches_sequential_evaluation(
            a in disk_point(), b in disk_point(), s in -3.0..3.0f64, t in -3.0..3.0f64, w in disk_point()
        ) {
            let f = DiskAutomorphism::new(a, s).unwrap();
            let g = DiskAutomorphism::new(b, t).unwrap();
            let fg = f.compose(&g);
            prop_assert!(fg.a.norm() < 1.0);
            prop_assert!((fg.eval(w) - f.eval(g.eval(w))).norm() < 1e-12);
        }

        #[test]
        fn automorphisms_preserve_disk_distance(a in disk_point(), z in disk_point(), w in disk_point()) {
            let t = DiskAutomorphism::to_origin(a).unwrap();
            let d0 = disk_distance(z, w);
            let d1 = disk_distance(t.eval(z), t.eval(w));
            prop_assert!((d0 - d1).abs() < 1e-9 * (1.0 + d0));
        }
    }

    #[test]
    fn distance_from_origin_is_artanh() {
        assert!((disk_distance(c(0., 0.), c(0.5, 0.)) - 0.5 * 3f64.ln()).abs() < 1e-15);
    }
}
