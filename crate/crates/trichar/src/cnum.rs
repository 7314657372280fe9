//! Complex scalars and the extended plane.

use num_complex::Complex64;
use std::fmt;

/// The working complex scalar. All analytic code runs in `f64` precision.
pub type C = Complex64;

/// A point of the Riemann sphere: either a finite complex number or the
/// point at infinity. Poles are reported as `Infinity`, never as huge floats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtComplex {
    Finite(C),
    Infinity,
}

impl ExtComplex {
    pub fn finite(self) -> Option<C> {
        match self {
            ExtComplex::Finite(z) => Some(z),
            ExtComplex::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtComplex::Infinity)
    }

    /// Chordal (spherical) distance, up to the usual factor 2:
    /// |z-w| / sqrt((1+|z|^2)(1+|w|^2)), with the standard limits at infinity.
    pub fn chordal_dist(self, other: ExtComplex) -> f64 {
        match (self, other) {
            (ExtComplex::Finite(z), ExtComplex::Finite(w)) => {
                (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
            }
            (ExtComplex::Finite(z), ExtComplex::Infinity)
            | (ExtComplex::Infinity, ExtComplex::Finite(z)) => {
                1.0 / (1.0 + z.norm_sqr()).sqrt()
            }
            (ExtComplex::Infinity, ExtComplex::Infinity) => 0.0,
        }
    }
}

impl From<C> for ExtComplex {
    fn from(z: C) -> Self {
        ExtComplex::Finite(z)
    }
}

impl fmt::Display for ExtComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtComplex::Finite(z) => write!(f, "{z}"),
            ExtComplex::Infinity => write!(f, "inf"),
        }
    }
}

pub const I: C = C::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Principal power z^p for real p, analytic off the negative real axis.
pub fn principal_pow(z: C, p: f64) -> C {
    z.powf(p)
}

/// Distance from point `p` to the closed segment [a, b].
pub fn dist_point_segment(p: C, a: C, b: C) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chordal_distance_limits() {
        let z = ExtComplex::Finite(c(3.0, 4.0));
        assert!((z.chordal_dist(ExtComplex::Infinity) - 1.0 / 26.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(ExtComplex::Infinity.chordal_dist(ExtComplex::Infinity), 0.0);
    }

    #[test]
    fn segment_distance() {
        let a = c(0.0, 0.0);
        let b = c(2.0, 0.0);
        assert!((dist_point_segment(c(1.0, 1.0), a, b) - 1.0).abs() < 1e-15);
        assert!((dist_point_segment(c(-1.0, 0.0), a, b) - 1.0).abs() < 1e-15);
        assert!((dist_point_segment(c(3.0, 4.0), a, b) - 17.0f64.sqrt()).abs() < 1e-15);
    }
}
