//! The conformal map between the unit equilateral triangle and a half-plane,
//! its Schwarz–Christoffel inverse, and the flat metric rho0 it induces on the
//! thrice-punctured sphere.
//!
//! Two independent routes are kept deliberately separate so they can
//! cross-validate each other: the forward map is the restriction of wp' to the
//! triangle, while the inverse is a Schwarz–Christoffel quadrature
//! u(w) = i + C * integral from ia to w of (zeta^2 + a^2)^(-2/3) d zeta,
//! evaluated with Gauss–Jacobi rules that absorb the endpoint exponents.
//!
//! Orientation note: with the triangle vertices listed as (0, i, (sqrt3+i)/2)
//! the boundary is negatively oriented, and wp' sends (0, i, (sqrt3+i)/2) to
//! (inf, -ia, +ia). General triples are reduced to this one by a Moebius map.

use crate::cnum::{c, dist_point_segment, ExtComplex, C};
use crate::elliptic::{Wp, SQRT3};
use crate::error::{Error, Result};
use crate::quad::{
    adaptive_gk, adaptive_gk_real, integrate_left_singular, integrate_right_singular,
};

/// The closed unit equilateral triangle with vertices 0, i, (sqrt3+i)/2.
#[derive(Debug, Clone, Copy)]
pub struct TriangleDomain {
    pub vertices: [C; 3],
}

impl Default for TriangleDomain {
    fn default() -> Self {
        Self::new()
    }
}

impl TriangleDomain {
    pub fn new() -> Self {
        TriangleDomain {
            vertices: [c(0.0, 0.0), c(0.0, 1.0), c(SQRT3 / 2.0, 0.5)],
        }
    }

    /// Closed-triangle membership with a small tolerance for boundary points.
    pub fn contains(&self, u: C) -> bool {
        let [v0, v1, v2] = self.vertices;
        // The listed vertex order is clockwise; all cross products must be <= 0.
        let cross = |p: C, q: C, r: C| (q - p).re * (r - p).im - (q - p).im * (r - p).re;
        let tol = 1e-12;
        cross(v0, v1, u) <= tol && cross(v1, v2, u) <= tol && cross(v2, v0, u) <= tol
    }

    pub fn centroid(&self) -> C {
        (self.vertices[0] + self.vertices[1] + self.vertices[2]) / 3.0
    }
}

/// A Moebius transformation (a z + b) / (cc z + d).
#[derive(Debug, Clone, Copy)]
pub struct Mobius {
    pub a: C,
    pub b: C,
    pub cc: C,
    pub d: C,
}

impl Mobius {
    pub fn identity() -> Self {
        Mobius {
            a: c(1.0, 0.0),
            b: c(0.0, 0.0),
            cc: c(0.0, 0.0),
            d: c(1.0, 0.0),
        }
    }

    /// The unique Moebius map sending (p, q, r) to (0, 1, inf).
    fn to_zero_one_inf(p: ExtComplex, q: ExtComplex, r: ExtComplex) -> Self {
        use ExtComplex::*;
        match (p, q, r) {
            (Finite(p), Finite(q), Finite(r)) => Mobius {
                a: q - r,
                b: -p * (q - r),
                cc: q - p,
                d: -r * (q - p),
            },
            (Infinity, Finite(q), Finite(r)) => Mobius {
                a: c(0.0, 0.0),
                b: q - r,
                cc: c(1.0, 0.0),
                d: -r,
            },
            (Finite(p), Infinity, Finite(r)) => Mobius {
                a: c(1.0, 0.0),
                b: -p,
                cc: c(1.0, 0.0),
                d: -r,
            },
            (Finite(p), Finite(q), Infinity) => Mobius {
                a: c(1.0, 0.0),
                b: -p,
                cc: c(0.0, 0.0),
                d: q - p,
            },
            _ => panic!("triple contains a repeated point at infinity"),
        }
    }

    /// The Moebius map sending one triple of distinct sphere points to another.
    pub fn from_triple_to_triple(src: [ExtComplex; 3], dst: [ExtComplex; 3]) -> Self {
        let t1 = Self::to_zero_one_inf(src[0], src[1], src[2]);
        let t2 = Self::to_zero_one_inf(dst[0], dst[1], dst[2]);
        t2.inverse().compose(&t1)
    }

    pub fn inverse(&self) -> Self {
        Mobius {
            a: self.d,
            b: -self.b,
            cc: -self.cc,
            d: self.a,
        }
    }

    /// self after other: (self . other)(z) = self(other(z)).
    pub fn compose(&self, other: &Mobius) -> Self {
        Mobius {
            a: self.a * other.a + self.b * other.cc,
            b: self.a * other.b + self.b * other.d,
            cc: self.cc * other.a + self.d * other.cc,
            d: self.cc * other.b + self.d * other.d,
        }
    }

    pub fn apply(&self, z: ExtComplex) -> ExtComplex {
        match z {
            ExtComplex::Finite(z) => {
                let den = self.cc * z + self.d;
                if den.norm() == 0.0 {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::Finite((self.a * z + self.b) / den)
                }
            }
            ExtComplex::Infinity => {
                if self.cc.norm() == 0.0 {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::Finite(self.a / self.cc)
                }
            }
        }
    }

    /// Derivative at a finite point that is not the pole.
    pub fn deriv(&self, z: C) -> C {
        let den = self.cc * z + self.d;
        (self.a * self.d - self.b * self.cc) / (den * den)
    }
}

/// The three critical values, in the order the triangle vertices map to them.
#[derive(Debug, Clone, Copy)]
pub struct CriticalTriple {
    pub points: [ExtComplex; 3],
}

impl CriticalTriple {
    /// Example normalization: vertices (0, i, (sqrt3+i)/2) map to
    /// (inf, -ia, +ia). The critical-value set is {ia, -ia, inf}.
    pub fn example(a: f64) -> Self {
        CriticalTriple {
            points: [
                ExtComplex::Infinity,
                ExtComplex::Finite(c(0.0, -a)),
                ExtComplex::Finite(c(0.0, a)),
            ],
        }
    }

    /// Proof normalization: a real triple A < B < C.
    pub fn real(a: f64, b: f64, cc: f64) -> Result<Self> {
        if !(a < b && b < cc) {
            return Err(Error::InvalidInput {
                what: format!("real triple must be increasing, got ({a}, {b}, {cc})"),
            });
        }
        Ok(CriticalTriple {
            points: [
                ExtComplex::Finite(c(a, 0.0)),
                ExtComplex::Finite(c(b, 0.0)),
                ExtComplex::Finite(c(cc, 0.0)),
            ],
        })
    }

    pub fn is_example(&self, a: f64) -> bool {
        let ex = Self::example(a);
        self.points
            .iter()
            .zip(&ex.points)
            .all(|(p, q)| p.chordal_dist(*q) < 1e-14)
    }
}

/// The conformal map g of the unit triangle onto a half-plane with the given
/// critical triple, together with its Schwarz–Christoffel inverse.
#[derive(Debug, Clone)]
pub struct TriangleMap {
    pub domain: TriangleDomain,
    pub triple: CriticalTriple,
    wp: Wp,
    /// Moebius map from the example triple (inf, -ia, ia) to `triple`.
    mobius: Mobius,
    is_example: bool,
    /// Normalization constant of the Schwarz–Christoffel integral.
    csc: C,
}

impl TriangleMap {
    pub fn new(triple: CriticalTriple) -> Self {
        let wp = Wp::new();
        let a = wp.constants.a;
        let example = CriticalTriple::example(a);
        let is_example = triple.is_example(a);
        let mobius = if is_example {
            Mobius::identity()
        } else {
            Mobius::from_triple_to_triple(example.points, triple.points)
        };
        let mut map = TriangleMap {
            domain: TriangleDomain::new(),
            triple,
            wp,
            mobius,
            is_example,
            csc: c(1.0, 0.0),
        };
        // Fix the SC constant by the vertex correspondence: g sends the vertex
        // (sqrt3+i)/2 to +ia and i to -ia, so the integral from ia to -ia must
        // traverse the triangle edge from (sqrt3+i)/2 to i.
        let j = map.sc_integral(c(0.0, -a), true);
        map.csc = (c(0.0, 1.0) - c(SQRT3 / 2.0, 0.5)) / j;
        map
    }

    pub fn example() -> Self {
        let a = crate::elliptic::compute_constants(12).a;
        Self::new(CriticalTriple::example(a))
    }

    pub fn a(&self) -> f64 {
        self.wp.constants.a
    }

    pub fn wp(&self) -> &Wp {
        &self.wp
    }

    /// The conformal map g on the closed triangle.
    pub fn map_g(&self, u: C) -> Result<ExtComplex> {
        if !self.domain.contains(u) {
            return Err(Error::OutsideDomain {
                point: u,
                what: "map_g is defined on the closed unit triangle",
            });
        }
        let w = self.wp.wp_prime(u);
        Ok(self.mobius.apply(w))
    }

    /// Membership of w in the closed target half-plane (image of the triangle).
    pub fn in_target(&self, w: ExtComplex) -> bool {
        let w_ex = self.mobius.inverse().apply(w);
        match w_ex {
            ExtComplex::Infinity => true, // image of the vertex 0
            ExtComplex::Finite(z) => z.re >= -1e-9 * (1.0 + z.norm()),
        }
    }

    /// Integral from ia to w of (zeta^2+a^2)^(-2/3) d zeta in the closed right
    /// half-plane (the example normalization). When `to_neg_ia` is set the
    /// endpoint is the opposite branch point and its exponent is absorbed too.
    fn sc_integral(&self, w: C, to_neg_ia: bool) -> C {
        let a = self.a();
        let ia = c(0.0, a);
        let nia = c(0.0, -a);
        let integrand = move |zeta: C| {
            let f = zeta * zeta + c(a * a, 0.0);
            f.powf(-2.0 / 3.0)
        };
        // Route around the lower branch point when the straight segment from
        // ia would pass too close to it.
        let mut waypoints = vec![ia];
        if to_neg_ia || dist_point_segment(nia, ia, w) < 0.2 * a {
            waypoints.push(c(0.8 * a, 0.0));
        }
        waypoints.push(w);

        let mut total = c(0.0, 0.0);
        let nseg = waypoints.len() - 1;
        for (si, pair) in waypoints.windows(2).enumerate() {
            let (p, q) = (pair[0], pair[1]);
            let first = si == 0;
            let last = si == nseg - 1;
            if first {
                // Singular start at ia. Split so the Jacobi rule only covers a
                // piece on which the smooth part stays at scale a.
                let len = (q - p).norm();
                let rho = len.min(1.5 * a);
                let p1 = p + (q - p) * (rho / len);
                let dir = p1 - p;
                total += dir
                    * integrate_left_singular(48, -2, |t| {
                        let zeta = p + dir * t;
                        integrand(zeta) * t.powf(2.0 / 3.0)
                    });
                if rho < len {
                    let dir2 = q - p1;
                    total += dir2
                        * adaptive_gk(|t| integrand(p1 + dir2 * t), 0.0, 1.0, 1e-11, 1e-13)
                            .expect("SC tail quadrature");
                }
            } else if last && to_neg_ia {
                let dir = q - p;
                total += dir
                    * integrate_right_singular(48, -2, |t| {
                        let zeta = p + dir * t;
                        integrand(zeta) * (1.0 - t).powf(2.0 / 3.0)
                    });
            } else {
                let dir = q - p;
                total += dir
                    * adaptive_gk(|t| integrand(p + dir * t), 0.0, 1.0, 1e-11, 1e-13)
                        .expect("SC segment quadrature");
            }
        }
        total
    }

    /// The inverse map, target half-plane -> closed triangle, by
    /// Schwarz–Christoffel quadrature (independent of wp').
    pub fn map_g_inverse(&self, w: ExtComplex) -> Result<C> {
        if !self.in_target(w) {
            let point = w.finite().unwrap_or_default();
            return Err(Error::OutsideDomain {
                point,
                what: "map_g_inverse is defined on the closed target half-plane",
            });
        }
        let a = self.a();
        let w_ex = self.mobius.inverse().apply(w);
        let w_ex = match w_ex {
            ExtComplex::Infinity => return Ok(self.domain.vertices[0]),
            ExtComplex::Finite(z) => z,
        };
        if (w_ex - c(0.0, -a)).norm() < 1e-12 {
            return Ok(self.domain.vertices[1]);
        }
        if (w_ex - c(0.0, a)).norm() < 1e-12 {
            return Ok(self.domain.vertices[2]);
        }
        let u = c(SQRT3 / 2.0, 0.5) + self.csc * self.sc_integral(w_ex, false);
        Ok(u)
    }

    /// The flat metric induced by this map.
    pub fn rho0(&self) -> FlatMetricRho0 {
        FlatMetricRho0 {
            a: self.a(),
            c_abs: self.csc.norm(),
            mobius_inv: self.mobius.inverse(),
            is_example: self.is_example,
            punctures: self.triple.points,
        }
    }
}

/// The flat conformal metric rho0 on the sphere minus the three critical
/// values: ds = |(g^-1)'(w)| |dw| on the defining half-plane, extended to the
/// whole sphere by the reflection symmetry.
#[derive(Debug, Clone)]
pub struct FlatMetricRho0 {
    a: f64,
    c_abs: f64,
    mobius_inv: Mobius,
    is_example: bool,
    punctures: [ExtComplex; 3],
}

impl FlatMetricRho0 {
    /// Density in the example normalization: |C| |w^2 + a^2|^(-2/3). The
    /// formula is invariant under the reflection w -> -conj(w), so it covers
    /// both half-planes at once.
    fn density_example(&self, w: C) -> f64 {
        let f = w * w + c(self.a * self.a, 0.0);
        self.c_abs * f.norm().powf(-2.0 / 3.0)
    }

    fn density_general(&self, w: C) -> f64 {
        if self.is_example {
            self.density_example(w)
        } else {
            match self.mobius_inv.apply(ExtComplex::Finite(w)) {
                ExtComplex::Infinity => 0.0,
                ExtComplex::Finite(q) => self.density_example(q) * self.mobius_inv.deriv(w).norm(),
            }
        }
    }

    /// Length density at w. Errors at the three punctures.
    pub fn density(&self, w: ExtComplex) -> Result<f64> {
        for p in &self.punctures {
            if w.chordal_dist(*p) < 1e-13 {
                return Err(Error::MetricSingularity {
                    point: w.finite().unwrap_or_default(),
                });
            }
        }
        match w {
            ExtComplex::Infinity => Ok(0.0),
            ExtComplex::Finite(z) => Ok(self.density_general(z)),
        }
    }

    /// Length of a polyline, by adaptive quadrature per segment.
    pub fn length(&self, path: &[C]) -> Result<f64> {
        if path.len() < 2 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for pair in path.windows(2) {
            let (p, q) = (pair[0], pair[1]);
            for punct in &self.punctures {
                if let ExtComplex::Finite(b) = punct {
                    if dist_point_segment(*b, p, q) < 1e-12 {
                        return Err(Error::MetricSingularity { point: *b });
                    }
                }
            }
            let dir = q - p;
            let len = dir.norm();
            if len == 0.0 {
                continue;
            }
            let seg = adaptive_gk_real(|t| self.density_general(p + dir * t), 0.0, 1.0, 1e-7, 1e-12)?;
            total += seg * len;
        }
        Ok(total)
    }

    /// Area of one quarter-plane {x > 0, y > 0} in the example normalization.
    /// The area integrand rho^2 has a boundary singularity at w = ia and decay
    /// |w|^(-8/3); both are removed by explicit substitutions.
    fn quarter_area_example(&self) -> f64 {
        let a = self.a;
        let inner = |y: f64| -> f64 {
            let rho2 = |x: f64| {
                let d = self.density_example(c(x, y));
                d * d
            };
            let x_split = 2.0 * a.max(y.abs());
            let near =
                adaptive_gk_real(rho2, 0.0, x_split, 1e-9, 1e-14).expect("inner area quadrature");
            // Tail x in [x_split, inf): substitute x = x_split / v.
            let tail = adaptive_gk_real(
                |v| {
                    let x = x_split / v;
                    rho2(x) * x_split / (v * v)
                },
                1e-12,
                1.0,
                1e-9,
                1e-14,
            )
            .expect("inner tail quadrature");
            near + tail
        };
        // y in [0, a]: y = a (1 - tau^3) kills the |y-a|^(-1/3) edge behavior.
        let below = adaptive_gk_real(
            |tau| inner(a * (1.0 - tau * tau * tau)) * 3.0 * a * tau * tau,
            0.0,
            1.0,
            1e-7,
            1e-12,
        )
        .expect("outer quadrature below a");
        let above = adaptive_gk_real(
            |tau| inner(a * (1.0 + tau * tau * tau)) * 3.0 * a * tau * tau,
            0.0,
            1.0,
            1e-7,
            1e-12,
        )
        .expect("outer quadrature above a");
        // y in [2a, inf): the inner integral decays like y^(-5/3); substitute
        // y = 2a/u with a Jacobi rule for the u^(-1/3) endpoint factor.
        let far = integrate_left_singular(48, -1, |u| {
            let y = 2.0 * a / u;
            c(inner(y) * (2.0 * a / (u * u)) * u.powf(1.0 / 3.0), 0.0)
        })
        .re;
        below + above + far
    }

    /// Total area of one half-plane (isometric to one unit triangle: sqrt3/4).
    pub fn half_plane_area(&self) -> f64 {
        2.0 * self.quarter_area_example()
    }

    /// Total rho0-area of the sphere (should be sqrt3/2).
    pub fn sphere_area(&self) -> f64 {
        4.0 * self.quarter_area_example()
    }

    /// rho0-length of the full partition boundary through the three punctures
    /// (the image of the triangle's three sides; equals 3).
    pub fn boundary_circle_length(&self) -> f64 {
        let a = self.a;
        let rho = |y: f64| self.density_example(c(0.0, y));
        let mid = adaptive_gk_real(
            |tau| rho(a * (1.0 - tau * tau * tau)) * 3.0 * a * tau * tau,
            0.0,
            1.0,
            1e-8,
            1e-12,
        )
        .expect("boundary mid");
        let upper = adaptive_gk_real(
            |tau| rho(a * (1.0 + tau * tau * tau)) * 3.0 * a * tau * tau,
            0.0,
            1.0,
            1e-8,
            1e-12,
        )
        .expect("boundary upper");
        let far = integrate_left_singular(48, -2, |u| {
            let y = 2.0 * a / u;
            c(rho(y) * (2.0 * a / (u * u)) * u.powf(2.0 / 3.0), 0.0)
        })
        .re;
        // Symmetric in y: the segment [-ia, ia] contributes twice `mid`, and
        // each of the two rays contributes `upper + far`.
        2.0 * (mid + upper + far)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn example_map() -> TriangleMap {
        TriangleMap::example()
    }

    #[test]
    fn vertex_correspondence() {
        let map = example_map();
        let a = map.a();
        assert!(map.map_g(c(0.0, 0.0)).unwrap().is_infinite());
        let w1 = map.map_g(c(0.0, 1.0)).unwrap().finite().unwrap();
        assert!((w1 - c(0.0, -a)).norm() < 1e-9, "g(i) = {w1}");
        let w2 = map.map_g(c(SQRT3 / 2.0, 0.5)).unwrap().finite().unwrap();
        assert!((w2 - c(0.0, a)).norm() < 1e-9, "g(v2) = {w2}");
        // Midpoint of the edge from i to (sqrt3+i)/2 maps to 0.
        let mid = (c(0.0, 1.0) + c(SQRT3 / 2.0, 0.5)) * 0.5;
        let wm = map.map_g(mid).unwrap().finite().unwrap();
        assert!(wm.norm() < 1e-9, "g(midpoint) = {wm}");
    }

    #[test]
    fn outside_domain_rejected() {
        let map = example_map();
        assert!(matches!(
            map.map_g(c(-0.2, 0.5)),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(matches!(
            map.map_g_inverse(ExtComplex::Finite(c(-1.0, 0.0))),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn map_agrees_with_wp_prime_inside() {
        // Interior sample: the two normalizations of g are the same function.
        let map = example_map();
        let u = c(0.4, 0.5);
        assert!(map.domain.contains(u));
        let g = map.map_g(u).unwrap().finite().unwrap();
        let wp = map.wp().wp_prime(u).finite().unwrap();
        assert!((g - wp).norm() < 1e-10);
    }

    #[test]
    fn inverse_vertices() {
        let map = example_map();
        let a = map.a();
        assert_eq!(
            map.map_g_inverse(ExtComplex::Infinity).unwrap(),
            c(0.0, 0.0)
        );
        let u1 = map.map_g_inverse(ExtComplex::Finite(c(0.0, -a))).unwrap();
        assert!((u1 - c(0.0, 1.0)).norm() < 1e-12);
        let u2 = map.map_g_inverse(ExtComplex::Finite(c(0.0, a))).unwrap();
        assert!((u2 - c(SQRT3 / 2.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn sc_constant_magnitude() {
        // Frozen oracle: |C| = 1 / integral_{-a}^{a} (a^2-y^2)^(-2/3) dy
        //              = 0.419973683298291054922403535759...
        let map = example_map();
        assert_relative_eq!(map.csc.norm(), 0.419_973_683_298_291_05, epsilon = 1e-10);
    }

    #[test]
    fn roundtrip_inverse_of_forward() {
        // map_g via wp' and map_g_inverse via SC quadrature are independent
        // implementations; their roundtrip validates both.
        let map = example_map();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let [v0, v1, v2] = map.domain.vertices;
        let mut count = 0;
        while count < 100 {
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let (r1, r2) = if r1 + r2 > 1.0 {
                (1.0 - r1, 1.0 - r2)
            } else {
                (r1, r2)
            };
            let u = v0 + (v1 - v0) * r1 + (v2 - v0) * r2;
            // Stay away from the vertices where the roundtrip tolerance would
            // be dominated by the cube-root branch behavior.
            if (u - v0).norm() < 0.1 || (u - v1).norm() < 0.1 || (u - v2).norm() < 0.1 {
                continue;
            }
            let w = map.map_g(u).unwrap();
            let u_back = map.map_g_inverse(w).unwrap();
            assert!(
                (u_back - u).norm() < 1e-8,
                "roundtrip error {} at u = {u}",
                (u_back - u).norm()
            );
            count += 1;
        }
    }

    #[test]
    fn forward_of_inverse_on_target() {
        let map = example_map();
        let a = map.a();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let mut count = 0;
        while count < 50 {
            let w = c(
                rng.random_range(0.0..4.0 * a),
                rng.random_range(-3.0 * a..3.0 * a),
            );
            if (w - c(0.0, a)).norm() < 0.3 * a || (w + c(0.0, a)).norm() < 0.3 * a {
                continue;
            }
            let u = map.map_g_inverse(ExtComplex::Finite(w)).unwrap();
            assert!(
                map.domain.contains(u),
                "u = {u} outside triangle for w = {w}"
            );
            let w_back = map.map_g(u).unwrap().finite().unwrap();
            assert!(
                (w_back - w).norm() < 1e-8 * (1.0 + w.norm()),
                "g(g^-1(w)) error {} at w = {w}",
                (w_back - w).norm()
            );
            count += 1;
        }
    }

    #[test]
    fn conformality_residual() {
        // Discrete Cauchy-Riemann residual of map_g on an interior grid.
        let map = example_map();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for i in 1..6 {
            for j in 1..6 {
                let u = c(0.1 + 0.1 * i as f64, 0.15 + 0.1 * j as f64);
                if !map.domain.contains(u)
                    || !map.domain.contains(u + c(h, 0.0))
                    || !map.domain.contains(u + c(0.0, h))
                {
                    continue;
                }
                let g = |z: C| map.wp().wp_prime(z).finite().unwrap();
                let dx = (g(u + c(h, 0.0)) - g(u - c(h, 0.0))) / (2.0 * h);
                let dy = (g(u + c(0.0, h)) - g(u - c(0.0, h))) / (2.0 * h * c(0.0, 1.0));
                let scale = dx.norm().max(1.0);
                worst = worst.max((dx - dy).norm() / scale);
            }
        }
        assert!(worst < 1e-6, "CR residual {worst}");
    }

    #[test]
    fn vertex_angle_exponent() {
        // |g^-1(w) - vertex| ~ |w - w0|^(1/3) at the finite critical values.
        let map = example_map();
        let a = map.a();
        for (w0, vertex) in [(c(0.0, a), c(SQRT3 / 2.0, 0.5)), (c(0.0, -a), c(0.0, 1.0))] {
            let e1 = 1e-5;
            let e2 = 1e-3;
            let d1 = (map
                .map_g_inverse(ExtComplex::Finite(w0 + c(e1, 0.0)))
                .unwrap()
                - vertex)
                .norm();
            let d2 = (map
                .map_g_inverse(ExtComplex::Finite(w0 + c(e2, 0.0)))
                .unwrap()
                - vertex)
                .norm();
            let slope = (d1 / d2).ln() / (e1 / e2).ln();
            assert!((slope - 1.0 / 3.0).abs() < 0.01, "slope = {slope}");
        }
    }

    #[test]
    fn density_reflection_symmetry() {
        let map = example_map();
        let rho = map.rho0();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let w = c(rng.random_range(0.01..20.0), rng.random_range(-20.0..20.0));
            let d1 = rho.density(ExtComplex::Finite(w)).unwrap();
            let d2 = rho.density(ExtComplex::Finite(c(-w.re, w.im))).unwrap();
            assert_relative_eq!(d1, d2, epsilon = 1e-14);
            assert!(d1 > 0.0);
        }
    }

    #[test]
    fn density_errors_at_punctures() {
        let map = example_map();
        let rho = map.rho0();
        let a = map.a();
        assert!(matches!(
            rho.density(ExtComplex::Finite(c(0.0, a))),
            Err(Error::MetricSingularity { .. })
        ));
        assert!(matches!(
            rho.density(ExtComplex::Infinity),
            Err(Error::MetricSingularity { .. })
        ));
    }

    #[test]
    fn density_matches_wp_second_derivative() {
        // g is an isometry, so rho0(wp'(u)) * |wp''(u)| = 1 inside the triangle.
        let map = example_map();
        let rho = map.rho0();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        let [v0, v1, v2] = map.domain.vertices;
        let mut count = 0;
        while count < 50 {
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let (r1, r2) = if r1 + r2 > 1.0 {
                (1.0 - r1, 1.0 - r2)
            } else {
                (r1, r2)
            };
            let u = v0 + (v1 - v0) * r1 + (v2 - v0) * r2;
            if (u - v0).norm() < 0.05 || (u - v1).norm() < 0.05 || (u - v2).norm() < 0.05 {
                continue;
            }
            let w = map.wp().wp_prime(u).finite().unwrap();
            let pp = map.wp().wp_pp(u).finite().unwrap();
            let d = rho.density(ExtComplex::Finite(w)).unwrap();
            assert_relative_eq!(d * pp.norm(), 1.0, epsilon = 1e-7);
            count += 1;
        }
    }

    #[test]
    fn straight_segments_are_isometric() {
        // The image under g of a straight segment inside the triangle has
        // rho0-length equal to its Euclidean length.
        let map = example_map();
        let rho = map.rho0();
        for (p, q) in [
            (c(0.2, 0.5), c(0.5, 0.6)),
            (c(0.3, 0.3), c(0.4, 0.7)),
            (c(0.15, 0.35), c(0.65, 0.55)),
        ] {
            let euclid = (q - p).norm();
            let len = adaptive_gk_real(
                |t| {
                    let u = p + (q - p) * t;
                    let w = map.wp().wp_prime(u).finite().unwrap();
                    let dw = map.wp().wp_pp(u).finite().unwrap() * (q - p);
                    rho.density(ExtComplex::Finite(w)).unwrap() * dw.norm()
                },
                0.0,
                1.0,
                1e-8,
                1e-12,
            )
            .unwrap();
            assert_relative_eq!(len, euclid, epsilon = 1e-5);
        }
    }

    #[test]
    fn polyline_length_and_reflection() {
        let map = example_map();
        let rho = map.rho0();
        let path = [c(1.0, 0.0), c(2.0, 1.0), c(3.0, -1.0)];
        let reflected: Vec<C> = path.iter().map(|w| c(-w.re, w.im)).collect();
        let l1 = rho.length(&path).unwrap();
        let l2 = rho.length(&reflected).unwrap();
        assert_relative_eq!(l1, l2, epsilon = 1e-9);
        // A path through a puncture errors.
        let a = map.a();
        let bad = [c(0.0, 0.0), c(0.0, 2.0 * a)];
        assert!(matches!(
            rho.length(&bad),
            Err(Error::MetricSingularity { .. })
        ));
    }

    #[test]
    fn half_plane_and_sphere_area() {
        let map = example_map();
        let rho = map.rho0();
        let half = rho.half_plane_area();
        assert_relative_eq!(half, SQRT3 / 4.0, epsilon = 1e-5 * SQRT3 / 4.0);
        let total = rho.sphere_area();
        assert_relative_eq!(total, SQRT3 / 2.0, epsilon = 1e-5 * SQRT3 / 2.0);
    }

    #[test]
    fn boundary_circle_has_length_three() {
        let map = example_map();
        let rho = map.rho0();
        assert_relative_eq!(rho.boundary_circle_length(), 3.0, epsilon = 3e-5);
    }

    #[test]
    fn general_real_triple() {
        // Moebius reduction: vertices map to (A, B, C) in order and the
        // roundtrip through the pulled-back inverse holds.
        let triple = CriticalTriple::real(-1.0, 0.0, 2.0).unwrap();
        let map = TriangleMap::new(triple);
        let va = map.map_g(c(0.0, 0.0)).unwrap().finite().unwrap();
        assert!((va - c(-1.0, 0.0)).norm() < 1e-9, "A image {va}");
        let vb = map.map_g(c(0.0, 1.0)).unwrap().finite().unwrap();
        assert!((vb - c(0.0, 0.0)).norm() < 1e-9, "B image {vb}");
        let vc = map.map_g(c(SQRT3 / 2.0, 0.5)).unwrap().finite().unwrap();
        assert!((vc - c(2.0, 0.0)).norm() < 1e-9, "C image {vc}");
        for u in [c(0.3, 0.5), c(0.5, 0.55), c(0.25, 0.4)] {
            let w = map.map_g(u).unwrap();
            let back = map.map_g_inverse(w).unwrap();
            assert!(
                (back - u).norm() < 1e-8,
                "roundtrip {} at {u}",
                (back - u).norm()
            );
        }
        // The triangle interior lands in a single half-plane.
        let im0 = map.map_g(c(0.3, 0.5)).unwrap().finite().unwrap().im;
        let im1 = map.map_g(c(0.6, 0.6)).unwrap().finite().unwrap().im;
        assert!(im0 * im1 > 0.0);
    }

    #[test]
    fn real_triple_validation() {
        assert!(CriticalTriple::real(1.0, 0.0, 2.0).is_err());
        assert!(CriticalTriple::real(0.0, 0.0, 1.0).is_err());
    }
}
