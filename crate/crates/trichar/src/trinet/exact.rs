//! Exact arithmetic for the hexagonal tiling: integer coordinates in the
//! basis (1, w) with w = exp(i pi / 3), and exact plane isometries.
//!
//! Every vertex of the unit-triangle tiling is m + n w with integers m, n;
//! reflections in tiling edges and the whole reflection group preserve this
//! set, so developing maps, holonomies and systole candidates never leave
//! integer arithmetic. Squared lengths are the norm form m^2 + mn + n^2.

use serde::{Deserialize, Serialize};

/// A point (or vector) m + n w of the hexagonal lattice, w = exp(i pi/3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Eisen {
    pub m: i64,
    pub n: i64,
}

impl Eisen {
    pub const ZERO: Eisen = Eisen { m: 0, n: 0 };
    pub const ONE: Eisen = Eisen { m: 1, n: 0 };
    /// w itself (rotation by 60 degrees as a multiplier).
    pub const W: Eisen = Eisen { m: 0, n: 1 };

    pub fn new(m: i64, n: i64) -> Self {
        Eisen { m, n }
    }

    pub fn add(self, o: Eisen) -> Eisen {
        Eisen::new(self.m + o.m, self.n + o.n)
    }

    pub fn sub(self, o: Eisen) -> Eisen {
        Eisen::new(self.m - o.m, self.n - o.n)
    }

    pub fn neg(self) -> Eisen {
        Eisen::new(-self.m, -self.n)
    }

    /// Complex multiplication: w^2 = w - 1.
    pub fn mul(self, o: Eisen) -> Eisen {
        Eisen::new(
            self.m * o.m - self.n * o.n,
            self.m * o.n + self.n * o.m + self.n * o.n,
        )
    }

    /// Complex conjugation: conj(w) = 1 - w.
    pub fn conj(self) -> Eisen {
        Eisen::new(self.m + self.n, -self.n)
    }

    /// Squared modulus, the norm form m^2 + mn + n^2.
    pub fn norm_sqr(self) -> i64 {
        self.m * self.m + self.m * self.n + self.n * self.n
    }

    pub fn is_zero(self) -> bool {
        self.m == 0 && self.n == 0
    }

    /// True when the vector is a translation of the reflection group of the
    /// unit triangle (the label-preserving sublattice m = n mod 3).
    pub fn is_reflection_group_translation(self) -> bool {
        (self.m - self.n).rem_euclid(3) == 0
    }

    /// Decompose a reflection-group translation as (1 + w)(p + q w), so that
    /// the squared length is 3 (p^2 + pq + q^2).
    pub fn hexagonal_coordinates(self) -> Option<(i64, i64)> {
        // (m + n w)(2 - w)/3 = ((2m + n) + (n - m) w)/3.
        let p3 = 2 * self.m + self.n;
        let q3 = self.n - self.m;
        if p3.rem_euclid(3) == 0 && q3.rem_euclid(3) == 0 {
            Some((p3 / 3, q3 / 3))
        } else {
            None
        }
    }

    /// Vertex label class of the tiling vertex: (m - n) mod 3. Adjacent
    /// vertices always fall in different classes.
    pub fn label_class(self) -> u8 {
        (self.m - self.n).rem_euclid(3) as u8
    }

    pub fn to_complex(self) -> (f64, f64) {
        (
            self.m as f64 + 0.5 * self.n as f64,
            3f64.sqrt() / 2.0 * self.n as f64,
        )
    }

    /// Exact coordinates as pairs (a + b sqrt3): x = (2m+n)/2 + 0*sqrt3,
    /// y = 0 + (n/2) sqrt3. Returned as f64 half-integers (exact in binary).
    pub fn qsqrt3_coordinates(self) -> [[f64; 2]; 2] {
        [
            [self.m as f64 + self.n as f64 / 2.0, 0.0],
            [0.0, self.n as f64 / 2.0],
        ]
    }
}

/// The six point-group classes of the reflection group of a unit triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointGroup {
    Identity,
    Rotation120,
    Rotation240,
    Reflection0,
    Reflection60,
    Reflection120,
}

/// An exact isometry of the plane preserving the tiling:
/// z -> rot * z + trans, or z -> rot * conj(z) + trans when `flip` is set.
/// `rot` is always one of the six units w^k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Isometry {
    pub rot: Eisen,
    pub flip: bool,
    pub trans: Eisen,
}

impl Isometry {
    pub fn identity() -> Self {
        Isometry {
            rot: Eisen::ONE,
            flip: false,
            trans: Eisen::ZERO,
        }
    }

    pub fn apply(&self, p: Eisen) -> Eisen {
        let p = if self.flip { p.conj() } else { p };
        self.rot.mul(p).add(self.trans)
    }

    /// self after other.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        // self(other(z)): rot_s * (rot_o z' + t_o)' + t_s.
        if self.flip {
            Isometry {
                rot: self.rot.mul(other.rot.conj()),
                flip: !other.flip,
                trans: self.rot.mul(other.trans.conj()).add(self.trans),
            }
        } else {
            Isometry {
                rot: self.rot.mul(other.rot),
                flip: other.flip,
                trans: self.rot.mul(other.trans).add(self.trans),
            }
        }
    }

    pub fn is_translation(&self) -> bool {
        !self.flip && self.rot == Eisen::ONE
    }

    /// Classify the linear part into the six point-group classes. Returns
    /// None for units outside the triangle group (rotations by 60 degrees).
    pub fn point_group(&self) -> Option<PointGroup> {
        let w = Eisen::W;
        let r2 = w.mul(w); // rotation by 120
        let r4 = r2.mul(r2); // rotation by 240
        match (self.flip, self.rot) {
            (false, r) if r == Eisen::ONE => Some(PointGroup::Identity),
            (false, r) if r == r2 => Some(PointGroup::Rotation120),
            (false, r) if r == r4 => Some(PointGroup::Rotation240),
            // Reflection across a line of angle theta has rot = exp(2 i theta).
            (true, r) if r == Eisen::ONE => Some(PointGroup::Reflection0),
            (true, r) if r == r2 => Some(PointGroup::Reflection60),
            (true, r) if r == r4 => Some(PointGroup::Reflection120),
            _ => None,
        }
    }
}

/// Exact placement of a triangle: its three corners as tiling vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Placement {
    pub corners: [Eisen; 3],
}

impl Placement {
    /// The canonical base placement (0, 1, w), counterclockwise.
    pub fn canonical() -> Self {
        Placement {
            corners: [Eisen::ZERO, Eisen::ONE, Eisen::W],
        }
    }

    /// Validate that this is a unit tiling triangle.
    pub fn is_unit_triangle(&self) -> bool {
        let [a, b, cc] = self.corners;
        b.sub(a).norm_sqr() == 1 && cc.sub(b).norm_sqr() == 1 && a.sub(cc).norm_sqr() == 1
    }

    /// Counterclockwise orientation test.
    pub fn is_ccw(&self) -> bool {
        let d1 = self.corners[1].sub(self.corners[0]);
        let d2 = self.corners[2].sub(self.corners[0]);
        d1.m * d2.n - d2.m * d1.n > 0
    }

    /// Reflect point p across the line through corners s and s+1 (a unit
    /// edge): r = a + u^2 conj(p - a) with u the unit edge vector.
    pub fn reflect_across_side(&self, s: usize, p: Eisen) -> Eisen {
        let a = self.corners[s];
        let b = self.corners[(s + 1) % 3];
        let u = b.sub(a);
        debug_assert_eq!(u.norm_sqr(), 1);
        a.add(u.mul(u).mul(p.sub(a).conj()))
    }

    /// The isometry carrying `self` onto `target` (corner k to corner k).
    /// Requires both placements to have the same orientation.
    pub fn isometry_to(&self, target: &Placement) -> Option<Isometry> {
        if self.is_ccw() != target.is_ccw() {
            return None;
        }
        // rot = (f1 - f0) / (p1 - p0); unit edges make the division exact:
        // 1/u = conj(u) for |u|^2 = 1.
        let du = self.corners[1].sub(self.corners[0]);
        let dv = target.corners[1].sub(target.corners[0]);
        let rot = dv.mul(du.conj());
        let trans = target.corners[0].sub(rot.mul(self.corners[0]));
        let iso = Isometry {
            rot,
            flip: false,
            trans,
        };
        if (0..3).all(|k| iso.apply(self.corners[k]) == target.corners[k]) {
            Some(iso)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_arithmetic() {
        let w = Eisen::W;
        // w^6 = 1, w^3 = -1.
        let w3 = w.mul(w).mul(w);
        assert_eq!(w3, Eisen::new(-1, 0));
        let w6 = w3.mul(w3);
        assert_eq!(w6, Eisen::ONE);
        // |w| = 1, conj(w) = 1 - w = w^5.
        assert_eq!(w.norm_sqr(), 1);
        assert_eq!(w.conj(), Eisen::new(1, -1));
        assert_eq!(w.mul(w.conj()), Eisen::ONE);
    }

    #[test]
    fn norm_form_values() {
        // Values of m^2+mn+n^2 on the reflection-group sublattice are
        // 3(a^2+ab+b^2): 3, 9, 12, 21, ...
        let mut values = std::collections::BTreeSet::new();
        for m in -6i64..=6 {
            for n in -6i64..=6 {
                let v = Eisen::new(m, n);
                if !v.is_zero() && v.is_reflection_group_translation() {
                    values.insert(v.norm_sqr());
                    let (p, q) = v.hexagonal_coordinates().unwrap();
                    assert_eq!(v.norm_sqr(), 3 * (p * p + p * q + q * q));
                }
            }
        }
        let smallest: Vec<i64> = values.into_iter().take(5).collect();
        assert_eq!(smallest, vec![3, 9, 12, 21, 27]);
    }

    #[test]
    fn labels_alternate_on_edges() {
        for m in -4i64..=4 {
            for n in -4i64..=4 {
                let v = Eisen::new(m, n);
                for step in [Eisen::ONE, Eisen::W, Eisen::new(-1, 1)] {
                    assert_ne!(v.label_class(), v.add(step).label_class());
                }
            }
        }
    }

    #[test]
    fn reflection_is_involutive_and_exact() {
        let pl = Placement::canonical();
        assert!(pl.is_unit_triangle());
        assert!(pl.is_ccw());
        for s in 0..3 {
            let p = Eisen::new(3, -2);
            let r = pl.reflect_across_side(s, p);
            assert_eq!(pl.reflect_across_side(s, r), p);
            // The side endpoints are fixed.
            assert_eq!(pl.reflect_across_side(s, pl.corners[s]), pl.corners[s]);
        }
    }

    #[test]
    fn isometry_composition_and_recovery() {
        let a = Isometry {
            rot: Eisen::W.mul(Eisen::W),
            flip: false,
            trans: Eisen::new(2, -1),
        };
        let b = Isometry {
            rot: Eisen::ONE,
            flip: true,
            trans: Eisen::new(0, 3),
        };
        let p = Eisen::new(5, 7);
        assert_eq!(a.compose(&b).apply(p), a.apply(b.apply(p)));
        assert_eq!(b.compose(&a).apply(p), b.apply(a.apply(p)));

        let src = Placement::canonical();
        let iso = Isometry {
            rot: Eisen::W.mul(Eisen::W),
            flip: false,
            trans: Eisen::new(1, 1),
        };
        let dst = Placement {
            corners: [
                iso.apply(src.corners[0]),
                iso.apply(src.corners[1]),
                iso.apply(src.corners[2]),
            ],
        };
        assert_eq!(src.isometry_to(&dst), Some(iso));
    }

    #[test]
    fn point_group_classification() {
        let r120 = Isometry {
            rot: Eisen::W.mul(Eisen::W),
            flip: false,
            trans: Eisen::ZERO,
        };
        assert_eq!(r120.point_group(), Some(PointGroup::Rotation120));
        let rot60 = Isometry {
            rot: Eisen::W,
            flip: false,
            trans: Eisen::ZERO,
        };
        assert_eq!(rot60.point_group(), None);
        let refl = Isometry {
            rot: Eisen::ONE,
            flip: true,
            trans: Eisen::ZERO,
        };
        assert_eq!(refl.point_group(), Some(PointGroup::Reflection0));
    }
}
