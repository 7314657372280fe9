//! The extremal functions: the integral I(z), the cylinder function f1 and the
//! plane function f0, with explicit branch tracking.
//!
//! All multivalued evaluation goes through [`BranchPath`]: a polyline from a
//! fixed base point along which the integrand of
//! I(z) = integral from 0 to z of zeta^(-2/3) (1-zeta)^(-1/3) d zeta
//! is continued analytically. Within one segment the continued arguments of
//! zeta and 1-zeta move by less than pi, so they are recovered from principal
//! values relative to the segment start; across segments the accumulated
//! arguments are carried in a continuation state. No global branch state
//! exists anywhere.

use crate::cnum::{c, dist_point_segment, ExtComplex, C};
use crate::elliptic::{Wp, SQRT3};
use crate::error::{Error, Result};
use crate::quad::{adaptive_gk, integrate_left_singular, integrate_right_singular};

/// Minimum clearance of a path segment from the branch points {0, 1}.
pub const PATH_CLEARANCE: f64 = 1e-3;

/// u = SCALE * I(z) and u = SCALE * log z are the half-plane coordinates fed
/// to wp'; SCALE = sqrt(3) / (2 pi i).
pub fn scale() -> C {
    c(0.0, -SQRT3 / (2.0 * std::f64::consts::PI))
}

/// A polyline from a fixed base point along which multivalued functions are
/// continued. Segments keep clearance from the branch points 0 and 1, except
/// that the first waypoint may be 0 (the base of I) and the last may be
/// exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPath {
    waypoints: Vec<C>,
}

impl BranchPath {
    pub fn new(waypoints: Vec<C>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::InvalidInput {
                what: "path needs at least one waypoint".into(),
            });
        }
        let path = BranchPath { waypoints };
        path.validate()?;
        Ok(path)
    }

    pub fn waypoints(&self) -> &[C] {
        &self.waypoints
    }

    pub fn base(&self) -> C {
        self.waypoints[0]
    }

    pub fn endpoint(&self) -> C {
        *self.waypoints.last().unwrap()
    }

    fn validate(&self) -> Result<()> {
        let n = self.waypoints.len();
        for (i, seg) in self.waypoints.windows(2).enumerate() {
            let (p, q) = (seg[0], seg[1]);
            for (bp_idx, bp) in [c(0.0, 0.0), c(1.0, 0.0)].into_iter().enumerate() {
                let start_at_bp = i == 0 && (p - bp).norm() == 0.0;
                let end_at_bp = i == n - 2 && (q - bp).norm() == 0.0;
                if start_at_bp || end_at_bp {
                    // Exact singular endpoints are absorbed by the quadrature
                    // weight; the segment must still clear the other point.
                    continue;
                }
                let d = dist_point_segment(bp, p, q);
                if d < PATH_CLEARANCE {
                    return Err(Error::BranchPointHit {
                        point: bp,
                        index: i,
                        clearance: d,
                    });
                }
                let _ = bp_idx;
            }
        }
        Ok(())
    }

    /// Straight path from `base`, detouring around the branch points if the
    /// direct segment comes too close; the detour stays in the homotopy class
    /// of paths that do not wind.
    pub fn direct(base: C, z: C) -> Result<Self> {
        if BranchPath::new(vec![base, z]).is_ok() {
            return BranchPath::new(vec![base, z]);
        }
        // Lift over both branch points through a waypoint above the segment.
        let lift = c(0.45, 0.8 * (1.0 + z.norm()).min(4.0));
        BranchPath::new(vec![base, lift, z])
    }

    /// A path from `base` to `z` that first makes `turns` full loops around
    /// the branch point `around` (0 or 1) on a circle of the given radius.
    pub fn with_loop(base: C, z: C, around: C, turns: i32, radius: f64) -> Result<Self> {
        let mut pts = vec![base];
        let start_angle = (base - around).arg();
        let entry = around + C::from_polar(radius, start_angle);
        pts.push(entry);
        let steps = 8 * turns.unsigned_abs() as usize;
        let dir = turns.signum() as f64;
        for s in 1..=steps {
            let ang = start_angle + dir * 2.0 * std::f64::consts::PI * s as f64 / 8.0;
            pts.push(around + C::from_polar(radius, ang));
        }
        pts.push(z);
        BranchPath::new(pts)
    }
}

/// The analytic continuation of a germ along a path.
#[derive(Debug, Clone)]
pub struct ContinuedValue {
    pub value: C,
    pub path: BranchPath,
}

/// Continuation state after traversing part of a path: the current point and
/// the accumulated arguments of zeta and of 1 - zeta.
#[derive(Debug, Clone, Copy)]
struct ContState {
    zeta: C,
    theta0: f64,
    theta1: f64,
}

impl ContState {
    fn integrand(&self, zeta: C, d0: f64, d1: f64) -> C {
        // zeta^(-2/3) (1-zeta)^(-1/3) with tracked arguments.
        let log_mod = -(2.0 / 3.0) * zeta.norm().ln() - (1.0 / 3.0) * (c(1.0, 0.0) - zeta).norm().ln();
        let phase = -(2.0 / 3.0) * (self.theta0 + d0) - (1.0 / 3.0) * (self.theta1 + d1);
        C::from_polar(log_mod.exp(), phase)
    }
}

/// Evaluators for I, f1 and f0 built on one shared wp instance.
#[derive(Debug, Clone)]
pub struct ExtremalMap {
    wp: Wp,
}

impl Default for ExtremalMap {
    fn default() -> Self {
        Self::new()
    }
}

impl ExtremalMap {
    pub fn new() -> Self {
        ExtremalMap { wp: Wp::new() }
    }

    pub fn wp(&self) -> &Wp {
        &self.wp
    }

    pub fn a(&self) -> f64 {
        self.wp.constants.a
    }

    /// I(z) continued along the path. The path must start at 0; the principal
    /// determination on (0, 1) uses positive cube roots.
    pub fn integral_i(&self, path: &BranchPath) -> Result<C> {
        if path.base().norm() != 0.0 {
            return Err(Error::InvalidInput {
                what: format!("integral_I path must start at 0, got {}", path.base()),
            });
        }
        path.validate()?;
        let mut total = c(0.0, 0.0);
        let mut state: Option<ContState> = None;
        let waypoints = path.waypoints();
        let n = waypoints.len();
        for i in 0..n.saturating_sub(1) {
            let p = waypoints[i];
            let q = waypoints[i + 1];
            if (q - p).norm() == 0.0 {
                continue;
            }
            let last = i == n - 2;
            match state {
                None => {
                    // First segment, starting at the branch point 0.
                    if last && (q - c(1.0, 0.0)).norm() == 0.0 {
                        // Both endpoints singular: split at the midpoint.
                        let mid = c(0.5, 0.0);
                        let (v1, st1) = self.first_segment(mid);
                        let v2 = self.segment_to_one(&st1, mid);
                        total += v1 + v2;
                        state = None; // endpoint at 1; nothing may follow
                    } else {
                        let (v, st) = self.first_segment(q);
                        total += v;
                        state = Some(st);
                    }
                }
                Some(st) => {
                    if last && (q - c(1.0, 0.0)).norm() == 0.0 {
                        total += self.segment_to_one(&st, p);
                        state = None;
                    } else {
                        let (v, st2) = self.middle_segment(&st, p, q);
                        total += v;
                        state = Some(st2);
                    }
                }
            }
        }
        Ok(total)
    }

    pub fn integral_i_continued(&self, path: &BranchPath) -> Result<ContinuedValue> {
        Ok(ContinuedValue {
            value: self.integral_i(path)?,
            path: path.clone(),
        })
    }

    /// First segment [0, q]: the zeta^(-2/3) factor is split into the Jacobi
    /// weight t^(-2/3) and the constant q^(-2/3) on the segment's branch.
    fn first_segment(&self, q: C) -> (C, ContState) {
        let theta_q = q.arg();
        // Keep the Jacobi rule on a piece where the smooth factor has scale 1.
        let len = q.norm();
        let rho = len.min(0.5);
        let q1 = q * (rho / len);
        let factor = C::from_polar(q1.norm().powf(-2.0 / 3.0), -(2.0 / 3.0) * theta_q);
        let mut v = q1
            * factor
            * integrate_left_singular(48, -2, |t| {
                let zeta = q1 * t;
                let one_minus = c(1.0, 0.0) - zeta;
                // |arg(1 - zeta)| < pi along a segment from 0 avoiding 1.
                C::from_polar(one_minus.norm().powf(-1.0 / 3.0), -(1.0 / 3.0) * one_minus.arg())
            });
        let mut st = ContState {
            zeta: q1,
            theta0: theta_q,
            theta1: (c(1.0, 0.0) - q1).arg(),
        };
        if rho < len {
            let (v2, st2) = self.middle_segment(&st, q1, q);
            v += v2;
            st = st2;
        }
        (v, st)
    }

    /// Generic interior segment [p, q], both endpoints regular.
    fn middle_segment(&self, st: &ContState, p: C, q: C) -> (C, ContState) {
        debug_assert!((st.zeta - p).norm() < 1e-12);
        // Split internally while the segment subtends a wide angle at a branch
        // point, keeping the principal-argument recovery comfortably valid.
        let subtend = |b: C| ((p - b).arg() - (q - b).arg()).rem_euclid(2.0 * std::f64::consts::PI);
        let wide = |b: C| {
            let s = subtend(b);
            s.min(2.0 * std::f64::consts::PI - s) > 2.0
        };
        if wide(c(0.0, 0.0)) || wide(c(1.0, 0.0)) {
            let mid = (p + q) * 0.5;
            let (v1, st1) = self.middle_segment(st, p, mid);
            let (v2, st2) = self.middle_segment(&st1, mid, q);
            return (v1 + v2, st2);
        }
        let one = c(1.0, 0.0);
        let f = |t: f64| {
            let zeta = p + (q - p) * t;
            let d0 = (zeta / p).arg();
            let d1 = ((one - zeta) / (one - p)).arg();
            st.integrand(zeta, d0, d1)
        };
        let v = adaptive_gk(f, 0.0, 1.0, 1e-10, 1e-14).expect("segment quadrature") * (q - p);
        let st2 = ContState {
            zeta: q,
            theta0: st.theta0 + (q / p).arg(),
            theta1: st.theta1 + ((one - q) / (one - p)).arg(),
        };
        (v, st2)
    }

    /// Final segment from p straight into the branch point 1. Along it
    /// 1 - zeta = (1 - p)(1 - t), so the argument of 1 - zeta is constant and
    /// the (1-t)^(-1/3) factor is absorbed by the Jacobi weight.
    fn segment_to_one(&self, st: &ContState, p: C) -> C {
        let one = c(1.0, 0.0);
        let dir = one - p;
        let one_minus_p_factor = C::from_polar(dir.norm().powf(-1.0 / 3.0), -(1.0 / 3.0) * st.theta1);
        dir * one_minus_p_factor
            * integrate_right_singular(48, -1, |t| {
                let zeta = p + dir * t;
                let d0 = (zeta / p).arg();
                C::from_polar(
                    zeta.norm().powf(-2.0 / 3.0),
                    -(2.0 / 3.0) * (st.theta0 + d0),
                )
            })
    }

    /// The cylinder function f1(z) = wp'( SCALE (Log z + 2 pi i sheet) ).
    /// Well-defined on C*: the sheet only shifts the argument by a period.
    pub fn f1(&self, z: C, sheet: i64) -> Result<ExtComplex> {
        if z.norm() == 0.0 {
            return Err(Error::EssentialSingularity { point: z });
        }
        let log_z = c(z.norm().ln(), z.arg()) + c(0.0, 2.0 * std::f64::consts::PI * sheet as f64);
        Ok(self.wp.wp_prime(scale() * log_z))
    }

    /// The half-plane coordinate of f1 at z (principal sheet).
    pub fn f1_u(&self, z: C) -> Result<C> {
        if z.norm() == 0.0 {
            return Err(Error::EssentialSingularity { point: z });
        }
        Ok(scale() * c(z.norm().ln(), z.arg()))
    }

    /// u(z) = SCALE * I(z) continued along a path from the base point 1/2.
    pub fn f0_u(&self, path: &BranchPath) -> Result<C> {
        if (path.base() - c(0.5, 0.0)).norm() > 1e-14 {
            return Err(Error::InvalidInput {
                what: format!("f0 path must start at 1/2, got {}", path.base()),
            });
        }
        let mut pts = vec![c(0.0, 0.0)];
        pts.extend_from_slice(path.waypoints());
        let full = BranchPath::new(pts)?;
        Ok(scale() * self.integral_i(&full)?)
    }

    /// The plane extremal function f0 = wp'(u) along a path from 1/2. The
    /// value depends only on the endpoint.
    pub fn f0(&self, path: &BranchPath) -> Result<ExtComplex> {
        Ok(self.wp.wp_prime(self.f0_u(path)?))
    }

    /// f0 at a point via a default non-winding path.
    pub fn f0_at(&self, z: C) -> Result<ExtComplex> {
        let path = BranchPath::direct(c(0.5, 0.0), z)?;
        self.f0(&path)
    }

    /// All critical points of f1 in the annulus 1 <= |z| <= r (the essential
    /// singularity at 0 accumulates critical points, so the unit circle is the
    /// natural inner cutoff, matching the counting domain). Exact lattice
    /// enumeration; every critical point has local degree 3.
    pub fn critical_points_f1(&self, r: f64) -> Result<Vec<(C, u32)>> {
        if r <= 1.0 {
            return Err(Error::InvalidInput {
                what: format!("need r > 1, got {r}"),
            });
        }
        let h = SQRT3 / (2.0 * std::f64::consts::PI) * r.ln();
        let mut out = Vec::new();
        // Critical u-classes modulo sqrt(3)Z on the cylinder: the poles
        // (lattice points, u = sqrt3 n omega) and the two wp-zero classes
        // (u = +-i + sqrt3 n omega), with Im u in [-h, 0].
        let omega2 = self.wp.lattice.omega2;
        for base_im in [0.0, 1.0, -1.0] {
            let base = c(0.0, base_im);
            // Im(base + n omega2) = base_im + 1.5 n in [-h, 0].
            let n_lo = ((-h - base_im) / 1.5).ceil() as i64;
            let n_hi = ((0.0 - base_im) / 1.5).floor() as i64;
            for n in n_lo..=n_hi {
                let u = base + omega2 * n as f64;
                let z = ((c(0.0, 2.0 * std::f64::consts::PI) / SQRT3) * u).exp();
                out.push((z, 3));
            }
        }
        out.sort_by(|p, q| p.0.norm().partial_cmp(&q.0.norm()).unwrap());
        Ok(out)
    }

    /// Critical points of f0 in |z| <= r: preimages of {ia, -ia} (zeros of
    /// wp(u(z)), local degree 3) and multiple poles (u(z) in the lattice,
    /// local degree 3), plus the exceptional point z = 1 of local degree 2.
    /// The simple pole at z = 0 is not a critical point and is not reported.
    pub fn critical_points_f0(&self, r: f64) -> Result<Vec<(C, u32)>> {
        if r < 1.0 {
            return Err(Error::InvalidInput {
                what: format!("need r >= 1, got {r}"),
            });
        }
        let mut found: Vec<(C, u32)> = vec![(c(1.0, 0.0), 2)];
        let n_rad = (10.0 * (r / 0.2).ln()).ceil() as usize;
        let n_ang = 24;
        for ir in 0..n_rad {
            let rad = 0.2 * (r / 0.2).powf((ir as f64 + 0.5) / n_rad as f64);
            for ia in 0..n_ang {
                let ang = 2.0 * std::f64::consts::PI * (ia as f64 + 0.31) / n_ang as f64;
                let seed = C::from_polar(rad, ang);
                if (seed - c(1.0, 0.0)).norm() < 0.05 || seed.norm() < 0.05 {
                    continue;
                }
                for pole_target in [false, true] {
                    if let Some(z) = self.newton_f0_critical(seed, pole_target) {
                        if z.norm() > r + 1e-9 || z.norm() < 1e-6 || (z - c(1.0, 0.0)).norm() < 1e-6
                        {
                            continue;
                        }
                        // Verify the candidate on a freshly continued branch.
                        let ok = match self.f0_at(z) {
                            Ok(ExtComplex::Infinity) => pole_target,
                            Ok(ExtComplex::Finite(v)) => {
                                if pole_target {
                                    v.norm() > 1e6
                                } else {
                                    let aa = self.a();
                                    (v - c(0.0, aa)).norm() < 1e-6 * aa
                                        || (v + c(0.0, aa)).norm() < 1e-6 * aa
                                }
                            }
                            Err(_) => false,
                        };
                        if !ok {
                            continue;
                        }
                        if !found
                            .iter()
                            .any(|(w, _)| (w - z).norm() < 1e-6 * (1.0 + z.norm()))
                        {
                            found.push((z, 3));
                        }
                    }
                }
            }
        }
        found.sort_by(|p, q| {
            (p.0.norm(), p.0.arg())
                .partial_cmp(&(q.0.norm(), q.0.arg()))
                .unwrap()
        });
        Ok(found)
    }

    /// Newton iteration on wp(u(z)) = 0 (or on a pole of wp(u(z)) when
    /// `pole_target`). The coordinate u(z) is recomputed from scratch each
    /// iterate; the branch may change between iterates, but both the target
    /// condition and the Newton step are invariant under the monodromy
    /// symmetries of wp', so the iteration is unaffected.
    fn newton_f0_critical(&self, seed: C, pole_target: bool) -> Option<C> {
        let mut z = seed;
        for _ in 0..40 {
            let path = BranchPath::direct(c(0.5, 0.0), z).ok()?;
            let u = self.f0_u(&path).ok()?;
            let theta0 = self.path_theta(&path, 0);
            let theta1 = self.path_theta(&path, 1);
            let u_prime = scale()
                * C::from_polar(
                    z.norm().powf(-2.0 / 3.0) * (c(1.0, 0.0) - z).norm().powf(-1.0 / 3.0),
                    -(2.0 / 3.0) * theta0 - (1.0 / 3.0) * theta1,
                );
            let step = match self.wp.all(u) {
                // Inside the pole cutoff of wp: u is a lattice point to 1e-9.
                None => return if pole_target { Some(z) } else { None },
                Some((p, dp, _)) => {
                    if pole_target {
                        if p.norm() > 1e16 {
                            return Some(z);
                        }
                        // Double zero of 1/wp: z <- z - 2 V/V' = z + 2 p/(wp' u').
                        p / (dp * u_prime) * 2.0
                    } else {
                        if p.norm() < 1e-10 {
                            return Some(z);
                        }
                        -(p / (dp * u_prime))
                    }
                }
            };
            let cap = 0.25 * z.norm().min((z - c(1.0, 0.0)).norm()).min(1.0);
            let step = if step.norm() > cap {
                step * (cap / step.norm())
            } else {
                step
            };
            let z_new = z + step;
            if z_new.norm() < 2.0 * PATH_CLEARANCE
                || (z_new - c(1.0, 0.0)).norm() < 2.0 * PATH_CLEARANCE
            {
                return None;
            }
            z = z_new;
        }
        None
    }

    /// Accumulated argument of zeta (which = 0) or 1 - zeta (which = 1) at the
    /// end of a path, by segment-wise principal increments.
    fn path_theta(&self, path: &BranchPath, which: usize) -> f64 {
        let b = if which == 0 { c(0.0, 0.0) } else { c(1.0, 0.0) };
        let pts = path.waypoints();
        let mut theta;
        let mut prev;
        if (pts[0] - b).norm() == 0.0 {
            // Path starts at the branch point itself: the germ argument is set
            // by the first segment's direction.
            theta = (pts[1] - b).arg();
            prev = pts[1];
        } else {
            theta = (pts[0] - b).arg();
            prev = pts[0];
        }
        for &q in &pts[1..] {
            if (q - prev).norm() == 0.0 {
                continue;
            }
            theta += ((q - b) / (prev - b)).arg();
            prev = q;
        }
        theta
    }

    /// Spherical derivative of f0 at z, given the continued coordinate u(z):
    /// |f0'| / (1 + |f0|^2). Branch-independent.
    pub fn f0_spherical_deriv(&self, z: C, u: C) -> f64 {
        let u_prime_abs =
            scale().norm() * z.norm().powf(-2.0 / 3.0) * (c(1.0, 0.0) - z).norm().powf(-1.0 / 3.0);
        self.wp_spherical_factor(u) * u_prime_abs
    }

    /// Spherical derivative of f1 at z (principal sheet).
    pub fn f1_spherical_deriv(&self, z: C) -> Result<f64> {
        let u = self.f1_u(z)?;
        Ok(self.wp_spherical_factor(u) * scale().norm() / z.norm())
    }

    /// |wp''(u)| / (1 + |wp'(u)|^2), stable through the poles.
    pub fn wp_spherical_factor(&self, u: C) -> f64 {
        match self.wp.all(u) {
            Some((_, dp, pp)) => pp.norm() / (1.0 + dp.norm_sqr()),
            None => {
                // At a pole: wp'' / wp'^2 -> 6 u^-4 / (4 u^-6) = 1.5 |u|^2.
                let (ur, _, _) = self.wp.lattice.reduce(u);
                1.5 * ur.norm_sqr()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    const TWO_PI_OVER_SQRT3: f64 = 3.627_598_728_468_435_7;
    // Frozen oracle (40-digit arithmetic): I(1/2) = B(1/2; 1/3, 2/3).
    const I_HALF: f64 = 2.506_946_544_794_163_2;

    fn map() -> ExtremalMap {
        ExtremalMap::new()
    }

    /// Independent oracle for I on (0,1): the incomplete Beta series
    /// B(z; a, b) = z^a sum_n ((1-b)_n / n!) z^n / (a + n).
    fn incomplete_beta_series(z: f64) -> f64 {
        let (a, b) = (1.0 / 3.0, 2.0 / 3.0);
        let mut term = 1.0; // (1-b)_n / n!
        let mut sum = 1.0 / a;
        let mut zn = 1.0;
        for n in 1..200 {
            let nf = n as f64;
            term *= (nf - b) / nf;
            zn *= z;
            let add = term * zn / (a + nf);
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        z.powf(a) * sum
    }

    #[test]
    fn path_validation() {
        assert!(BranchPath::new(vec![c(0.0, 0.0), c(0.5, 0.0)]).is_ok());
        // Passing through 1 mid-path is rejected.
        assert!(matches!(
            BranchPath::new(vec![c(0.0, 0.0), c(2.0, 0.0)]),
            Err(Error::BranchPointHit { .. })
        ));
        // Exact final endpoint at 1 is allowed.
        assert!(BranchPath::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).is_ok());
        // Degenerate path is allowed and integrates to zero.
        let m = map();
        let p = BranchPath::new(vec![c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(m.integral_i(&p).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn i_of_one_is_two_pi_over_sqrt3() {
        let m = map();
        let path = BranchPath::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let v = m.integral_i(&path).unwrap();
        assert!(v.im.abs() < 1e-12);
        assert_relative_eq!(v.re, TWO_PI_OVER_SQRT3, epsilon = 1e-9 * TWO_PI_OVER_SQRT3);
    }

    #[test]
    fn i_matches_series_oracle_on_unit_interval() {
        let m = map();
        for z in [0.1, 0.25, 0.5, 0.7, 0.9] {
            let path = BranchPath::new(vec![c(0.0, 0.0), c(z, 0.0)]).unwrap();
            let v = m.integral_i(&path).unwrap();
            let oracle = incomplete_beta_series(z);
            assert!(v.im.abs() < 1e-11);
            assert_relative_eq!(v.re, oracle, epsilon = 1e-9 * oracle);
        }
        // Frozen digits at z = 1/2.
        let path = BranchPath::new(vec![c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let v = m.integral_i(&path).unwrap();
        assert_relative_eq!(v.re, I_HALF, epsilon = 1e-9 * I_HALF);
    }

    #[test]
    fn i_monotone_on_unit_interval() {
        let m = map();
        let mut prev = 0.0;
        for i in 1..20 {
            let z = i as f64 / 20.0;
            let path = BranchPath::new(vec![c(0.0, 0.0), c(z, 0.0)]).unwrap();
            let v = m.integral_i(&path).unwrap();
            assert!(v.re > prev);
            prev = v.re;
        }
    }

    #[test]
    fn i_additivity_across_waypoints() {
        // Same endpoint, homotopic paths with different waypoint chains.
        let m = map();
        let z = c(-0.7, 0.9);
        let p1 = BranchPath::new(vec![c(0.0, 0.0), z]).unwrap();
        let p2 = BranchPath::new(vec![c(0.0, 0.0), c(0.2, 0.4), c(-0.3, 0.8), z]).unwrap();
        let v1 = m.integral_i(&p1).unwrap();
        let v2 = m.integral_i(&p2).unwrap();
        assert!((v1 - v2).norm() < 1e-10, "difference {}", (v1 - v2).norm());
    }

    #[test]
    fn i_derivative_asymptotics() {
        // |z I'(z)| -> 1 along rays: checked at |z| = 1e3, 1e4, 1e5 within 1%.
        for radius in [1e3, 1e4, 1e5] {
            let z = C::from_polar(radius, 2.4);
            let modulus = z.norm().powf(-2.0 / 3.0) * (c(1.0, 0.0) - z).norm().powf(-1.0 / 3.0);
            let v = z.norm() * modulus;
            assert!((v - 1.0).abs() < 0.01, "|z I'| = {v} at {radius}");
        }
    }

    #[test]
    fn f1_sheet_independence() {
        let m = map();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let z = C::from_polar(rng.random_range(0.2..50.0), rng.random_range(-3.1..3.1));
            let v0 = m.f1(z, 0).unwrap();
            let v7 = m.f1(z, 7).unwrap();
            match (v0, v7) {
                (ExtComplex::Finite(p), ExtComplex::Finite(q)) => {
                    assert!((p - q).norm() < 1e-8 * (1.0 + p.norm()), "sheet mismatch at {z}")
                }
                (a, b) => assert_eq!(a.is_infinite(), b.is_infinite()),
            }
        }
    }

    #[test]
    fn f1_pole_on_positive_axis() {
        // u = SCALE log z hits the lattice point -3i at z = exp(2 sqrt3 pi).
        let m = map();
        let z = c((2.0 * SQRT3 * std::f64::consts::PI).exp(), 0.0);
        assert!(m.f1(z, 0).unwrap().is_infinite());
        assert!(matches!(
            m.f1(c(0.0, 0.0), 0),
            Err(Error::EssentialSingularity { .. })
        ));
    }

    #[test]
    fn f0_single_valued_across_homotopy_classes() {
        let m = map();
        let base = c(0.5, 0.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        let mut done = 0;
        while done < 12 {
            let z = c(rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5));
            if z.norm() < 0.4 || (z - c(1.0, 0.0)).norm() < 0.4 {
                continue;
            }
            let direct = BranchPath::direct(base, z).unwrap();
            let loop0 = BranchPath::with_loop(base, z, c(0.0, 0.0), 1, 0.3).unwrap();
            let loop1 = BranchPath::with_loop(base, z, c(1.0, 0.0), 1, 0.3).unwrap();
            let loop0m = BranchPath::with_loop(base, z, c(0.0, 0.0), -1, 0.25).unwrap();
            let vals: Vec<ExtComplex> = [direct, loop0, loop1, loop0m]
                .iter()
                .map(|p| m.f0(p).unwrap())
                .collect();
            for v in &vals[1..] {
                let d = vals[0].chordal_dist(*v);
                assert!(d < 1e-8, "f0 spread {d} at z = {z}");
            }
            done += 1;
        }
    }

    #[test]
    fn f0_u_differs_across_classes_but_value_agrees() {
        // The coordinate u genuinely changes under the loop (the monodromy is
        // a nontrivial symmetry of wp'), while f0 does not.
        let m = map();
        let z = c(-1.2, 0.7);
        let direct = BranchPath::direct(c(0.5, 0.0), z).unwrap();
        let looped = BranchPath::with_loop(c(0.5, 0.0), z, c(0.0, 0.0), 1, 0.3).unwrap();
        let u1 = m.f0_u(&direct).unwrap();
        let u2 = m.f0_u(&looped).unwrap();
        assert!((u1 - u2).norm() > 1e-3, "loop around 0 should move u");
        let v1 = m.wp().wp_prime(u1);
        let v2 = m.wp().wp_prime(u2);
        assert!(v1.chordal_dist(v2) < 1e-8);
    }

    #[test]
    fn f0_values_beyond_branch_cut_along_real_axis() {
        // f0 is meromorphic in the plane; approaching a real point x > 1 from
        // above and below must agree.
        let m = map();
        let eps = 1e-6;
        let above = m.f0_at(c(1.9, eps)).unwrap();
        let below = m.f0_at(c(1.9, -eps)).unwrap();
        assert!(above.chordal_dist(below) < 1e-4, "mismatch across the cut");
    }

    #[test]
    fn f1_critical_points_exact() {
        let m = map();
        let r = 1e4;
        let pts = m.critical_points_f1(r).unwrap();
        // Every critical point has order 3 and the critical value is one of
        // {ia, -ia, inf}.
        let a = m.a();
        for &(z, ord) in &pts {
            assert_eq!(ord, 3);
            assert!(z.norm() >= 1.0 - 1e-9 && z.norm() <= r * (1.0 + 1e-9));
            match m.f1(z, 0).unwrap() {
                ExtComplex::Infinity => {}
                ExtComplex::Finite(v) => {
                    assert!(
                        (v - c(0.0, a)).norm() < 1e-6 * a || (v + c(0.0, a)).norm() < 1e-6 * a,
                        "crit value {v}"
                    );
                }
            }
        }
        // Count growth matches the sheet-count slope sqrt3/pi within 10%; the
        // O(1) boundary terms need a long window before the slope settles.
        let (r_lo, r_hi) = (1e2, 1e12);
        let n_lo = m.critical_points_f1(r_lo).unwrap().len() as f64;
        let n_hi = m.critical_points_f1(r_hi).unwrap().len() as f64;
        let slope = (n_hi - n_lo) / (r_hi.ln() - r_lo.ln());
        let expect = SQRT3 / std::f64::consts::PI;
        assert!((slope - expect).abs() / expect < 0.1, "slope {slope}");
    }

    #[test]
    fn f0_critical_points_small_disc() {
        let m = map();
        let r = 6.0;
        let pts = m.critical_points_f0(r).unwrap();
        let a = m.a();
        // z = 1 is present with local degree 2.
        assert!(pts
            .iter()
            .any(|&(z, ord)| (z - c(1.0, 0.0)).norm() < 1e-9 && ord == 2));
        // All other points have degree 3 and critical values in the triple.
        for &(z, ord) in &pts {
            if (z - c(1.0, 0.0)).norm() < 1e-9 {
                continue;
            }
            assert_eq!(ord, 3);
            match m.f0_at(z).unwrap() {
                ExtComplex::Infinity => {}
                ExtComplex::Finite(v) => {
                    assert!(
                        (v - c(0.0, a)).norm() < 1e-5 * a || (v + c(0.0, a)).norm() < 1e-5 * a,
                        "crit value {v} at {z}"
                    );
                }
            }
        }
        // The local degree at z = 1 really is 2: f0(1+h)-f0(1) ~ h^2. The
        // offsets stay above the path clearance; the subleading correction is
        // O(h^(2/3)), hence the loose ratio tolerance.
        let w0 = m.f0_at(c(1.0, 5e-3)).unwrap();
        let w1 = m.f0_at(c(1.0, 1e-2)).unwrap();
        if let (ExtComplex::Finite(p), ExtComplex::Finite(q)) = (w0, w1) {
            let v_at_1 = c(0.0, a); // f0(1) = wp'(-i) = +ia
            let ratio = (q - v_at_1).norm() / (p - v_at_1).norm();
            assert!((ratio - 4.0).abs() < 0.25, "degree-2 ratio {ratio}");
        } else {
            panic!("finite values expected near z = 1");
        }
    }

    #[test]
    fn f0_spherical_derivative_scale_invariant_at_large_radius() {
        // No asymptotic values: the sup over a decade annulus of
        // |z| * (spherical derivative) stays within a factor 3 from decade to
        // decade. Sampling whole annuli covers all heights of the u-lattice.
        let m = map();
        let mut sups = Vec::new();
        for dec in 0..3 {
            let r_lo = 10f64.powi(3 + dec);
            let mut sup: f64 = 0.0;
            for j in 0..10 {
                let radius = r_lo * 10f64.powf(j as f64 / 10.0);
                for k in 0..32 {
                    let ang = 0.1 + 2.0 * std::f64::consts::PI * k as f64 / 32.0;
                    let z = C::from_polar(radius, ang);
                    let path = BranchPath::direct(c(0.5, 0.0), z).unwrap();
                    let u = m.f0_u(&path).unwrap();
                    sup = sup.max(m.f0_spherical_deriv(z, u) * radius);
                }
            }
            sups.push(sup);
        }
        let lo = sups.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = sups.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo < 3.0, "sups {sups:?}");
    }
}
