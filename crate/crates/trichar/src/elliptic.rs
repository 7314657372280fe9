//! The equiharmonic period lattice and its Weierstrass functions.
//!
//! Everything here is specialized to the hexagonal lattice generated by
//! sqrt(3) and sqrt(3)*exp(2*pi*i/3), for which g2 = 0. Evaluation reduces the
//! argument to the Voronoi cell of the lattice (where |z| <= 1, well inside
//! the convergence radius sqrt(3) of the Laurent expansion at the origin) and
//! sums the expansion directly.

use crate::cnum::{c, ExtComplex, C};
use crate::error::{Error, Result};

/// Gamma(1/3), to well beyond f64 precision.
pub const GAMMA_ONE_THIRD: f64 = 2.678_938_534_707_747_6;

/// sqrt(3), the shortest period length.
pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Number of Laurent coefficients kept for the expansion of wp at 0.
const LAURENT_TERMS: usize = 44;

/// Generators of the lattice sqrt(3) * (Z + Z exp(2 pi i / 3)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquiharmonicLattice {
    pub omega1: C,
    pub omega2: C,
}

impl Default for EquiharmonicLattice {
    fn default() -> Self {
        Self::new()
    }
}

impl EquiharmonicLattice {
    pub fn new() -> Self {
        EquiharmonicLattice {
            omega1: c(SQRT3, 0.0),
            omega2: c(-SQRT3 / 2.0, 1.5),
        }
    }

    /// Basis coordinates (s, t) with z = s*omega1 + t*omega2.
    pub fn coords(&self, z: C) -> (f64, f64) {
        let t = z.im * 2.0 / 3.0;
        let s = z.re / SQRT3 + t / 2.0;
        (s, t)
    }

    pub fn point(&self, m: i64, n: i64) -> C {
        self.omega1 * m as f64 + self.omega2 * n as f64
    }

    /// Reduce z modulo the lattice to the representative of minimal modulus
    /// (a point of the Voronoi cell, so |reduced| <= 1). Returns the reduced
    /// point and the integer coordinates of the subtracted lattice vector.
    pub fn reduce(&self, z: C) -> (C, i64, i64) {
        let (s, t) = self.coords(z);
        let m0 = s.round() as i64;
        let n0 = t.round() as i64;
        let mut best = (z - self.point(m0, n0), m0, n0);
        for dm in -1..=1 {
            for dn in -1..=1 {
                let m = m0 + dm;
                let n = n0 + dn;
                let r = z - self.point(m, n);
                if r.norm_sqr() < best.0.norm_sqr() {
                    best = (r, m, n);
                }
            }
        }
        best
    }

    /// Reduce z into the fundamental cell {s*omega1 + t*omega2 : 0 <= s,t < 1}.
    pub fn reduce_to_cell(&self, z: C) -> C {
        let (s, t) = self.coords(z);
        let fs = s - s.floor();
        let ft = t - t.floor();
        self.omega1 * fs + self.omega2 * ft
    }

    /// Squared distance from z to the nearest lattice point.
    pub fn dist_sqr_to_lattice(&self, z: C) -> f64 {
        self.reduce(z).0.norm_sqr()
    }
}

/// Closed-form constants of the construction: k = Gamma(1/3)^3 / (2 pi sqrt 3),
/// a = k^3, and the lattice invariants g2 (= 0) and g3 (= k^6), the latter two
/// computed independently by Eisenstein series so the closed forms can be
/// cross-checked.
#[derive(Debug, Clone, Copy)]
pub struct EquiharmonicConstants {
    pub k: f64,
    pub a: f64,
    pub g2: f64,
    pub g3: f64,
}

/// Eisenstein sums 60*S4 and 140*S6 over the lattice, truncated at |w| <= radius.
/// The S4 sum cancels to rounding error because the truncation region is
/// invariant under the order-3 rotation fixing the lattice.
pub fn eisenstein_g2_g3(lattice: &EquiharmonicLattice, radius: f64) -> (f64, f64) {
    let q = (radius / SQRT3) * (radius / SQRT3);
    let m_max = (4.0 * q / 3.0).sqrt() as i64 + 2;
    let mut s4 = c(0.0, 0.0);
    let mut s6 = c(0.0, 0.0);
    let (mut comp4, mut comp6) = (c(0.0, 0.0), c(0.0, 0.0));
    for m in -m_max..=m_max {
        for n in -m_max..=m_max {
            if m == 0 && n == 0 {
                continue;
            }
            let norm = (m * m - m * n + n * n) as f64;
            if norm > q {
                continue;
            }
            let w = lattice.point(m, n);
            let w2 = w * w;
            let w4 = w2 * w2;
            let inv4 = w4.inv();
            let inv6 = (w4 * w2).inv();
            // Kahan compensation keeps the cancellation in S4 at rounding level.
            let y4 = inv4 - comp4;
            let t4 = s4 + y4;
            comp4 = (t4 - s4) - y4;
            s4 = t4;
            let y6 = inv6 - comp6;
            let t6 = s6 + y6;
            comp6 = (t6 - s6) - y6;
            s6 = t6;
        }
    }
    (60.0 * s4.re, 140.0 * s6.re)
}

/// Compute the constants at the requested number of decimal digits (clamped by
/// f64 precision; the Eisenstein truncation radius grows with `precision`).
pub fn compute_constants(precision: u32) -> EquiharmonicConstants {
    assert!(precision >= 10, "precision must be at least 10 digits");
    let k = GAMMA_ONE_THIRD.powi(3) / (2.0 * std::f64::consts::PI * SQRT3);
    let a = k.powi(3);
    let radius = (2.79 * 10f64.powi(precision as i32))
        .powf(0.25)
        .clamp(200.0, 1200.0);
    let (g2, g3) = eisenstein_g2_g3(&EquiharmonicLattice::new(), radius);
    EquiharmonicConstants { k, a, g2, g3 }
}

/// Evaluator for wp, wp' and wp'' on the equiharmonic lattice.
#[derive(Debug, Clone)]
pub struct Wp {
    pub lattice: EquiharmonicLattice,
    pub constants: EquiharmonicConstants,
    /// Laurent coefficients c_k, k = 2..LAURENT_TERMS, of
    /// wp(z) = z^-2 + sum c_k z^(2k-2).
    laurent: Vec<f64>,
    /// Below this distance from the lattice the value is reported as infinity.
    pole_tol: f64,
}

impl Default for Wp {
    fn default() -> Self {
        Self::new()
    }
}

impl Wp {
    pub fn new() -> Self {
        let constants = compute_constants(12);
        let lattice = EquiharmonicLattice::new();
        // c_2 = g2/20 = 0, c_3 = g3/28, then the classical quadratic recursion.
        let n = LAURENT_TERMS;
        let mut cks = vec![0.0; n + 1];
        cks[2] = 0.0;
        cks[3] = constants.g3 / 28.0;
        for k in 4..=n {
            let mut s = 0.0;
            for m in 2..=(k - 2) {
                s += cks[m] * cks[k - m];
            }
            cks[k] = 3.0 * s / ((2 * k + 1) as f64 * (k - 3) as f64);
        }
        Wp {
            lattice,
            constants,
            laurent: cks,
            pole_tol: 1e-9,
        }
    }

    pub fn a(&self) -> f64 {
        self.constants.a
    }

    fn series_all(&self, z: C) -> (C, C, C) {
        let z2 = z * z;
        let inv_z = z.inv();
        let inv_z2 = inv_z * inv_z;
        let mut p = inv_z2;
        let mut dp = inv_z2 * inv_z * -2.0;
        let mut pow = z2; // z^(2k-2) for k = 2
        for k in 2..self.laurent.len() {
            let ck = self.laurent[k];
            if ck != 0.0 {
                let term = pow * ck;
                p += term;
                dp += term * inv_z * (2 * k - 2) as f64;
            }
            pow *= z2;
        }
        let pp = p * p * 6.0; // wp'' = 6 wp^2 when g2 = 0
        (p, dp, pp)
    }

    /// wp, wp', wp'' at once (None at a lattice point: triple/double poles).
    pub fn all(&self, z: C) -> Option<(C, C, C)> {
        let (zr, _, _) = self.lattice.reduce(z);
        if zr.norm_sqr() < self.pole_tol * self.pole_tol {
            return None;
        }
        Some(self.series_all(zr))
    }

    pub fn wp(&self, z: C) -> ExtComplex {
        match self.all(z) {
            Some((p, _, _)) => ExtComplex::Finite(p),
            None => ExtComplex::Infinity,
        }
    }

    pub fn wp_prime(&self, z: C) -> ExtComplex {
        match self.all(z) {
            Some((_, dp, _)) => ExtComplex::Finite(dp),
            None => ExtComplex::Infinity,
        }
    }

    /// wp'' = 6 wp^2 (the lattice has g2 = 0).
    pub fn wp_pp(&self, z: C) -> ExtComplex {
        match self.all(z) {
            Some((_, _, pp)) => ExtComplex::Finite(pp),
            None => ExtComplex::Infinity,
        }
    }

    /// All solutions of wp'(z) = w in the fundamental cell
    /// {s*omega1 + t*omega2 : 0 <= s,t < 1}. wp' has order 3, so exactly three
    /// solutions exist for every w off the critical values {ia, -ia, inf}.
    pub fn solve_wp_prime(&self, w: C) -> Result<Vec<C>> {
        let a = self.constants.a;
        let tol_crit = 1e-6 * a;
        if (w - c(0.0, a)).norm() < tol_crit || (w + c(0.0, a)).norm() < tol_crit {
            return Err(Error::CriticalValueProximity {
                value: w,
                tol: tol_crit,
            });
        }
        if w.norm() > 1e9 {
            return Err(Error::CriticalValueProximity {
                value: w,
                tol: tol_crit,
            });
        }
        for grid in [8usize, 16, 24] {
            if let Some(roots) = self.try_solve_grid(w, grid) {
                return Ok(roots);
            }
        }
        Err(Error::RootFindingFailed { seed: w })
    }

    fn try_solve_grid(&self, w: C, grid: usize) -> Option<Vec<C>> {
        let mut roots: Vec<C> = Vec::new();
        // Asymptotic seeds near the pole, u ~ (-2/w)^(1/3) x cube roots of
        // unity; for large |w| these are the only usable starting points.
        let principal = (c(-2.0, 0.0) / w).powf(1.0 / 3.0);
        let rot = C::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let mut seeds: Vec<C> = vec![principal, principal * rot, principal * rot * rot];
        for i in 0..grid {
            for j in 0..grid {
                let s = (i as f64 + 0.53) / grid as f64;
                let t = (j as f64 + 0.47) / grid as f64;
                seeds.push(self.lattice.omega1 * s + self.lattice.omega2 * t);
            }
        }
        for seed in seeds {
            {
                let mut z = seed;
                let mut converged = false;
                for _ in 0..60 {
                    let Some((_, dp, pp)) = self.all(z) else { break };
                    let f = dp - w;
                    if f.norm() < 1e-11 * (1.0 + w.norm()) {
                        converged = true;
                        break;
                    }
                    if pp.norm() < 1e-12 {
                        break;
                    }
                    let step = f / pp;
                    // Damp huge steps that would jump across cells.
                    let step = if step.norm() > 1.0 {
                        step / step.norm()
                    } else {
                        step
                    };
                    z -= step;
                }
                if !converged {
                    continue;
                }
                let zc = self.lattice.reduce_to_cell(z);
                if !roots
                    .iter()
                    .any(|r| self.lattice.dist_sqr_to_lattice(zc - r) < 1e-12)
                {
                    roots.push(zc);
                }
            }
        }
        if roots.len() == 3 {
            // Verify residuals.
            if roots.iter().all(|&r| match self.wp_prime(r) {
                ExtComplex::Finite(v) => (v - w).norm() < 1e-8 * (1.0 + w.norm()),
                ExtComplex::Infinity => false,
            }) {
                roots.sort_by(|p, q| {
                    let (sp, tp) = self.lattice.coords(*p);
                    let (sq, tq) = self.lattice.coords(*q);
                    (sp, tp).partial_cmp(&(sq, tq)).unwrap()
                });
                return Some(roots);
            }
        }
        None
    }
}
