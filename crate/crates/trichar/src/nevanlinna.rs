//! Growth measurement: spherical-area sheet counts A(t), the Ahlfors–Shimizu
//! characteristic T(r), pullback measures, exact preimage counting for f1 and
//! asymptotic-slope fitting.
//!
//! A(t) is the normalized spherical area of the image of |z| <= t counted
//! with multiplicity, (1/pi) times the integral of the squared spherical
//! derivative. It is accumulated per log-spaced annulus with a fixed radial
//! Gauss rule and an adaptive azimuthal integral, so results are independent
//! of evaluation order. T is always the Ahlfors–Shimizu form
//! T(r) = integral_e^r A(t)/t dt (trapezoid in log t); the O(log r)
//! discrepancy with the classical characteristic is documented, not computed.
//!
//! For f1, whose essential singularity at 0 accumulates infinitely many
//! sheets, A(t) is measured on the annulus 1 <= |z| <= t, matching the domain
//! of the exact lattice-counting estimator.

use crate::cnum::{c, ExtComplex, C};
use crate::elliptic::SQRT3;
use crate::error::{Error, Result};
use crate::extremal::{scale, BranchPath, ExtremalMap};
use crate::quad::{adaptive_gk_real, cached_legendre};
use crate::triangle_map::{FlatMetricRho0, TriangleMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Functions whose growth can be measured. `Identity` and `Exp` are
/// closed-form test stubs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthFn {
    Identity,
    Exp,
    F1,
    F0,
}

/// One sampled growth point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthSample {
    pub r: f64,
    pub a_value: f64,
    pub t_value: f64,
}

/// Sampled growth data (r, A(r), T(r)) with r strictly increasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GrowthSeries {
    pub samples: Vec<GrowthSample>,
}

impl GrowthSeries {
    /// Validate the structural invariants: r strictly increasing, A and T
    /// nondecreasing within tolerance, T convex in log r within tolerance.
    pub fn validate(&self) -> Result<()> {
        let s = &self.samples;
        for w in s.windows(2) {
            if w[1].r <= w[0].r {
                return Err(Error::InvalidInput {
                    what: format!("radii not increasing: {} then {}", w[0].r, w[1].r),
                });
            }
            if w[1].a_value < w[0].a_value - 1e-3 {
                return Err(Error::InvalidInput {
                    what: format!("A decreases at r = {}", w[1].r),
                });
            }
            if w[1].t_value < w[0].t_value - 1e-9 {
                return Err(Error::InvalidInput {
                    what: format!("T decreases at r = {}", w[1].r),
                });
            }
        }
        // Convexity of T in x = log r: increasing divided differences.
        for w in s.windows(3) {
            let (x0, x1, x2) = (w[0].r.ln(), w[1].r.ln(), w[2].r.ln());
            let d1 = (w[1].t_value - w[0].t_value) / (x1 - x0);
            let d2 = (w[2].t_value - w[1].t_value) / (x2 - x1);
            let slack = 1e-3 * (1.0 + w[2].t_value.abs());
            if d2 < d1 - slack {
                return Err(Error::InvalidInput {
                    what: format!("T not convex in log r near r = {}", w[1].r),
                });
            }
        }
        Ok(())
    }

    /// CSV serialization: header `r,A,T`, 17 significant digits, radii
    /// increasing.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,A,T\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                s.r, s.a_value, s.t_value
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default().trim();
        if header != "r,A,T" {
            return Err(Error::InvalidInput {
                what: format!("bad CSV header {header:?}"),
            });
        }
        let mut samples = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| Error::InvalidInput {
                        what: format!("short CSV row {i}"),
                    })?
                    .trim()
                    .parse()
                    .map_err(|e| Error::InvalidInput {
                        what: format!("bad CSV number on row {i}: {e}"),
                    })
            };
            samples.push(GrowthSample {
                r: next()?,
                a_value: next()?,
                t_value: next()?,
            });
        }
        Ok(GrowthSeries { samples })
    }
}

/// A probability measure on the Riemann sphere.
#[derive(Debug, Clone)]
pub enum SphereMeasure {
    /// Normalized spherical area.
    SphericalArea,
    /// rho0-area divided by its total mass sqrt(3)/2.
    Rho0Normalized,
    /// Unit mass at one point.
    PointMass(C),
    /// Weighted point masses; weights are normalized to total mass 1.
    Empirical(Vec<(C, f64)>),
}

/// Monte Carlo estimate of a pullback mass, with provenance.
#[derive(Debug, Clone, Copy)]
pub struct PullbackEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Samples dropped because the preimage solver rejected them
    /// (critical-value proximity).
    pub excluded: usize,
}

/// Least-squares growth fit in the variable x = log r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitModel {
    ALinearInLog,
    TQuadraticInLog,
}

#[derive(Debug, Clone, Copy)]
pub struct GrowthFit {
    pub model: FitModel,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub residual_rms: f64,
    pub window: (f64, f64),
}

/// Growth-measurement engine. Owns the elliptic machinery and the flat
/// metric; all methods are deterministic (Monte Carlo requires a seed).
#[derive(Debug, Clone)]
pub struct Nevanlinna {
    ext: ExtremalMap,
    rho0: FlatMetricRho0,
    per_decade_internal: usize,
}

impl Default for Nevanlinna {
    fn default() -> Self {
        Self::new()
    }
}

impl Nevanlinna {
    pub fn new() -> Self {
        let tmap = TriangleMap::example();
        Nevanlinna {
            ext: ExtremalMap::new(),
            rho0: tmap.rho0(),
            per_decade_internal: 20,
        }
    }

    pub fn extremal(&self) -> &ExtremalMap {
        &self.ext
    }

    pub fn rho0(&self) -> &FlatMetricRho0 {
        &self.rho0
    }

    /// Pointwise spherical derivative |f'| / (1 + |f|^2).
    pub fn spherical_deriv(&self, id: GrowthFn, z: C) -> f64 {
        match id {
            GrowthFn::Identity => 1.0 / (1.0 + z.norm_sqr()),
            GrowthFn::Exp => {
                let ex = z.re.exp();
                ex / (1.0 + ex * ex)
            }
            GrowthFn::F1 => self
                .ext
                .f1_spherical_deriv(z)
                .expect("f1 spherical derivative away from 0"),
            GrowthFn::F0 => {
                let path = BranchPath::direct(c(0.5, 0.0), z)
                    .expect("f0 evaluation point too close to a branch point");
                let u = self.ext.f0_u(&path).expect("f0 continuation");
                self.ext.f0_spherical_deriv(z, u)
            }
        }
    }

    /// Inner radius below which the disc is not integrated directly.
    fn base_radius(&self, id: GrowthFn) -> f64 {
        match id {
            GrowthFn::F1 => 1.0,
            _ => 0.0,
        }
    }

    fn squared_deriv_integrand(&self, id: GrowthFn, z: C) -> f64 {
        let d = self.spherical_deriv(id, z);
        d * d
    }

    /// Azimuthal integral of the squared spherical derivative on |z| = r.
    fn circle_integral(&self, id: GrowthFn, r: f64) -> Result<f64> {
        adaptive_gk_real(
            |theta| self.squared_deriv_integrand(id, C::from_polar(r, theta)),
            0.0,
            2.0 * std::f64::consts::PI,
            1e-5,
            1e-30,
        )
    }

    /// Area integral over the annulus r_lo < |z| < r_hi (no 1/pi factor),
    /// radial Gauss rule per log-spaced shell, adaptive in the angle.
    fn annulus_integral(&self, id: GrowthFn, r_lo: f64, r_hi: f64) -> Result<f64> {
        debug_assert!(r_lo > 0.0 && r_hi > r_lo);
        let step = 10f64.powf(1.0 / self.per_decade_internal as f64);
        let n_shell = ((r_hi / r_lo).ln() / step.ln()).ceil().max(1.0) as usize;
        let bounds: Vec<f64> = (0..=n_shell)
            .map(|j| r_lo * (r_hi / r_lo).powf(j as f64 / n_shell as f64))
            .collect();
        let rule = cached_legendre(4);
        let shells: Vec<Result<f64>> = bounds
            .par_windows(2)
            .map(|b| {
                let (s0, s1) = (b[0], b[1]);
                let mut acc = 0.0;
                for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let rad = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * x;
                    acc += w * rad * self.circle_integral(id, rad)?;
                }
                Ok(acc * 0.5 * (s1 - s0))
            })
            .collect();
        let mut total = 0.0;
        for s in shells {
            total += s?;
        }
        Ok(total)
    }

    /// Area integral over the disc |z| < r0 (no 1/pi factor). Radial panel
    /// boundaries dodge the special points of f0 at 0 and 1 so that every
    /// quadrature node keeps clearance from the branch points of the
    /// continuation.
    fn disc_integral(&self, id: GrowthFn, r0: f64) -> Result<f64> {
        debug_assert!(r0 > 0.0);
        let inner = 0.004;
        let mut cuts = vec![inner, 0.02];
        for candidate in [0.3, 0.7, 0.9, 0.99, 1.01, 1.1, 1.5, 2.0] {
            if candidate < r0 {
                cuts.push(candidate);
            }
        }
        cuts.push(r0);
        let rule = cached_legendre(6);
        let mut total = 0.0;
        for b in cuts.windows(2) {
            let (s0, s1) = (b[0], b[1]);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let rad = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * x;
                total += w * rad * self.circle_integral(id, rad)? * 0.5 * (s1 - s0);
            }
        }
        // The innermost disc, below the path-clearance radius: the integrand
        // is continuous at 0, so a one-sample estimate is ample at 1e-3.
        let boundary = self.squared_deriv_integrand(id, c(inner, 0.0));
        total += boundary * std::f64::consts::PI * inner * inner;
        Ok(total)
    }

    /// A(t): the average number of sheets over |z| <= t (for f1: over the
    /// annulus 1 <= |z| <= t). Relative accuracy about 1e-3.
    pub fn spherical_area(&self, id: GrowthFn, t: f64) -> Result<f64> {
        let base = self.base_radius(id);
        if t <= base {
            return Err(Error::InvalidInput {
                what: format!("radius {t} not above the base radius {base}"),
            });
        }
        let mut total = 0.0;
        if base == 0.0 {
            let r0 = t.min(2.5);
            total += self.disc_integral(id, r0)?;
            if t > r0 {
                total += self.annulus_integral(id, r0, t)?;
            }
        } else {
            total += self.annulus_integral(id, base, t)?;
        }
        Ok(total / std::f64::consts::PI)
    }

    /// Sample A on a log grid and accumulate T(r) = integral_e^r A(t)/t dt by
    /// the trapezoid rule in log t. The grid starts at max(e, base radius).
    pub fn growth_series(
        &self,
        id: GrowthFn,
        r_max: f64,
        per_decade: usize,
    ) -> Result<GrowthSeries> {
        let r_min = std::f64::consts::E;
        if r_max <= r_min {
            return Err(Error::InvalidInput {
                what: format!("r_max must exceed e, got {r_max}"),
            });
        }
        let n = ((r_max / r_min).log10() * per_decade as f64).ceil().max(1.0) as usize;
        let radii: Vec<f64> = (0..=n)
            .map(|j| r_min * (r_max / r_min).powf(j as f64 / n as f64))
            .collect();
        // Base area up to the first radius.
        let base = self.base_radius(id);
        let mut a_base = 0.0;
        if base == 0.0 {
            a_base += self.disc_integral(id, r_min)?;
        } else {
            a_base += self.annulus_integral(id, base, r_min)?;
        }
        // Annulus increments in parallel with a fixed reduction order.
        let increments: Vec<Result<f64>> = radii
            .par_windows(2)
            .map(|w| self.annulus_integral(id, w[0], w[1]))
            .collect();
        let mut samples = Vec::with_capacity(radii.len());
        let mut a_acc = a_base / std::f64::consts::PI;
        let mut t_acc = 0.0;
        samples.push(GrowthSample {
            r: radii[0],
            a_value: a_acc,
            t_value: 0.0,
        });
        for (j, inc) in increments.into_iter().enumerate() {
            let a_prev = a_acc;
            a_acc += inc? / std::f64::consts::PI;
            let dlog = (radii[j + 1] / radii[j]).ln();
            t_acc += 0.5 * (a_prev + a_acc) * dlog;
            samples.push(GrowthSample {
                r: radii[j + 1],
                a_value: a_acc,
                t_value: t_acc,
            });
        }
        Ok(GrowthSeries { samples })
    }

    /// T(r) from a sampled series by trapezoid in log t. The series must
    /// bracket [e, r] densely (at least 8 samples, max gap 0.3 in log r).
    pub fn characteristic(&self, series: &GrowthSeries, r: f64) -> Result<f64> {
        let s = &series.samples;
        let in_window: Vec<&GrowthSample> = s
            .iter()
            .filter(|p| p.r >= std::f64::consts::E * (1.0 - 1e-12) && p.r <= r * (1.0 + 1e-12))
            .collect();
        if in_window.len() < 8 {
            return Err(Error::SamplingTooCoarse {
                what: format!("{} samples in [e, {r}]", in_window.len()),
            });
        }
        let mut t_acc = 0.0;
        for w in in_window.windows(2) {
            let dlog = (w[1].r / w[0].r).ln();
            if dlog > 0.3 {
                return Err(Error::SamplingTooCoarse {
                    what: format!("log-gap {dlog:.3} at r = {}", w[0].r),
                });
            }
            t_acc += 0.5 * (w[0].a_value + w[1].a_value) * dlog;
        }
        Ok(t_acc)
    }

    /// Exact count of solutions of f1(z) = w in the annulus 1 <= |z| <= r,
    /// via lattice arithmetic on the cylinder.
    pub fn count_preimages_f1(&self, w: C, r: f64) -> Result<u64> {
        if r <= 1.0 {
            return Err(Error::InvalidInput {
                what: format!("need r > 1, got {r}"),
            });
        }
        let roots = self.ext.wp().solve_wp_prime(w)?;
        Ok(self.count_from_roots(&roots, r))
    }

    fn count_from_roots(&self, roots: &[C], r: f64) -> u64 {
        // Solutions are tau + n*omega2 modulo sqrt(3)Z; z lies in the annulus
        // iff Im u lies in [-H, 0] with H = (sqrt3 / 2 pi) log r.
        let h = SQRT3 / (2.0 * std::f64::consts::PI) * r.ln();
        let mut total = 0u64;
        for tau in roots {
            let n_hi = ((0.0 - tau.im) / 1.5).floor();
            let n_lo = ((-h - tau.im) / 1.5).ceil();
            if n_hi >= n_lo {
                total += (n_hi - n_lo) as u64 + 1;
            }
        }
        total
    }

    fn sample_measure(&self, mu: &SphereMeasure, rng: &mut ChaCha8Rng) -> C {
        match mu {
            SphereMeasure::SphericalArea => {
                // P(|w| <= rho) = rho^2/(1+rho^2) under normalized spherical
                // area; the argument is uniform.
                let v: f64 = rng.random();
                let modulus = (v / (1.0 - v)).sqrt();
                let phi: f64 = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                C::from_polar(modulus, phi)
            }
            SphereMeasure::Rho0Normalized => {
                // Push forward the uniform measure on the two unit triangles
                // through the isometry wp' (white) and the reflection (black).
                let [v0, v1, v2] = crate::triangle_map::TriangleDomain::new().vertices;
                let (mut r1, mut r2): (f64, f64) = (rng.random(), rng.random());
                if r1 + r2 > 1.0 {
                    r1 = 1.0 - r1;
                    r2 = 1.0 - r2;
                }
                let u = v0 + (v1 - v0) * r1 + (v2 - v0) * r2;
                let w = match self.ext.wp().wp_prime(u) {
                    ExtComplex::Finite(w) => w,
                    ExtComplex::Infinity => c(1e12, 0.0),
                };
                if rng.random::<bool>() {
                    c(-w.re, w.im)
                } else {
                    w
                }
            }
            SphereMeasure::PointMass(_) | SphereMeasure::Empirical(_) => {
                unreachable!("atomic measures are evaluated exactly")
            }
        }
    }

    /// A_mu at several radii with one preimage solve per sampled point.
    /// Monte Carlo for the continuous measures (deterministic given `seed`),
    /// exact for atomic ones.
    pub fn pullback_count_series(
        &self,
        id: GrowthFn,
        mu: &SphereMeasure,
        radii: &[f64],
        mc_samples: usize,
        seed: u64,
    ) -> Result<Vec<PullbackEstimate>> {
        if id != GrowthFn::F1 {
            return Err(Error::Unsupported {
                what: "exact preimage counting is implemented for f1 only".into(),
            });
        }
        let atoms: Vec<(C, f64)> = match mu {
            SphereMeasure::PointMass(w) => vec![(*w, 1.0)],
            SphereMeasure::Empirical(list) => {
                let total: f64 = list.iter().map(|(_, w)| w).sum();
                if total <= 0.0 {
                    return Err(Error::InvalidInput {
                        what: "empirical measure needs positive total mass".into(),
                    });
                }
                list.iter().map(|(p, w)| (*p, w / total)).collect()
            }
            _ => Vec::new(),
        };
        if !atoms.is_empty() {
            let mut out = Vec::with_capacity(radii.len());
            let mut root_sets = Vec::new();
            for (w, mass) in &atoms {
                root_sets.push((self.ext.wp().solve_wp_prime(*w)?, *mass));
            }
            for &r in radii {
                let mut v = 0.0;
                for (roots, mass) in &root_sets {
                    v += *mass * self.count_from_roots(roots, r) as f64;
                }
                out.push(PullbackEstimate {
                    value: v,
                    std_error: 0.0,
                    samples: atoms.len(),
                    excluded: 0,
                });
            }
            return Ok(out);
        }
        // Monte Carlo over the continuous measure.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut root_sets = Vec::with_capacity(mc_samples);
        let mut excluded = 0usize;
        for _ in 0..mc_samples {
            let w = self.sample_measure(mu, &mut rng);
            match self.ext.wp().solve_wp_prime(w) {
                Ok(roots) => root_sets.push(roots),
                Err(Error::CriticalValueProximity { .. }) => excluded += 1,
                Err(e) => return Err(e),
            }
        }
        if root_sets.is_empty() {
            return Err(Error::SamplingTooCoarse {
                what: "all Monte Carlo samples were excluded".into(),
            });
        }
        let mut out = Vec::with_capacity(radii.len());
        for &r in radii {
            let counts: Vec<f64> = root_sets
                .iter()
                .map(|roots| self.count_from_roots(roots, r) as f64)
                .collect();
            let n = counts.len() as f64;
            let mean = counts.iter().sum::<f64>() / n;
            let var = counts.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n.max(2.0);
            out.push(PullbackEstimate {
                value: mean,
                std_error: (var / n).sqrt(),
                samples: counts.len(),
                excluded,
            });
        }
        Ok(out)
    }

    /// Single-radius convenience wrapper around [`pullback_count_series`].
    pub fn pullback_count(
        &self,
        id: GrowthFn,
        mu: &SphereMeasure,
        r: f64,
        mc_samples: usize,
        seed: u64,
    ) -> Result<PullbackEstimate> {
        Ok(self.pullback_count_series(id, mu, &[r], mc_samples, seed)?[0])
    }

    /// rho0-pullback area of |z| <= t under f0 (the rho-area of the paper's
    /// ring grows like (3 / 2 pi) log t). Direct quadrature of
    /// rho0(f0(z))^2 |f0'(z)|^2.
    pub fn rho_pullback_area_f0(&self, t: f64) -> Result<f64> {
        let integrand = |z: C| -> f64 {
            let path = match BranchPath::direct(c(0.5, 0.0), z) {
                Ok(p) => p,
                Err(_) => return 0.0,
            };
            let u = match self.ext.f0_u(&path) {
                Ok(u) => u,
                Err(_) => return 0.0,
            };
            let u_prime_abs = scale().norm()
                * z.norm().powf(-2.0 / 3.0)
                * (c(1.0, 0.0) - z).norm().powf(-1.0 / 3.0);
            match self.ext.wp().all(u) {
                Some((_, dp, pp)) => {
                    let rho = match self.rho0.density(ExtComplex::Finite(dp)) {
                        Ok(d) => d,
                        Err(_) => return 0.0,
                    };
                    let df = pp.norm() * u_prime_abs;
                    rho * rho * df * df
                }
                // Within the pole cutoff the integrand equals |u'|^2 up to
                // O(|u_red|^6).
                None => u_prime_abs * u_prime_abs,
            }
        };
        self.area_quadrature_f0_domain(&integrand, t)
    }

    /// Quadrature over |z| <= t with the f0 radial panel layout.
    fn area_quadrature_f0_domain(&self, integrand: &(dyn Fn(C) -> f64 + Sync), t: f64) -> Result<f64> {
        let inner = 0.004;
        let mut cuts = vec![inner, 0.02];
        for candidate in [0.3, 0.7, 0.9, 0.99, 1.01, 1.1, 1.5, 2.5] {
            if candidate < t {
                cuts.push(candidate);
            }
        }
        cuts.push(t.min(2.5_f64.max(t)));
        let rule = cached_legendre(6);
        let mut total = 0.0;
        for b in cuts.windows(2) {
            let (s0, s1) = (b[0], b[1]);
            if s1 <= 2.5 || s1 <= s0 * 1.2 {
                for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let rad = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * x;
                    let circ = adaptive_gk_real(
                        |theta| integrand(C::from_polar(rad, theta)),
                        0.0,
                        2.0 * std::f64::consts::PI,
                        1e-4,
                        1e-30,
                    )?;
                    total += w * rad * circ * 0.5 * (s1 - s0);
                }
            } else {
                // Log-spaced shells for the far region, in parallel.
                let n_shell =
                    ((s1 / s0).ln() / (10f64.ln() / self.per_decade_internal as f64)).ceil() as usize;
                let bounds: Vec<f64> = (0..=n_shell)
                    .map(|j| s0 * (s1 / s0).powf(j as f64 / n_shell as f64))
                    .collect();
                let shells: Vec<Result<f64>> = bounds
                    .par_windows(2)
                    .map(|sb| {
                        let mut acc = 0.0;
                        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                            let rad = 0.5 * (sb[0] + sb[1]) + 0.5 * (sb[1] - sb[0]) * x;
                            let circ = adaptive_gk_real(
                                |theta| integrand(C::from_polar(rad, theta)),
                                0.0,
                                2.0 * std::f64::consts::PI,
                                1e-4,
                                1e-30,
                            )?;
                            acc += w * rad * circ * 0.5 * (sb[1] - sb[0]);
                        }
                        Ok(acc)
                    })
                    .collect();
                for s in shells {
                    total += s?;
                }
            }
        }
        let boundary = integrand(c(inner, 0.0));
        total += boundary * std::f64::consts::PI * inner * inner;
        Ok(total)
    }

    /// Least-squares fit of a growth model over a radius window.
    pub fn fit_growth(
        &self,
        series: &GrowthSeries,
        model: FitModel,
        window: (f64, f64),
    ) -> Result<GrowthFit> {
        let pts: Vec<(f64, f64)> = series
            .samples
            .iter()
            .filter(|s| s.r >= window.0 && s.r <= window.1)
            .map(|s| {
                let y = match model {
                    FitModel::ALinearInLog => s.a_value,
                    FitModel::TQuadraticInLog => s.t_value,
                };
                (s.r.ln(), y)
            })
            .collect();
        fit_points(&pts, model, window)
    }
}

/// Shared least-squares core (x already in log coordinates).
pub fn fit_points(pts: &[(f64, f64)], model: FitModel, window: (f64, f64)) -> Result<GrowthFit> {
    if pts.len() < 8 {
        return Err(Error::SamplingTooCoarse {
            what: format!("{} samples in fit window", pts.len()),
        });
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let xs: Vec<f64> = pts.iter().map(|p| p.0 - mean_x).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let degree = match model {
        FitModel::ALinearInLog => 1,
        FitModel::TQuadraticInLog => 2,
    };
    // Normal equations for the centered Vandermonde system.
    let dim = degree + 1;
    let mut m = vec![vec![0.0; dim]; dim];
    let mut rhs = vec![0.0; dim];
    for (x, y) in xs.iter().zip(&ys) {
        let mut pow_i = 1.0;
        for i in 0..dim {
            // m[i][j] accumulates x^(i+j).
            let mut pow_j = pow_i * pow_i;
            for j in i..dim {
                m[i][j] += pow_j;
                pow_j *= x;
            }
            rhs[i] += pow_i * y;
            pow_i *= x;
        }
    }
    for i in 0..dim {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    let coef = solve_small(&mut m, &mut rhs)?;
    // Un-center: p(x) = sum a_k (x - m)^k expanded in x.
    let (a0, a1, a2) = (
        coef[0],
        coef.get(1).copied().unwrap_or(0.0),
        coef.get(2).copied().unwrap_or(0.0),
    );
    let c2 = a2;
    let c1 = a1 - 2.0 * a2 * mean_x;
    let c0 = a0 - a1 * mean_x + a2 * mean_x * mean_x;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let fit = a0 + a1 * x + a2 * x * x;
        ss += (y - fit) * (y - fit);
    }
    Ok(GrowthFit {
        model,
        c2,
        c1,
        c0,
        residual_rms: (ss / n).sqrt(),
        window,
    })
}

fn solve_small(m: &mut [Vec<f64>], rhs: &mut [f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].abs() < 1e-12 {
            return Err(Error::DegenerateFit {
                what: "singular normal equations".into(),
            });
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}
