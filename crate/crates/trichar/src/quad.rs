//! Numerical quadrature: fixed Gauss rules from the Golub–Welsch algorithm and
//! an adaptive Gauss–Kronrod integrator for complex-valued integrands.
//!
//! Endpoint singularities of the form t^beta at a segment end are handled by
//! Gauss–Jacobi rules whose weight function absorbs the singular factor, so
//! the sampled smooth part stays bounded.

use crate::error::{Error, Result};
use crate::C;
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

/// Maximum bisection depth for the adaptive integrator.
pub const MAX_DEPTH: usize = 40;

// ---------------------------------------------------------------------------
// Golub–Welsch: nodes and weights from the symmetric tridiagonal Jacobi matrix
// ---------------------------------------------------------------------------

/// Eigenvalues of a symmetric tridiagonal matrix together with the first
/// component of each normalized eigenvector (QL algorithm with implicit
/// shifts). `d` holds the diagonal, `e` the subdiagonal in `e[0..n-1]`.
fn tridiag_eigen_first_components(d: &mut [f64], e: &mut [f64]) -> Result<Vec<f64>> {
    let n = d.len();
    let mut z = vec![0.0; n];
    if n == 0 {
        return Ok(z);
    }
    z[0] = 1.0;
    let mut sub = vec![0.0; n];
    sub[..n - 1].copy_from_slice(&e[..n - 1]);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if sub[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::QuadratureNonConvergence {
                    what: "tridiagonal QL iteration",
                    achieved: sub[l].abs(),
                    wanted: 0.0,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * sub[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + sub[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut i = m;
            while i > l {
                i -= 1;
                let mut f = s * sub[i];
                let b = c * sub[i];
                r = f.hypot(g);
                sub[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    sub[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if r == 0.0 && i > l {
                continue;
            }
            d[l] -= p;
            sub[l] = g;
            sub[m] = 0.0;
        }
    }

    // Sort ascending by eigenvalue, carrying the first components along.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let ds: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    let zs: Vec<f64> = idx.iter().map(|&i| z[i]).collect();
    d.copy_from_slice(&ds);
    Ok(zs)
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7, n = 9. Good to ~1e-15 relative for x > 0.
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    assert!(x > 0.0);
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &cfi) in COEF.iter().enumerate().skip(1) {
        a += cfi / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn beta_fn(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// An n-point Gauss rule on [-1, 1] for the weight (1-x)^alpha (1+x)^beta.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss–Jacobi rule by the Golub–Welsch algorithm. `alpha`, `beta` > -1.
    pub fn jacobi(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
        let mu0 = 2f64.powf(alpha + beta + 1.0) * beta_fn(alpha + 1.0, beta + 1.0);
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n];
        let ab = alpha + beta;
        for k in 0..n {
            let kf = k as f64;
            d[k] = if k == 0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
            };
        }
        for k in 1..n {
            let kf = k as f64;
            let b2 = if k == 1 {
                4.0 * (alpha + 1.0) * (beta + 1.0) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0))
            } else {
                4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab)
                    / ((2.0 * kf + ab) * (2.0 * kf + ab) * (2.0 * kf + ab + 1.0)
                        * (2.0 * kf + ab - 1.0))
            };
            e[k - 1] = b2.sqrt();
        }
        let z = tridiag_eigen_first_components(&mut d, &mut e)?;
        let weights = z.iter().map(|&zi| mu0 * zi * zi).collect();
        Ok(GaussRule { nodes: d, weights })
    }

    /// Gauss–Legendre rule (Jacobi with alpha = beta = 0).
    pub fn legendre(n: usize) -> Result<Self> {
        Self::jacobi(n, 0.0, 0.0)
    }
}

type RuleKey = (usize, i64, i64);

static RULE_CACHE: Lazy<Mutex<HashMap<RuleKey, &'static GaussRule>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Cached Gauss–Jacobi rule; exponents are keyed in units of 1/3 since the
/// crate only ever uses multiples of 1/3.
pub fn cached_jacobi(n: usize, alpha_thirds: i64, beta_thirds: i64) -> &'static GaussRule {
    let key = (n, alpha_thirds, beta_thirds);
    let mut cache = RULE_CACHE.lock().unwrap();
    cache.entry(key).or_insert_with(|| {
        let rule = GaussRule::jacobi(n, alpha_thirds as f64 / 3.0, beta_thirds as f64 / 3.0)
            .expect("Jacobi rule construction");
        Box::leak(Box::new(rule))
    })
}

pub fn cached_legendre(n: usize) -> &'static GaussRule {
    cached_jacobi(n, 0, 0)
}

/// Integrate t^beta * f(t) over [0, 1] with an n-point Jacobi rule whose
/// weight absorbs the left-endpoint singularity t^beta.
pub fn integrate_left_singular<F: FnMut(f64) -> C>(
    n: usize,
    beta_thirds: i64,
    mut f: F,
) -> C {
    let rule = cached_jacobi(n, 0, beta_thirds);
    let beta = beta_thirds as f64 / 3.0;
    let scale = 2f64.powf(-beta - 1.0);
    let mut acc = C::new(0.0, 0.0);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let t = 0.5 * (1.0 + x);
        acc += f(t) * w;
    }
    acc * scale
}

/// Integrate (1-t)^alpha * f(t) over [0, 1] with the singular factor at t = 1
/// absorbed into the weight.
pub fn integrate_right_singular<F: FnMut(f64) -> C>(
    n: usize,
    alpha_thirds: i64,
    mut f: F,
) -> C {
    let rule = cached_jacobi(n, alpha_thirds, 0);
    let alpha = alpha_thirds as f64 / 3.0;
    let scale = 2f64.powf(-alpha - 1.0);
    let mut acc = C::new(0.0, 0.0);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let t = 0.5 * (1.0 + x);
        acc += f(t) * w;
    }
    acc * scale
}

// ---------------------------------------------------------------------------
// Adaptive Gauss–Kronrod 7/15
// ---------------------------------------------------------------------------

// QUADPACK qk15 constants.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel. Returns (kronrod value, error estimate).
fn gk15<F: FnMut(f64) -> C>(f: &mut F, a: f64, b: f64) -> (C, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];
    let mut samples = [C::new(0.0, 0.0); 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        samples[2 * j] = f1;
        samples[2 * j + 1] = f2;
        let fsum = f1 + f2;
        res_k += fsum * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            res_g += fsum * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = (fc - mean).norm() * WGK[7];
    for j in 0..7 {
        res_asc +=
            ((samples[2 * j] - mean).norm() + (samples[2 * j + 1] - mean).norm()) * WGK[j];
    }
    res_asc *= half.abs();
    res_abs *= half.abs();
    let value = res_k * half;
    let mut err = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Adaptive Gauss–Kronrod integration of a complex-valued function over a real
/// interval. Bisects until the summed error estimate meets
/// `tol_abs + tol_rel * |I|`.
pub fn adaptive_gk<F: FnMut(f64) -> C>(
    mut f: F,
    a: f64,
    b: f64,
    tol_rel: f64,
    tol_abs: f64,
) -> Result<C> {
    #[derive(Clone, Copy)]
    struct Panel {
        a: f64,
        b: f64,
        value: C,
        err: f64,
        depth: usize,
    }
    let (v0, e0) = gk15(&mut f, a, b);
    let mut panels = vec![Panel {
        a,
        b,
        value: v0,
        err: e0,
        depth: 0,
    }];
    for _ in 0..100_000 {
        let total: C = panels.iter().map(|p| p.value).sum();
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        let tol = tol_abs + tol_rel * total.norm();
        if total_err <= tol {
            return Ok(total);
        }
        // Split the worst panel.
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let p = panels[worst];
        if p.depth >= MAX_DEPTH {
            return Err(Error::QuadratureNonConvergence {
                what: "adaptive Gauss-Kronrod",
                achieved: total_err,
                wanted: tol,
            });
        }
        let mid = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&mut f, p.a, mid);
        let (v2, e2) = gk15(&mut f, mid, p.b);
        panels[worst] = Panel {
            a: p.a,
            b: mid,
            value: v1,
            err: e1,
            depth: p.depth + 1,
        };
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            err: e2,
            depth: p.depth + 1,
        });
    }
    Err(Error::QuadratureNonConvergence {
        what: "adaptive Gauss-Kronrod panel budget",
        achieved: f64::INFINITY,
        wanted: tol_abs,
    })
}

/// Real-valued convenience wrapper around [`adaptive_gk`].
pub fn adaptive_gk_real<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol_rel: f64,
    tol_abs: f64,
) -> Result<f64> {
    adaptive_gk(|t| C::new(f(t), 0.0), a, b, tol_rel, tol_abs).map(|v| v.re)
}
