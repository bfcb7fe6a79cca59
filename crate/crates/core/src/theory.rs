//! Closed-form and numerically solved predictions for the torus.
//!
//! Clusters are locally approximated by a d-type branching process in which a
//! type-i individual has on average `λ a_j` children of every type `j ≠ i`
//! and none of its own type. Its mean matrix `M_λ` drives everything here.
//!
//! Theory always uses the real aspect ratios `a_i`; the rounded side lengths
//! only matter to the simulation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::TorusSpec;

const PERRON_TOL: f64 = 1e-13;
const PERRON_MAX_ITER: usize = 100_000;
const EXTINCTION_TOL: f64 = 1e-13;
const EXTINCTION_MAX_ITER: usize = 1_000_000;
const SUBCRITICAL_SLACK: f64 = 1e-12;

fn check_aspects(a: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::InvalidSpec("need at least one aspect ratio".into()));
    }
    if let Some(bad) = a.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidSpec(format!(
            "aspect ratio {bad} is not positive"
        )));
    }
    Ok(())
}

fn check_multi_axis(a: &[f64]) -> Result<()> {
    check_aspects(a)?;
    if a.len() < 2 {
        return Err(Error::DimensionTooSmall(a.len()));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda {lambda} must be non-negative"
        )));
    }
    Ok(())
}

/// Mean offspring matrix: entry `(i, j)` is `λ a_j` for `i ≠ j`, zero on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationMatrix {
    pub lambda: f64,
    pub a: Vec<f64>,
}

impl ExpectationMatrix {
    pub fn new(lambda: f64, a: &[f64]) -> Result<Self> {
        check_aspects(a)?;
        check_lambda(lambda)?;
        Ok(ExpectationMatrix {
            lambda,
            a: a.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.lambda * self.a[j]
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// `M x` without forming the matrix.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let total: f64 = self.a.iter().zip(x).map(|(a, x)| a * x).sum();
        self.a
            .iter()
            .zip(x)
            .map(|(a, x)| self.lambda * (total - a * x))
            .collect()
    }
}

/// Elementary symmetric polynomials `e_0..=e_d` of `a`.
pub fn elementary_symmetric(a: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; a.len() + 1];
    e[0] = 1.0;
    for (i, &x) in a.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

/// `1 - Σ_{ℓ≥2} (ℓ-1) λ^ℓ e_ℓ(a)`: strictly decreasing in `λ > 0` for `d ≥ 2`.
fn reduced_char_poly(lambda: f64, e: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut power = lambda;
    for (l, &el) in e.iter().enumerate().skip(1) {
        if l >= 2 {
            sum += (l - 1) as f64 * power * el;
        }
        power *= lambda;
    }
    1.0 - sum
}

/// `det(M_λ - I)` via the elementary symmetric polynomials of `a`.
pub fn char_poly_value(lambda: f64, a: &[f64]) -> Result<f64> {
    check_aspects(a)?;
    check_lambda(lambda)?;
    let sign = if a.len().is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * reduced_char_poly(lambda, &elementary_symmetric(a)))
}

/// The unique positive root of `det(M_λ - I) = 0`.
///
/// Bisection on the reduced polynomial, bracketed by doubling, carried until
/// the bracket collapses to adjacent doubles.
pub fn critical_lambda(a: &[f64]) -> Result<f64> {
    check_multi_axis(a)?;
    let e = elementary_symmetric(a);
    let g = |x: f64| reduced_char_poly(x, &e);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: f64::INFINITY,
            });
        }
    }
    for _ in 0..4096 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if g(lo).abs() <= g(hi).abs() { lo } else { hi })
}

/// Perron root and its positive right eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perron {
    pub rho: f64,
    /// Right eigenvector normalized to unit 1-norm.
    pub mu: Vec<f64>,
    pub iterations: usize,
}

/// Shifted power iteration on `M_λ`.
///
/// `M_1` is similar to the symmetric matrix `√a √aᵀ - diag(a)`, so its
/// spectrum is real and lies in `[-max a, ρ]`. Iterating `M_1 + sI` with
/// `s = (max a + min a) / 2` makes the Perron root strictly dominant even for
/// `d = 2`, where `M_λ` itself has eigenvalues `±ρ`.
pub fn perron(lambda: f64, a: &[f64]) -> Result<Perron> {
    check_multi_axis(a)?;
    check_lambda(lambda)?;
    let d = a.len();
    let unit = ExpectationMatrix::new(1.0, a)?;
    let a_max = a.iter().cloned().fold(f64::MIN, f64::max);
    let a_min = a.iter().cloned().fold(f64::MAX, f64::min);
    let shift = 0.5 * (a_max + a_min);

    let mut x = vec![1.0 / d as f64; d];
    let mut estimate = f64::NAN;
    for it in 1..=PERRON_MAX_ITER {
        let mut y = unit.apply(&x);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += shift * xi;
        }
        let norm: f64 = y.iter().sum();
        y.iter_mut().for_each(|v| *v /= norm);
        let change = x
            .iter()
            .zip(&y)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        let moved = (norm - estimate).abs() / norm;
        x = y;
        estimate = norm;
        if change < PERRON_TOL && moved < PERRON_TOL {
            return Ok(Perron {
                rho: lambda * (estimate - shift),
                mu: x,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: PERRON_MAX_ITER,
        residual: estimate,
    })
}

/// Extinction probabilities of the Poisson branching process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extinction {
    /// `q_i`: extinction probability starting from one type-i individual.
    pub q_vec: Vec<f64>,
    /// `(∏ q_i)^{1/(d-1)}`, the extinction probability of a start that
    /// bears children of every type.
    pub q: f64,
    pub iterations: usize,
}

impl Extinction {
    pub fn giant_fraction(&self) -> f64 {
        1.0 - self.q
    }
}

/// `f_i(x) = exp(-λ Σ_{j≠i} a_j (1 - x_j))`.
pub fn generating_map(lambda: f64, a: &[f64], x: &[f64]) -> Vec<f64> {
    let deficit: f64 = a.iter().zip(x).map(|(a, x)| a * (1.0 - x)).sum();
    a.iter()
        .zip(x)
        .map(|(ai, xi)| (-lambda * (deficit - ai * (1.0 - xi))).exp())
        .collect()
}

/// Minimal fixed point of the offspring generating map.
///
/// Subcritical and critical processes (`ρ ≤ 1`) die out surely. Otherwise the
/// iteration starts at `x = 0`, where it increases monotonically to the
/// smallest fixed point.
pub fn extinction(lambda: f64, a: &[f64]) -> Result<Extinction> {
    let d = a.len();
    let pf = perron(lambda, a)?;
    if pf.rho <= 1.0 + SUBCRITICAL_SLACK {
        return Ok(Extinction {
            q_vec: vec![1.0; d],
            q: 1.0,
            iterations: 0,
        });
    }
    let mut x = vec![0.0; d];
    let mut residual = f64::INFINITY;
    for it in 1..=EXTINCTION_MAX_ITER {
        let next = generating_map(lambda, a, &x);
        residual = x
            .iter()
            .zip(&next)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        x = next;
        if residual < EXTINCTION_TOL {
            let log_prod: f64 = x.iter().map(|q| q.ln()).sum();
            return Ok(Extinction {
                q: (log_prod / (d - 1) as f64).exp(),
                q_vec: x,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: EXTINCTION_MAX_ITER,
        residual,
    })
}

/// Predicted giant-component size for `p = λ/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiantPrediction {
    /// `(1 - q) λ (∏ a_i) n^{d-1}`.
    pub size: f64,
    /// Expected occupied count `λ (∏ a_i) n^{d-1}`.
    pub normalizer: f64,
    pub giant_fraction: f64,
}

/// Expected occupied count `λ (∏ a_i) n^{d-1}` for `p = λ/n`.
pub fn occupied_normalizer(spec: &TorusSpec, lambda: f64) -> f64 {
    let prod: f64 = spec.a().iter().product();
    lambda * prod * (spec.n() as f64).powi(spec.d() as i32 - 1)
}

pub fn giant_size_prediction(spec: &TorusSpec, lambda: f64) -> Result<GiantPrediction> {
    let lambda_c = critical_lambda(spec.a())?;
    if lambda <= lambda_c {
        return Err(Error::NotSupercritical { lambda, lambda_c });
    }
    let ext = extinction(lambda, spec.a())?;
    let normalizer = occupied_normalizer(spec, lambda);
    Ok(GiantPrediction {
        size: ext.giant_fraction() * normalizer,
        normalizer,
        giant_fraction: ext.giant_fraction(),
    })
}

/// Connectivity thresholds for `p = c ln(n) / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityThresholds {
    /// `(d-1) / Σ a_i`: isolated vertices below, connected above.
    pub c_conn: f64,
    /// `(d-1) / (2 Σ_{i≥2} a_i + a_1)` with `a` sorted descending: above it
    /// every vertex is isolated or in the giant.
    pub c_iso_giant: f64,
    /// Original axis index of each sorted position.
    pub sort_permutation: Vec<usize>,
}

pub fn connectivity_thresholds(a: &[f64]) -> Result<ConnectivityThresholds> {
    check_multi_axis(a)?;
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[j].total_cmp(&a[i]));
    let sorted: Vec<f64> = order.iter().map(|&i| a[i]).collect();
    let dm1 = (a.len() - 1) as f64;
    let total: f64 = sorted.iter().sum();
    let tail: f64 = sorted[1..].iter().sum();
    Ok(ConnectivityThresholds {
        c_conn: dm1 / total,
        c_iso_giant: dm1 / (2.0 * tail + sorted[0]),
        sort_permutation: order,
    })
}

/// Constants of the exponential tail bound `P(T > x) ≤ C e^{-αx}` on the
/// total progeny of a subcritical process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    pub mu: Vec<f64>,
    pub rho: f64,
    pub theta_star: f64,
    pub alpha: f64,
    /// Prefactor for a single ancestor, `exp(θ' ‖μ‖₁)`.
    #[serde(rename = "C")]
    pub c: f64,
}

impl TailConstants {
    /// Prefactor `exp(θ' ⟨Z_0, μ⟩)` for an arbitrary initial population.
    pub fn prefactor_for(&self, start: &[u64]) -> f64 {
        let dot: f64 = start.iter().zip(&self.mu).map(|(&z, m)| z as f64 * m).sum();
        (self.theta_star * dot).exp()
    }

    /// The bound `C e^{-αx}`.
    pub fn bound(&self, x: f64) -> f64 {
        self.c * (-self.alpha * x).exp()
    }
}

/// `ln ψ_i(θ) = -θ μ_i + Σ_{j≠i} λ a_j (e^{θ μ_j} - 1)`: the log of the
/// Poisson-limit bound on the increment moment generating function.
pub fn log_psi(lambda: f64, a: &[f64], mu: &[f64], i: usize, theta: f64) -> f64 {
    let births: f64 = a
        .iter()
        .zip(mu)
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, (aj, mj))| lambda * aj * (theta * mj).exp_m1())
        .sum();
    -theta * mu[i] + births
}

fn log_envelope(lambda: f64, a: &[f64], mu: &[f64], theta: f64) -> f64 {
    (0..a.len())
        .map(|i| log_psi(lambda, a, mu, i, theta))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn tail_constants(lambda: f64, a: &[f64]) -> Result<TailConstants> {
    check_multi_axis(a)?;
    check_lambda(lambda)?;
    let pf = perron(lambda, a)?;
    if pf.rho >= 1.0 {
        return Err(Error::NotSubcritical {
            lambda,
            lambda_c: critical_lambda(a)?,
        });
    }
    let mu = pf.mu;
    let env = |t: f64| log_envelope(lambda, a, &mu, t);

    // ψ envelope starts at 1, dips, then diverges: grow the bracket until it
    // climbs back above 1.
    let mut hi = 1.0;
    while env(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: env(hi),
            });
        }
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut up) = (0.0, hi);
    let mut x1 = up - inv_phi * (up - lo);
    let mut x2 = lo + inv_phi * (up - lo);
    let (mut f1, mut f2) = (env(x1), env(x2));
    while up - lo > 1e-12 * hi {
        if f1 < f2 {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - inv_phi * (up - lo);
            f1 = env(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (up - lo);
            f2 = env(x2);
        }
    }
    let theta_star = 0.5 * (lo + up);
    let alpha = -env(theta_star);
    let mu_norm: f64 = mu.iter().sum();
    Ok(TailConstants {
        c: (theta_star * mu_norm).exp(),
        mu,
        rho: pf.rho,
        theta_star,
        alpha,
    })
}

/// Every prediction for a given `(a, λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub d: usize,
    pub a: Vec<f64>,
    pub lambda: f64,
    pub lambda_c: f64,
    pub rho: f64,
    pub q_vec: Vec<f64>,
    pub q: f64,
    pub giant_fraction: f64,
    pub conn_threshold: f64,
    pub iso_giant_threshold: f64,
    pub sort_permutation: Vec<usize>,
    /// Present when `λ` is subcritical.
    pub tail: Option<TailConstants>,
}

pub fn theory_report(a: &[f64], lambda: f64) -> Result<TheoryReport> {
    let lambda_c = critical_lambda(a)?;
    let pf = perron(lambda, a)?;
    let ext = extinction(lambda, a)?;
    let thresholds = connectivity_thresholds(a)?;
    let tail = if pf.rho < 1.0 && lambda > 0.0 {
        Some(tail_constants(lambda, a)?)
    } else {
        None
    };
    Ok(TheoryReport {
        d: a.len(),
        a: a.to_vec(),
        lambda,
        lambda_c,
        rho: pf.rho,
        giant_fraction: ext.giant_fraction(),
        q_vec: ext.q_vec,
        q: ext.q,
        conn_threshold: thresholds.c_conn,
        iso_giant_threshold: thresholds.c_iso_giant,
        sort_permutation: thresholds.sort_permutation,
        tail,
    })
}
