use rand::Rng as _;

use super::ReleaseError;
use crate::randmat::DenseMatrix;
use crate::rng;

/// Warn when the variance of `ell2` over the data falls below this.
pub const VARIANCE_FLOOR: f64 = 1e-3;

/// Solver settings shared by the iterative fitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Absolute tolerance on the summed gradient.
    pub tol: f64,
    pub theta_cap: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-9, theta_cap: 50.0 }
    }
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn check_lengths(x: &[f64], s: &[bool]) -> Result<(), ReleaseError> {
    if x.len() != s.len() {
        return Err(ReleaseError::Shape(format!(
            "regressor has {} entries, secret has {}",
            x.len(),
            s.len()
        )));
    }
    Ok(())
}

fn bit(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// `<x, s> / <x, x>`.
pub fn fit_linear_regression(x: &[f64], s: &[bool]) -> Result<f64, ReleaseError> {
    check_lengths(x, s)?;
    let xx: f64 = x.iter().map(|v| v * v).sum();
    if xx == 0.0 {
        return Err(ReleaseError::DegenerateRegressor);
    }
    let xs: f64 = x.iter().zip(s).map(|(v, &b)| v * bit(b)).sum();
    Ok(xs / xx)
}

/// `(U^T U)^{-1} U^T s` for an `n x k` block.
pub fn fit_block_linear_regression(u: &DenseMatrix, s: &[bool]) -> Result<Vec<f64>, ReleaseError> {
    if u.rows() != s.len() {
        return Err(ReleaseError::Shape("block rows must match the secret length".into()));
    }
    let a = u.to_nalgebra();
    let sv = nalgebra::DVector::from_iterator(s.len(), s.iter().map(|&b| bit(b)));
    let gram = a.transpose() * &a;
    let rhs = a.transpose() * sv;
    let eig = gram.clone().symmetric_eigenvalues();
    if !(eig.min() > 1e-12 * eig.max()) {
        return Err(ReleaseError::DegenerateRegressor);
    }
    let chol = gram.cholesky().ok_or(ReleaseError::DegenerateRegressor)?;
    Ok(chol.solve(&rhs).iter().copied().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticFit {
    pub theta: f64,
    /// Set when `|theta|` was clamped at the cap because the gradient never vanishes.
    pub separated: bool,
    pub iterations: usize,
    /// Log-likelihood gradient at `theta`.
    pub gradient: f64,
}

fn logistic_gradient(x: &[f64], s: &[bool], theta: f64) -> f64 {
    x.iter().zip(s).map(|(&v, &b)| v * (bit(b) - sigmoid(theta * v))).sum()
}

fn logistic_loglik(x: &[f64], s: &[bool], theta: f64) -> f64 {
    x.iter()
        .zip(s)
        .map(|(&v, &b)| bit(b) * theta * v - softplus(theta * v))
        .sum()
}

/// `Some(±1)` if `sign * x_i >= 0` whenever `s_i = 1` and `<= 0` whenever `s_i = 0`:
/// the likelihood then increases without bound in that direction.
fn separating_direction(x: &[f64], s: &[bool]) -> Option<f64> {
    [1.0, -1.0].into_iter().find(|&dir| {
        x.iter()
            .zip(s)
            .all(|(&v, &b)| if b { dir * v >= 0.0 } else { dir * v <= 0.0 })
    })
}

/// Maximum-likelihood logistic coefficient by Newton's method with step halving,
/// starting at 0. Perfectly separated data drive `theta` to `±theta_cap`, which is
/// returned with `separated` set.
pub fn fit_logistic_regression(
    x: &[f64],
    s: &[bool],
    opts: &FitOptions,
) -> Result<LogisticFit, ReleaseError> {
    check_lengths(x, s)?;
    if x.iter().all(|&v| v == 0.0) {
        return Err(ReleaseError::DegenerateRegressor);
    }
    let cap = opts.theta_cap;
    if let Some(dir) = separating_direction(x, s) {
        let theta = dir * cap;
        let gradient = logistic_gradient(x, s, theta);
        return Ok(LogisticFit { theta, separated: true, iterations: 0, gradient });
    }
    let mut theta = 0.0f64;
    let mut g = logistic_gradient(x, s, theta);
    for it in 0..opts.max_iter {
        if g.abs() <= opts.tol {
            return Ok(LogisticFit { theta, separated: false, iterations: it, gradient: g });
        }
        let h: f64 = x
            .iter()
            .map(|&v| {
                let p = sigmoid(theta * v);
                v * v * p * (1.0 - p)
            })
            .sum();
        let step = if h > 1e-300 { g / h } else { g.signum() * 2.0 * cap };
        let ll = logistic_loglik(x, s, theta);
        let mut t = 1.0;
        let mut next = (theta + step).clamp(-cap, cap);
        while logistic_loglik(x, s, next) < ll && t > 1e-12 {
            t *= 0.5;
            next = (theta + t * step).clamp(-cap, cap);
        }
        theta = next;
        g = logistic_gradient(x, s, theta);
        if theta.abs() >= cap && g.signum() == theta.signum() {
            return Ok(LogisticFit { theta, separated: true, iterations: it + 1, gradient: g });
        }
    }
    if g.abs() <= opts.tol {
        return Ok(LogisticFit { theta, separated: false, iterations: opts.max_iter, gradient: g });
    }
    Err(ReleaseError::NonConvergence {
        theta,
        gradient: g.abs(),
        iterations: opts.max_iter,
    })
}

/// A per-record loss `l(theta; x, y)` with scalar parameter, whose gradient is
/// affine in the label: `gradient = ell0 + ell2 * y`.
pub trait Loss: Send + Sync {
    fn id(&self) -> &'static str;
    fn value(&self, theta: f64, x: f64, y: f64) -> f64;
    /// Gradient in `theta` at label 0.
    fn ell0(&self, theta: f64, x: f64) -> f64;
    /// Change of the gradient between labels 0 and 1.
    fn ell2(&self, theta: f64, x: f64) -> f64;
    /// Derivative of the gradient in `theta`; does not depend on the label.
    fn curvature(&self, theta: f64, x: f64) -> f64;
    /// `lambda` with `|grad(t1) - grad(t2)| <= lambda * x^2 * |t1 - t2|`; over
    /// `|x| <= 1` this is the Lipschitz constant of the gradient.
    fn lipschitz(&self) -> f64;

    fn gradient(&self, theta: f64, x: f64, y: f64) -> f64 {
        self.ell0(theta, x) + self.ell2(theta, x) * y
    }
}

/// `(y - x theta)^2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquaredLoss;

impl Loss for SquaredLoss {
    fn id(&self) -> &'static str {
        "squared"
    }
    fn value(&self, theta: f64, x: f64, y: f64) -> f64 {
        (y - x * theta).powi(2)
    }
    fn ell0(&self, theta: f64, x: f64) -> f64 {
        2.0 * x * x * theta
    }
    fn ell2(&self, _theta: f64, x: f64) -> f64 {
        -2.0 * x
    }
    fn curvature(&self, _theta: f64, x: f64) -> f64 {
        2.0 * x * x
    }
    fn lipschitz(&self) -> f64 {
        2.0
    }
}

/// Logistic negative log-likelihood `log(1 + e^{x theta}) - y x theta`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogisticLoss;

impl Loss for LogisticLoss {
    fn id(&self) -> &'static str {
        "logistic"
    }
    fn value(&self, theta: f64, x: f64, y: f64) -> f64 {
        softplus(x * theta) - y * x * theta
    }
    fn ell0(&self, theta: f64, x: f64) -> f64 {
        x * sigmoid(x * theta)
    }
    fn ell2(&self, _theta: f64, x: f64) -> f64 {
        -x
    }
    fn curvature(&self, theta: f64, x: f64) -> f64 {
        let p = sigmoid(x * theta);
        x * x * p * (1.0 - p)
    }
    fn lipschitz(&self) -> f64 {
        0.25
    }
}

pub fn loss_by_id(id: &str) -> Result<Box<dyn Loss>, ReleaseError> {
    match id.trim() {
        "squared" => Ok(Box::new(SquaredLoss)),
        "logistic" => Ok(Box::new(LogisticLoss)),
        other => Err(ReleaseError::UnknownLoss(other.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MestFit {
    pub theta: f64,
    pub iterations: usize,
    /// Summed gradient at `theta`.
    pub gradient: f64,
}

/// Zero of `theta -> sum_j gradient(theta; x_j, s_j)` in `[-theta_cap, theta_cap]`
/// by Newton steps safeguarded with bisection.
pub fn fit_mestimator_1d(
    loss: &dyn Loss,
    x: &[f64],
    s: &[bool],
    opts: &FitOptions,
) -> Result<MestFit, ReleaseError> {
    check_lengths(x, s)?;
    let total = |theta: f64| -> f64 {
        x.iter().zip(s).map(|(&v, &b)| loss.gradient(theta, v, bit(b))).sum()
    };
    let slope = |theta: f64| -> f64 { x.iter().map(|&v| loss.curvature(theta, v)).sum() };
    let cap = opts.theta_cap;
    let (mut lo, mut hi) = (-cap, cap);
    let (f_lo, f_hi) = (total(lo), total(hi));
    if f_lo == 0.0 {
        return Ok(MestFit { theta: lo, iterations: 0, gradient: 0.0 });
    }
    if f_hi == 0.0 {
        return Ok(MestFit { theta: hi, iterations: 0, gradient: 0.0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(ReleaseError::NoStationaryPoint { cap });
    }
    let lo_sign = f_lo.signum();
    let mut theta = 0.0;
    let mut f = total(theta);
    for it in 0..opts.max_iter {
        if f.abs() <= opts.tol {
            return Ok(MestFit { theta, iterations: it, gradient: f });
        }
        if f.signum() == lo_sign {
            lo = theta;
        } else {
            hi = theta;
        }
        let fp = slope(theta);
        let newton = theta - f / fp;
        theta = if fp > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        f = total(theta);
    }
    if f.abs() <= opts.tol {
        return Ok(MestFit { theta, iterations: opts.max_iter, gradient: f });
    }
    Err(ReleaseError::NonConvergence { theta, gradient: f.abs(), iterations: opts.max_iter })
}

/// Population variance of `ell2(theta; x)` over the given data.
pub fn ell2_variance(loss: &dyn Loss, theta: f64, xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let vals: Vec<f64> = xs.iter().map(|&x| loss.ell2(theta, x)).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64
}

/// Monte-Carlo estimate of `Var[ell2(theta; x)]` for `x` uniform on `[-1, 1]`.
pub fn monte_carlo_ell2_variance(loss: &dyn Loss, theta: f64, samples: usize, seed: u64) -> f64 {
    let mut r = rng::seeded(seed);
    let xs: Vec<f64> = (0..samples).map(|_| r.random_range(-1.0..=1.0)).collect();
    ell2_variance(loss, theta, &xs)
}
