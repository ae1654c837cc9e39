//! Strongly convex test objectives with exact constants and gradient
//! oracles.

mod dataset;
mod objectives;
mod oracle;

pub(crate) use dataset::fmt_f64;
pub use dataset::{synth_classification, Dataset};
pub use objectives::{
    make_logreg, make_quadratic, make_ridge, LogregProblem, QuadraticProblem, RidgeProblem,
};
pub use oracle::{GradientOracle, OracleMode};

use crate::error::{Error, Result};
use crate::numerics::Vector;

/// Desk-scale limits on dataset shape; constructors reject anything larger.
pub const MAX_SAMPLES: usize = 100_000;
pub const MAX_DIM: usize = 1_000;

/// A differentiable objective with known strong-convexity and smoothness
/// constants. The Hessian spectrum lies in `[mu, smoothness]` everywhere.
pub trait Problem {
    fn dim(&self) -> usize;
    fn loss(&self, theta: &Vector) -> Result<f64>;
    fn full_gradient(&self, theta: &Vector) -> Result<Vector>;
    /// Strong-convexity constant (> 0).
    fn mu(&self) -> f64;
    /// Smoothness constant (>= mu).
    fn smoothness(&self) -> f64;
    /// Exact minimizer when known in closed form.
    fn theta_star(&self) -> Option<&Vector> {
        None
    }
    fn optimal_loss(&self) -> Option<f64> {
        None
    }
    /// Number of terms in a finite-sum decomposition; 0 when none exists.
    fn num_samples(&self) -> usize {
        0
    }
    /// Gradient of the `index`-th summand (including regularization), for
    /// minibatch oracles.
    fn sample_gradient(&self, _index: usize, _theta: &Vector) -> Result<Vector> {
        Err(Error::invalid("problem has no finite-sum decomposition"))
    }
}

pub(crate) fn check_theta(p: &dyn Problem, theta: &Vector) -> Result<()> {
    if theta.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: theta.dim(),
        });
    }
    Ok(())
}

/// Central-difference check of `full_gradient` against `loss`. Returns the
/// maximum over coordinates of `|fd - g| / max(1, |g|)`.
pub fn finite_diff_check(p: &dyn Problem, theta: &Vector, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {h}")));
    }
    check_theta(p, theta)?;
    let grad = p.full_gradient(theta)?;
    let mut worst: f64 = 0.0;
    let base = theta.as_slice().to_vec();
    for i in 0..theta.dim() {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[i] += h;
        minus[i] -= h;
        let fd = (p.loss(&Vector::new(plus)?)? - p.loss(&Vector::new(minus)?)?) / (2.0 * h);
        let rel = (fd - grad[i]).abs() / grad[i].abs().max(1.0);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Full-batch gradient descent to high accuracy, used as the reference
/// optimum for objectives without a closed form. Runs with step size
/// `2 / (mu + L)` until the gradient norm drops below `grad_tol` or
/// `max_steps` elapse, whichever is first.
pub fn minimize_full_batch(
    p: &dyn Problem,
    max_steps: u64,
    grad_tol: f64,
) -> Result<(Vector, f64)> {
    let lr = 2.0 / (p.mu() + p.smoothness());
    let mut theta = Vector::zeros(p.dim());
    for _ in 0..max_steps {
        let g = p.full_gradient(&theta)?;
        if g.norm() <= grad_tol {
            break;
        }
        theta = theta.axpy(-lr, &g);
    }
    let loss = p.loss(&theta)?;
    Ok((theta, loss))
}

/// [`minimize_full_batch`] with the default budget: one million steps or a
/// gradient norm of 1e-10.
pub fn baseline_optimum(p: &dyn Problem) -> Result<(Vector, f64)> {
    minimize_full_batch(p, 1_000_000, 1e-10)
}
