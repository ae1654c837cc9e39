//! Concrete strongly convex objectives: quadratics with a chosen spectrum,
//! ridge regression, and l2-regularized logistic regression.

use crate::error::{Error, Result};
use crate::numerics::{
    spectral_norm, symmetric_eigenvalues, Matrix, RandomState, Vector,
};
use crate::problems::{check_theta, Dataset, Problem};

/// `f(theta) = (theta - theta*)^T H (theta - theta*) / 2` with a prescribed
/// Hessian spectrum.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    hessian: Matrix,
    theta_star: Vector,
    mu: f64,
    smoothness: f64,
}

/// Builds a quadratic whose Hessian has exactly the given eigenvalues,
/// optionally conjugated by a seeded random rotation. `theta_star = None`
/// places the minimizer at the origin.
pub fn make_quadratic(
    eigs: &[f64],
    theta_star: Option<Vector>,
    rotate: bool,
    seed: u64,
) -> Result<QuadraticProblem> {
    if eigs.is_empty() {
        return Err(Error::Empty("eigenvalue list"));
    }
    if eigs.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::invalid("quadratic eigenvalues must be positive"));
    }
    let d = eigs.len();
    let theta_star = theta_star.unwrap_or_else(|| Vector::zeros(d));
    if theta_star.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: theta_star.dim(),
        });
    }
    let hessian = if rotate && d > 1 {
        let q = random_orthogonal(d, seed);
        // H = Q^T D Q, symmetrized to kill rounding asymmetry.
        let mut dq = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                dq[(i, j)] = eigs[i] * q[(i, j)];
            }
        }
        let mut h = q.transpose().matmul(&dq)?;
        for i in 0..d {
            for j in (i + 1)..d {
                let avg = 0.5 * (h[(i, j)] + h[(j, i)]);
                h[(i, j)] = avg;
                h[(j, i)] = avg;
            }
        }
        h
    } else {
        Matrix::diagonal(eigs)?
    };
    let mu = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let smoothness = eigs.iter().cloned().fold(0.0, f64::max);
    Ok(QuadraticProblem {
        hessian,
        theta_star,
        mu,
        smoothness,
    })
}

/// Random orthogonal matrix via modified Gram-Schmidt on a Gaussian matrix.
fn random_orthogonal(d: usize, seed: u64) -> Matrix {
    let mut rng = RandomState::new(seed);
    loop {
        let mut cols: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..d).map(|_| rng.next_gaussian()).collect())
            .collect();
        let mut ok = true;
        for j in 0..d {
            for i in 0..j {
                let dot: f64 = cols[j].iter().zip(&cols[i]).map(|(a, b)| a * b).sum();
                let (head, tail) = cols.split_at_mut(j);
                for (x, &b) in tail[0].iter_mut().zip(&head[i]) {
                    *x -= dot * b;
                }
            }
            let norm: f64 = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for x in &mut cols[j] {
                *x /= norm;
            }
        }
        if ok {
            let mut q = Matrix::zeros(d, d);
            for (i, col) in cols.iter().enumerate() {
                for (j, &v) in col.iter().enumerate() {
                    q[(i, j)] = v;
                }
            }
            return q;
        }
    }
}

impl QuadraticProblem {
    pub fn hessian(&self) -> &Matrix {
        &self.hessian
    }
}

impl Problem for QuadraticProblem {
    fn dim(&self) -> usize {
        self.theta_star.dim()
    }

    fn loss(&self, theta: &Vector) -> Result<f64> {
        check_theta(self, theta)?;
        let r = theta - &self.theta_star;
        Ok(0.5 * r.dot(&self.hessian.matvec(&r)?))
    }

    fn full_gradient(&self, theta: &Vector) -> Result<Vector> {
        check_theta(self, theta)?;
        self.hessian.matvec(&(theta - &self.theta_star))
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn theta_star(&self) -> Option<&Vector> {
        Some(&self.theta_star)
    }

    fn optimal_loss(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `F(theta) = |X theta - y|^2 / 2n + lambda |theta|^2 / 2` with the
/// closed-form minimizer.
#[derive(Debug, Clone)]
pub struct RidgeProblem {
    x: Matrix,
    y: Vec<f64>,
    lambda: f64,
    theta_star: Vector,
    optimal_loss: f64,
    mu: f64,
    smoothness: f64,
}

pub fn make_ridge(data: &Dataset, lambda: f64) -> Result<RidgeProblem> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!(
            "ridge penalty must be finite and >= 0, got {lambda}"
        )));
    }
    let n = data.n() as f64;
    let d = data.dim();
    let mut gram = data.x().gram();
    for i in 0..d {
        for j in 0..d {
            gram[(i, j)] /= n;
        }
    }
    let gram_eigs = symmetric_eigenvalues(&gram)?;
    let (gmin, gmax) = (gram_eigs[0].max(0.0), gram_eigs[d - 1]);
    if lambda == 0.0 && gmin <= 1e-12 * gmax.max(1.0) {
        return Err(Error::SingularSystem);
    }
    let mut system = gram.clone();
    for i in 0..d {
        system[(i, i)] += lambda;
    }
    // theta* = (X^T X / n + lambda I)^{-1} X^T y / n.
    let mut xty = vec![0.0; d];
    for i in 0..data.n() {
        let row = data.x().row(i);
        for (acc, &xj) in xty.iter_mut().zip(row) {
            *acc += xj * data.y()[i];
        }
    }
    for v in &mut xty {
        *v /= n;
    }
    let theta_star = system.solve(&Vector::new(xty)?)?;
    let mut p = RidgeProblem {
        x: data.x().clone(),
        y: data.y().to_vec(),
        lambda,
        theta_star,
        optimal_loss: 0.0,
        mu: lambda + gmin,
        smoothness: lambda + gmax,
    };
    p.optimal_loss = p.loss(&p.theta_star.clone())?;
    Ok(p)
}

impl Problem for RidgeProblem {
    fn dim(&self) -> usize {
        self.x.cols()
    }

    fn loss(&self, theta: &Vector) -> Result<f64> {
        check_theta(self, theta)?;
        let n = self.y.len() as f64;
        let mut sq = 0.0;
        for i in 0..self.y.len() {
            let pred: f64 = self.x.row(i).iter().zip(theta.iter()).map(|(a, b)| a * b).sum();
            sq += (pred - self.y[i]).powi(2);
        }
        Ok(sq / (2.0 * n) + 0.5 * self.lambda * theta.dot(theta))
    }

    fn full_gradient(&self, theta: &Vector) -> Result<Vector> {
        check_theta(self, theta)?;
        let n = self.y.len() as f64;
        let mut g = vec![0.0; self.dim()];
        for i in 0..self.y.len() {
            let row = self.x.row(i);
            let residual: f64 =
                row.iter().zip(theta.iter()).map(|(a, b)| a * b).sum::<f64>() - self.y[i];
            for (acc, &xj) in g.iter_mut().zip(row) {
                *acc += residual * xj;
            }
        }
        for (gi, ti) in g.iter_mut().zip(theta.iter()) {
            *gi = *gi / n + self.lambda * ti;
        }
        Vector::new(g)
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn theta_star(&self) -> Option<&Vector> {
        Some(&self.theta_star)
    }

    fn optimal_loss(&self) -> Option<f64> {
        Some(self.optimal_loss)
    }

    fn num_samples(&self) -> usize {
        self.y.len()
    }

    fn sample_gradient(&self, index: usize, theta: &Vector) -> Result<Vector> {
        check_theta(self, theta)?;
        if index >= self.y.len() {
            return Err(Error::invalid(format!("sample index {index} out of range")));
        }
        let row = self.x.row(index);
        let residual: f64 =
            row.iter().zip(theta.iter()).map(|(a, b)| a * b).sum::<f64>() - self.y[index];
        let g: Vec<f64> = row
            .iter()
            .zip(theta.iter())
            .map(|(&xj, &tj)| residual * xj + self.lambda * tj)
            .collect();
        Vector::new(g)
    }
}

/// `F(theta) = (1/n) sum log(1 + exp(-y_i x_i^T theta)) + lambda |theta|^2 / 2`
/// over +-1 labels. No closed-form minimizer; use
/// [`crate::problems::baseline_optimum`] for a reference value.
#[derive(Debug, Clone)]
pub struct LogregProblem {
    x: Matrix,
    y: Vec<f64>,
    lambda: f64,
    mu: f64,
    smoothness: f64,
}

pub fn make_logreg(data: &Dataset, lambda: f64) -> Result<LogregProblem> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!(
            "logistic regression requires a positive l2 penalty, got {lambda}"
        )));
    }
    if !data.has_pm1_labels() {
        return Err(Error::invalid("logistic regression labels must be +-1"));
    }
    let n = data.n() as f64;
    let sigma_max = spectral_norm(data.x())?;
    Ok(LogregProblem {
        x: data.x().clone(),
        y: data.y().to_vec(),
        lambda,
        mu: lambda,
        // The logistic curvature is at most 1/4, so the data term's Hessian
        // is bounded by sigma_max(X)^2 / 4n.
        smoothness: lambda + sigma_max * sigma_max / (4.0 * n),
    })
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `1 / (1 + exp(z))`, i.e. the logistic loss derivative factor.
fn neg_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

impl Problem for LogregProblem {
    fn dim(&self) -> usize {
        self.x.cols()
    }

    fn loss(&self, theta: &Vector) -> Result<f64> {
        check_theta(self, theta)?;
        let n = self.y.len() as f64;
        let mut total = 0.0;
        for i in 0..self.y.len() {
            let margin: f64 = self
                .x
                .row(i)
                .iter()
                .zip(theta.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                * self.y[i];
            total += softplus(-margin);
        }
        Ok(total / n + 0.5 * self.lambda * theta.dot(theta))
    }

    fn full_gradient(&self, theta: &Vector) -> Result<Vector> {
        check_theta(self, theta)?;
        let n = self.y.len() as f64;
        let mut g = vec![0.0; self.dim()];
        for i in 0..self.y.len() {
            let row = self.x.row(i);
            let margin: f64 =
                row.iter().zip(theta.iter()).map(|(a, b)| a * b).sum::<f64>() * self.y[i];
            let coeff = -self.y[i] * neg_sigmoid(margin);
            for (acc, &xj) in g.iter_mut().zip(row) {
                *acc += coeff * xj;
            }
        }
        for (gi, ti) in g.iter_mut().zip(theta.iter()) {
            *gi = *gi / n + self.lambda * ti;
        }
        Vector::new(g)
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn num_samples(&self) -> usize {
        self.y.len()
    }

    fn sample_gradient(&self, index: usize, theta: &Vector) -> Result<Vector> {
        check_theta(self, theta)?;
        if index >= self.y.len() {
            return Err(Error::invalid(format!("sample index {index} out of range")));
        }
        let row = self.x.row(index);
        let margin: f64 =
            row.iter().zip(theta.iter()).map(|(a, b)| a * b).sum::<f64>() * self.y[index];
        let coeff = -self.y[index] * neg_sigmoid(margin);
        let g: Vec<f64> = row
            .iter()
            .zip(theta.iter())
            .map(|(&xj, &tj)| coeff * xj + self.lambda * tj)
            .collect();
        Vector::new(g)
    }
}
