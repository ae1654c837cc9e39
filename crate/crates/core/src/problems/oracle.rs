//! Stochastic gradient construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gaussian, RandomState, Vector};
use crate::problems::{check_theta, Problem};

/// How stochastic gradients are produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    /// Full gradient plus i.i.d. mean-zero Gaussian noise with per-coordinate
    /// standard deviation `sigma`, so `E|g - grad F|^2 = d sigma^2` exactly.
    #[serde(rename = "gaussian")]
    AdditiveGaussian { sigma: f64 },
    /// Mean gradient over `batch_size` samples drawn uniformly with
    /// replacement (unbiased by construction). `batch_size == n` is served
    /// by the exact full gradient.
    Minibatch { batch_size: usize },
}

/// A gradient oracle owning its random stream.
#[derive(Debug, Clone)]
pub struct GradientOracle {
    mode: OracleMode,
    rng: RandomState,
}

impl GradientOracle {
    pub fn new(mode: OracleMode, rng: RandomState) -> Result<Self> {
        match mode {
            OracleMode::AdditiveGaussian { sigma } => {
                if !(sigma >= 0.0) || !sigma.is_finite() {
                    return Err(Error::invalid(format!(
                        "oracle sigma must be finite and >= 0, got {sigma}"
                    )));
                }
            }
            OracleMode::Minibatch { batch_size } => {
                if batch_size == 0 {
                    return Err(Error::invalid("batch size must be positive"));
                }
            }
        }
        Ok(GradientOracle { mode, rng })
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    /// Draws one stochastic gradient at `theta`, advancing the stream.
    pub fn sample(&mut self, p: &dyn Problem, theta: &Vector) -> Result<Vector> {
        check_theta(p, theta)?;
        match self.mode {
            OracleMode::AdditiveGaussian { sigma } => {
                let full = p.full_gradient(theta)?;
                if sigma == 0.0 {
                    return Ok(full);
                }
                let noise = gaussian(&mut self.rng, p.dim(), sigma)?;
                Ok(&full + &noise)
            }
            OracleMode::Minibatch { batch_size } => {
                let n = p.num_samples();
                if batch_size > n {
                    return Err(Error::invalid(format!(
                        "batch size {batch_size} exceeds sample count {n}"
                    )));
                }
                if batch_size == n {
                    return p.full_gradient(theta);
                }
                let mut acc = Vector::zeros(p.dim());
                for _ in 0..batch_size {
                    let idx = self.rng.next_index(n);
                    acc = &acc + &p.sample_gradient(idx, theta)?;
                }
                Ok(acc.scale(1.0 / batch_size as f64))
            }
        }
    }
}
