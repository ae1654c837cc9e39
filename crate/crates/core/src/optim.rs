//! Aggregation functions and optimizer update rules, vanilla and
//! memory-augmented, plus the per-step training loop.
//!
//! Each training step runs in a fixed order: sample a stochastic gradient,
//! aggregate it with the buffer contents, apply the optimizer update, offer
//! the raw gradient to the buffer, then decay every proxy norm once. With a
//! capacity-0 buffer every `_C` optimizer is bit-identical to its vanilla
//! counterpart.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::buffer::CriticalBuffer;
use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::problems::{GradientOracle, Problem};

/// How the current gradient is combined with the buffer contents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AggregationMode {
    /// Average of the current gradient and every buffer entry, dividing by
    /// (buffer size + 1). A partially full buffer divides by the actual
    /// size, not the capacity, so warm-up weights stay in [0, 1].
    #[serde(rename = "mean")]
    Mean,
    /// Current gradient plus the average of the buffer entries.
    #[serde(rename = "sum")]
    Sum,
    /// Average of the current gradient and the buffer entry of smallest true
    /// norm (ablation mode).
    #[serde(rename = "min")]
    MinNormOnly,
    /// As above with the largest true norm.
    #[serde(rename = "max")]
    MaxNormOnly,
    /// As above with the median true norm (lower median for even sizes).
    #[serde(rename = "median")]
    MedianNormOnly,
}

impl AggregationMode {
    pub const ALL: [AggregationMode; 5] = [
        AggregationMode::Mean,
        AggregationMode::Sum,
        AggregationMode::MinNormOnly,
        AggregationMode::MaxNormOnly,
        AggregationMode::MedianNormOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AggregationMode::Mean => "mean",
            AggregationMode::Sum => "sum",
            AggregationMode::MinNormOnly => "min",
            AggregationMode::MaxNormOnly => "max",
            AggregationMode::MedianNormOnly => "median",
        }
    }

    /// Aggregation weight carried by the current gradient for a given
    /// buffer size.
    pub fn current_weight(self, buffer_len: usize) -> f64 {
        if buffer_len == 0 {
            return 1.0;
        }
        match self {
            AggregationMode::Mean => 1.0 / (buffer_len as f64 + 1.0),
            AggregationMode::Sum => 1.0,
            _ => 0.5,
        }
    }
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AggregationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AggregationMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown aggregation mode '{s}'")))
    }
}

/// Combines the current gradient with the buffer per the aggregation mode.
/// An empty buffer returns the current gradient unchanged in every mode.
pub fn aggregate(g_t: &Vector, buf: &CriticalBuffer, mode: AggregationMode) -> Result<Vector> {
    if buf.is_empty() {
        return Ok(g_t.clone());
    }
    buf.entries()[0].gradient().check_dim(g_t)?;
    let n = buf.len() as f64;
    match mode {
        AggregationMode::Mean => {
            let mut acc = g_t.clone();
            for e in buf.entries() {
                acc = &acc + e.gradient();
            }
            Ok(acc.scale(1.0 / (n + 1.0)))
        }
        AggregationMode::Sum => {
            let mut acc = buf.entries()[0].gradient().clone();
            for e in &buf.entries()[1..] {
                acc = &acc + e.gradient();
            }
            Ok(g_t.axpy(1.0 / n, &acc))
        }
        AggregationMode::MinNormOnly
        | AggregationMode::MaxNormOnly
        | AggregationMode::MedianNormOnly => {
            let idx = buf.single_entry_index(mode);
            Ok((g_t + buf.entries()[idx].gradient()).scale(0.5))
        }
    }
}

/// Base update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Sgd,
    Sgdm,
    Rmsprop,
    Adam,
}

impl Rule {
    pub const ALL: [Rule; 4] = [Rule::Sgd, Rule::Sgdm, Rule::Rmsprop, Rule::Adam];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Sgd => "sgd",
            Rule::Sgdm => "sgdm",
            Rule::Rmsprop => "rmsprop",
            Rule::Adam => "adam",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown optimizer rule '{s}'")))
    }
}

/// Parameters plus per-rule accumulators. `m` is the first moment (momentum
/// for SGDM, EMA for Adam); `v` is the second moment (`E[g^2]` for RMSprop,
/// EMA of squares for Adam).
#[derive(Debug, Clone)]
pub struct OptimizerState {
    rule: Rule,
    theta: Vector,
    lr: f64,
    gamma: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    smoothing: f64,
    m: Vector,
    v: Vector,
    t: u64,
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::invalid(format!("{name} must be in [0, 1), got {x}")));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::invalid(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

impl OptimizerState {
    pub fn sgd(theta: Vector, lr: f64) -> Result<Self> {
        check_positive("learning rate", lr)?;
        Ok(Self::raw(Rule::Sgd, theta, lr, 0.0, 0.9, 0.999, 1e-8, 0.9))
    }

    pub fn sgdm(theta: Vector, lr: f64, gamma: f64) -> Result<Self> {
        check_positive("learning rate", lr)?;
        check_unit_interval("momentum", gamma)?;
        Ok(Self::raw(Rule::Sgdm, theta, lr, gamma, 0.9, 0.999, 1e-8, 0.9))
    }

    /// `smoothing` is the EMA coefficient on the running second moment; the
    /// printed update uses 0.9 and the artifact keeps that as the default.
    pub fn rmsprop(theta: Vector, lr: f64, smoothing: f64, epsilon: f64) -> Result<Self> {
        check_positive("learning rate", lr)?;
        check_unit_interval("smoothing", smoothing)?;
        check_positive("epsilon", epsilon)?;
        Ok(Self::raw(Rule::Rmsprop, theta, lr, 0.0, 0.9, 0.999, epsilon, smoothing))
    }

    pub fn adam(theta: Vector, lr: f64, beta1: f64, beta2: f64, epsilon: f64) -> Result<Self> {
        check_positive("learning rate", lr)?;
        check_unit_interval("beta1", beta1)?;
        check_unit_interval("beta2", beta2)?;
        check_positive("epsilon", epsilon)?;
        Ok(Self::raw(Rule::Adam, theta, lr, 0.0, beta1, beta2, epsilon, 0.9))
    }

    fn raw(
        rule: Rule,
        theta: Vector,
        lr: f64,
        gamma: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        smoothing: f64,
    ) -> Self {
        let d = theta.dim();
        OptimizerState {
            rule,
            theta,
            lr,
            gamma,
            beta1,
            beta2,
            epsilon,
            smoothing,
            m: Vector::zeros(d),
            v: Vector::zeros(d),
            t: 0,
        }
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn theta(&self) -> &Vector {
        &self.theta
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    fn check_rule(&self, expected: Rule) -> Result<()> {
        if self.rule != expected {
            return Err(Error::invalid(format!(
                "state built for {} used with {expected} update",
                self.rule
            )));
        }
        Ok(())
    }

    /// Dispatches to the update rule this state was built for.
    pub fn step(&mut self, g_agg: &Vector) -> Result<()> {
        match self.rule {
            Rule::Sgd => self.step_sgd(g_agg),
            Rule::Sgdm => self.step_sgdm(g_agg),
            Rule::Rmsprop => self.step_rmsprop(g_agg),
            Rule::Adam => self.step_adam(g_agg),
        }
    }

    /// `theta <- theta - lr * g`.
    pub fn step_sgd(&mut self, g_agg: &Vector) -> Result<()> {
        self.check_rule(Rule::Sgd)?;
        self.theta.check_dim(g_agg)?;
        self.theta = self.theta.axpy(-self.lr, g_agg);
        self.t += 1;
        Ok(())
    }

    /// `m <- gamma m + g; theta <- theta - lr * m`.
    pub fn step_sgdm(&mut self, g_agg: &Vector) -> Result<()> {
        self.check_rule(Rule::Sgdm)?;
        self.theta.check_dim(g_agg)?;
        self.m = self.m.scale(self.gamma);
        self.m = &self.m + g_agg;
        self.theta = self.theta.axpy(-self.lr, &self.m);
        self.t += 1;
        Ok(())
    }

    /// `v <- s v + (1 - s) g^2; theta_i <- theta_i - lr g_i / sqrt(v_i + eps)`.
    pub fn step_rmsprop(&mut self, g_agg: &Vector) -> Result<()> {
        self.check_rule(Rule::Rmsprop)?;
        self.theta.check_dim(g_agg)?;
        let s = self.smoothing;
        let v: Vec<f64> = self
            .v
            .iter()
            .zip(g_agg.iter())
            .map(|(v, g)| s * v + (1.0 - s) * g * g)
            .collect();
        let theta: Vec<f64> = self
            .theta
            .iter()
            .zip(v.iter().zip(g_agg.iter()))
            .map(|(th, (v, g))| th - self.lr / (v + self.epsilon).sqrt() * g)
            .collect();
        self.v = Vector::new(v)?;
        self.theta = Vector::new(theta)?;
        self.t += 1;
        Ok(())
    }

    /// Adam with bias correction; the correction counter is 1 on the first
    /// step so `1 - beta^t` is never zero.
    pub fn step_adam(&mut self, g_agg: &Vector) -> Result<()> {
        self.check_rule(Rule::Adam)?;
        self.theta.check_dim(g_agg)?;
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let m: Vec<f64> = self
            .m
            .iter()
            .zip(g_agg.iter())
            .map(|(m, g)| b1 * m + (1.0 - b1) * g)
            .collect();
        let v: Vec<f64> = self
            .v
            .iter()
            .zip(g_agg.iter())
            .map(|(v, g)| b2 * v + (1.0 - b2) * g * g)
            .collect();
        let mc = 1.0 - b1.powi(self.t as i32);
        let vc = 1.0 - b2.powi(self.t as i32);
        let theta: Vec<f64> = self
            .theta
            .iter()
            .zip(m.iter().zip(v.iter()))
            .map(|(th, (m, v))| {
                let m_hat = m / mc;
                let v_hat = v / vc;
                th - self.lr * m_hat / (v_hat.sqrt() + self.epsilon)
            })
            .collect();
        self.m = Vector::new(m)?;
        self.v = Vector::new(v)?;
        self.theta = Vector::new(theta)?;
        Ok(())
    }
}

/// Which optional per-step artifacts [`train`] should keep.
#[derive(Debug, Clone, Copy, Default)]
pub struct RecordOptions {
    /// Keep the full parameter vector after every step.
    pub thetas: bool,
    /// Keep `(source step, weight)` pairs describing the aggregation each
    /// step actually applied.
    pub weights: bool,
    /// Keep the gradient noise `g_t - grad F(theta_t)` per step.
    pub noise: bool,
    /// Keep the full list of buffer entry ages per step.
    pub ages: bool,
}

impl RecordOptions {
    pub fn everything() -> Self {
        RecordOptions {
            thetas: true,
            weights: true,
            noise: true,
            ages: true,
        }
    }
}

/// Scalar statistics for one training step. Gradient-vs-buffer statistics
/// (`gc_norm_mean`, `norm_gap`) describe the buffer the aggregation step
/// actually consumed, i.e. before the offer; size, proxy, and age columns
/// describe the buffer at the end of the step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: u64,
    /// Objective value after the update.
    pub loss: f64,
    /// Norm of the sampled stochastic gradient.
    pub grad_norm: f64,
    /// Distance to the known minimizer after the update, when available.
    pub dist_to_opt: Option<f64>,
    pub buffer_size: usize,
    /// 0.0 when the buffer is empty.
    pub buffer_min_proxy: f64,
    pub buffer_mean_age: f64,
    pub buffer_max_age: u64,
    /// Mean true norm of the pre-offer buffer; 0.0 when empty.
    pub gc_norm_mean: f64,
    /// `gc_norm_mean - grad_norm`; 0.0 by convention on empty-buffer steps.
    pub norm_gap: f64,
    /// `(source step, weight)` pairs, current gradient first; empty unless
    /// recording was requested.
    pub weights: Vec<(u64, f64)>,
    /// Entry ages at the end of the step; empty unless requested.
    pub ages: Vec<u64>,
}

/// Output of [`train`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Distance from the initial parameters to the minimizer, if known.
    pub initial_dist: Option<f64>,
    pub steps: Vec<StepRecord>,
    pub final_theta: Vector,
    /// Parameters after each step (only when requested).
    pub thetas: Vec<Vector>,
    /// Gradient noise realizations per step (only when requested).
    pub noise: Vec<Vector>,
}

impl Trajectory {
    pub fn final_loss(&self) -> Option<f64> {
        self.steps.last().map(|s| s.loss)
    }
}

/// Runs the memory-augmented training loop for `steps` iterations.
///
/// Per step: sample gradient, aggregate with the buffer, optimizer update,
/// offer the raw gradient, decay all proxies.
pub fn train(
    problem: &dyn Problem,
    opt: &mut OptimizerState,
    buf: &mut CriticalBuffer,
    mode: AggregationMode,
    steps: u64,
    oracle: &mut GradientOracle,
    record: RecordOptions,
) -> Result<Trajectory> {
    if opt.theta().dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: opt.theta().dim(),
        });
    }
    let initial_dist = problem
        .theta_star()
        .map(|ts| (opt.theta() - ts).norm());
    let mut out = Trajectory {
        initial_dist,
        steps: Vec::with_capacity(steps as usize),
        final_theta: opt.theta().clone(),
        thetas: Vec::new(),
        noise: Vec::new(),
    };
    for t in 0..steps {
        let g_t = oracle.sample(problem, opt.theta())?;
        let grad_norm = g_t.norm();

        let weights = if record.weights {
            let mut ws = vec![(t, mode.current_weight(buf.len()))];
            ws.extend(
                buf.entries_and_weights(mode)
                    .iter()
                    .zip(buf.entries())
                    .map(|(&(_, w), e)| (e.inserted_at(), w)),
            );
            ws
        } else {
            Vec::new()
        };
        if record.noise {
            let full = problem.full_gradient(opt.theta())?;
            out.noise.push(&g_t - &full);
        }
        let gc_norm_mean = buf.mean_true_norm().unwrap_or(0.0);
        let norm_gap = if buf.is_empty() {
            0.0
        } else {
            gc_norm_mean - grad_norm
        };

        let g_agg = aggregate(&g_t, buf, mode)?;
        opt.step(&g_agg)?;
        buf.offer(g_t, t)?;
        buf.decay_all();

        let ages = buf.ages(t)?;
        let (age_sum, age_max) = ages
            .iter()
            .fold((0u64, 0u64), |(s, m), &a| (s + a, m.max(a)));
        out.steps.push(StepRecord {
            step: t,
            loss: problem.loss(opt.theta())?,
            grad_norm,
            dist_to_opt: problem.theta_star().map(|ts| (opt.theta() - ts).norm()),
            buffer_size: buf.len(),
            buffer_min_proxy: buf.min_proxy().unwrap_or(0.0),
            buffer_mean_age: if ages.is_empty() {
                0.0
            } else {
                age_sum as f64 / ages.len() as f64
            },
            buffer_max_age: age_max,
            gc_norm_mean,
            norm_gap,
            weights,
            ages: if record.ages { ages } else { Vec::new() },
        });
        if record.thetas {
            out.thetas.push(opt.theta().clone());
        }
    }
    out.final_theta = opt.theta().clone();
    Ok(out)
}
