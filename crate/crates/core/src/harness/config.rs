//! Experiment configuration: a single JSON document with a published
//! schema; flat CLI flags override file values. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::buffer::{CriticalBuffer, ReplacementStrategy, SelectionStrategy};
use crate::harness::{HResult, HarnessError};
use crate::numerics::{RandomState, Vector};
use crate::optim::{AggregationMode, OptimizerState, Rule};
use crate::problems::{
    make_logreg, make_quadratic, make_ridge, synth_classification, Dataset, GradientOracle,
    OracleMode, Problem, QuadraticProblem,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub buffer: BufferSpec,
    #[serde(default = "default_aggregation")]
    pub aggregation: AggregationMode,
    #[serde(default = "default_steps")]
    pub steps: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub oracle: OracleSpec,
    /// Output directory; CLI `--out` takes precedence.
    #[serde(default)]
    pub out: Option<String>,
    /// When set, the summary reports the first step whose loss is at or
    /// below this value.
    #[serde(default)]
    pub loss_threshold: Option<f64>,
    /// Sampling interval (in steps) for staleness histograms.
    #[serde(default = "default_epoch_interval")]
    pub epoch_interval: u64,
}

fn default_aggregation() -> AggregationMode {
    AggregationMode::Mean
}

fn default_steps() -> u64 {
    1000
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2, 3, 4]
}

fn default_epoch_interval() -> u64 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemSpec {
    Quadratic {
        eigs: Vec<f64>,
        #[serde(default)]
        theta_star: Option<Vec<f64>>,
        #[serde(default)]
        rotate: bool,
        #[serde(default)]
        seed: u64,
    },
    Ridge {
        data: DataSpec,
        lambda: f64,
    },
    Logreg {
        data: DataSpec,
        lambda: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSpec {
    Synthetic {
        n: usize,
        d: usize,
        #[serde(default = "default_class_sep")]
        class_sep: f64,
        #[serde(default)]
        flip_prob: f64,
        #[serde(default)]
        seed: u64,
    },
    File {
        path: String,
    },
}

fn default_class_sep() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    #[serde(default = "default_rule")]
    pub rule: Rule,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
    /// Initial parameters; defaults to the all-ones vector.
    #[serde(default)]
    pub theta0: Option<Vec<f64>>,
}

fn default_rule() -> Rule {
    Rule::Sgd
}

fn default_lr() -> f64 {
    0.02
}

fn default_gamma() -> f64 {
    0.9
}

fn default_beta1() -> f64 {
    0.9
}

fn default_beta2() -> f64 {
    0.999
}

fn default_epsilon() -> f64 {
    1e-8
}

fn default_smoothing() -> f64 {
    0.9
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec {
            rule: default_rule(),
            lr: default_lr(),
            gamma: default_gamma(),
            beta1: default_beta1(),
            beta2: default_beta2(),
            epsilon: default_epsilon(),
            smoothing: default_smoothing(),
            theta0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferSpec {
    #[serde(default = "default_topc")]
    pub topc: usize,
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default = "default_select")]
    pub select: SelectionStrategy,
    #[serde(default = "default_replace")]
    pub replace: ReplacementStrategy,
}

fn default_topc() -> usize {
    5
}

fn default_decay() -> f64 {
    0.9
}

fn default_select() -> SelectionStrategy {
    SelectionStrategy::Koth
}

fn default_replace() -> ReplacementStrategy {
    ReplacementStrategy::MinProxy
}

impl Default for BufferSpec {
    fn default() -> Self {
        BufferSpec {
            topc: default_topc(),
            decay: default_decay(),
            select: default_select(),
            replace: default_replace(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OracleSpec(pub OracleMode);

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec(OracleMode::AdditiveGaussian { sigma: 0.0 })
    }
}

/// Flat CLI overrides; every `Some` wins over the config file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub steps: Option<u64>,
    pub topc: Option<usize>,
    pub decay: Option<f64>,
    pub aggr: Option<AggregationMode>,
    pub optimizer: Option<Rule>,
    pub select: Option<SelectionStrategy>,
    pub replace: Option<ReplacementStrategy>,
    pub out: Option<String>,
}

impl ExperimentConfig {
    /// A small noisy quadratic run; the default when no config file is
    /// given.
    pub fn default_quadratic() -> Self {
        ExperimentConfig {
            problem: ProblemSpec::Quadratic {
                eigs: vec![1.0, 3.25, 5.5, 7.75, 10.0],
                theta_star: None,
                rotate: false,
                seed: 0,
            },
            optimizer: OptimizerSpec::default(),
            buffer: BufferSpec::default(),
            aggregation: default_aggregation(),
            steps: default_steps(),
            seeds: default_seeds(),
            oracle: OracleSpec(OracleMode::AdditiveGaussian { sigma: 0.5 }),
            out: None,
            loss_threshold: None,
            epoch_interval: default_epoch_interval(),
        }
    }

    pub fn from_json(text: &str) -> HResult<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| HarnessError::config(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path) -> HResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seeds = vec![seed];
        }
        if let Some(steps) = o.steps {
            self.steps = steps;
        }
        if let Some(topc) = o.topc {
            self.buffer.topc = topc;
        }
        if let Some(decay) = o.decay {
            self.buffer.decay = decay;
        }
        if let Some(aggr) = o.aggr {
            self.aggregation = aggr;
        }
        if let Some(rule) = o.optimizer {
            self.optimizer.rule = rule;
        }
        if let Some(select) = o.select {
            self.buffer.select = select;
        }
        if let Some(replace) = o.replace {
            self.buffer.replace = replace;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
    }

    /// Checks every field against the module preconditions by exercising
    /// the builders once before any run starts.
    pub fn validate(&self) -> HResult<()> {
        if self.seeds.is_empty() {
            return Err(HarnessError::config("seeds list must not be empty"));
        }
        if self.epoch_interval == 0 {
            return Err(HarnessError::config("epoch_interval must be positive"));
        }
        let problem = self.build_problem()?;
        self.build_optimizer(problem.as_ref())?;
        self.build_buffer(RandomState::new(0))?;
        self.build_oracle(RandomState::new(0))?;
        if let OracleMode::Minibatch { batch_size } = self.oracle.0 {
            if batch_size > problem.num_samples() {
                return Err(HarnessError::config(format!(
                    "batch size {batch_size} exceeds dataset size {}",
                    problem.num_samples()
                )));
            }
        }
        Ok(())
    }

    pub fn build_dataset(spec: &DataSpec) -> HResult<Dataset> {
        match spec {
            DataSpec::Synthetic {
                n,
                d,
                class_sep,
                flip_prob,
                seed,
            } => Ok(synth_classification(*n, *d, *class_sep, *flip_prob, *seed)?),
            DataSpec::File { path } => Ok(Dataset::read_file(std::path::Path::new(path))?),
        }
    }

    pub fn build_problem(&self) -> HResult<Box<dyn Problem>> {
        match &self.problem {
            ProblemSpec::Quadratic { .. } => Ok(Box::new(self.build_quadratic()?)),
            ProblemSpec::Ridge { data, lambda } => {
                let ds = Self::build_dataset(data)?;
                Ok(Box::new(make_ridge(&ds, *lambda)?))
            }
            ProblemSpec::Logreg { data, lambda } => {
                let ds = Self::build_dataset(data)?;
                Ok(Box::new(make_logreg(&ds, *lambda)?))
            }
        }
    }

    /// The quadratic instance, when the problem is one (the linear-system
    /// replay needs the explicit Hessian).
    pub fn build_quadratic(&self) -> HResult<QuadraticProblem> {
        match &self.problem {
            ProblemSpec::Quadratic {
                eigs,
                theta_star,
                rotate,
                seed,
            } => {
                let ts = theta_star
                    .clone()
                    .map(Vector::new)
                    .transpose()?;
                Ok(make_quadratic(eigs, ts, *rotate, *seed)?)
            }
            _ => Err(HarnessError::config("this operation requires a quadratic problem")),
        }
    }

    pub fn build_optimizer(&self, problem: &dyn Problem) -> HResult<OptimizerState> {
        let theta0 = match &self.optimizer.theta0 {
            Some(v) => Vector::new(v.clone())?,
            None => Vector::filled(problem.dim(), 1.0)?,
        };
        if theta0.dim() != problem.dim() {
            return Err(HarnessError::config(format!(
                "theta0 has dimension {}, problem has {}",
                theta0.dim(),
                problem.dim()
            )));
        }
        let o = &self.optimizer;
        Ok(match o.rule {
            Rule::Sgd => OptimizerState::sgd(theta0, o.lr)?,
            Rule::Sgdm => OptimizerState::sgdm(theta0, o.lr, o.gamma)?,
            Rule::Rmsprop => OptimizerState::rmsprop(theta0, o.lr, o.smoothing, o.epsilon)?,
            Rule::Adam => OptimizerState::adam(theta0, o.lr, o.beta1, o.beta2, o.epsilon)?,
        })
    }

    pub fn build_buffer(&self, rng: RandomState) -> HResult<CriticalBuffer> {
        Ok(CriticalBuffer::new(
            self.buffer.topc,
            self.buffer.decay,
            self.buffer.select,
            self.buffer.replace,
            rng,
        )?)
    }

    pub fn build_oracle(&self, rng: RandomState) -> HResult<GradientOracle> {
        Ok(GradientOracle::new(self.oracle.0, rng)?)
    }

    pub fn out_dir(&self) -> std::path::PathBuf {
        std::path::PathBuf::from(self.out.clone().unwrap_or_else(|| "gradmem-out".to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        ExperimentConfig::default_quadratic().validate().unwrap();
    }

    #[test]
    fn json_round_trip_is_identity() {
        let mut config = ExperimentConfig::default_quadratic();
        config.loss_threshold = Some(1e-6);
        config.out = Some("somewhere".into());
        let text = config.to_json();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{
            "problem": {"quadratic": {"eigs": [1.0]}},
            "bogus_key": 1
        }"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        let text = r#"{
            "problem": {"quadratic": {"eigs": [1.0], "extra": true}}
        }"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let text = r#"{"problem": {"quadratic": {"eigs": [1.0, 10.0]}}}"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(config.buffer.topc, 5);
        assert_eq!(config.buffer.decay, 0.9);
        assert_eq!(config.optimizer.rule, Rule::Sgd);
        assert_eq!(config.steps, 1000);
        assert_eq!(config.seeds.len(), 5);
    }

    #[test]
    fn overrides_win() {
        let mut config = ExperimentConfig::default_quadratic();
        config.apply_overrides(&Overrides {
            seed: Some(9),
            steps: Some(7),
            topc: Some(2),
            decay: Some(0.7),
            aggr: Some(AggregationMode::Sum),
            optimizer: Some(Rule::Adam),
            select: Some(SelectionStrategy::Fifo),
            replace: Some(ReplacementStrategy::Ncpr),
            out: Some("o".into()),
        });
        assert_eq!(config.seeds, vec![9]);
        assert_eq!(config.steps, 7);
        assert_eq!(config.buffer.topc, 2);
        assert_eq!(config.buffer.decay, 0.7);
        assert_eq!(config.aggregation, AggregationMode::Sum);
        assert_eq!(config.optimizer.rule, Rule::Adam);
        assert_eq!(config.buffer.select, SelectionStrategy::Fifo);
        assert_eq!(config.buffer.replace, ReplacementStrategy::Ncpr);
        assert_eq!(config.out.as_deref(), Some("o"));
    }

    #[test]
    fn invalid_values_rejected_by_validation() {
        let text = r#"{"problem": {"quadratic": {"eigs": [1.0, -1.0]}}}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        let text = r#"{
            "problem": {"quadratic": {"eigs": [1.0]}},
            "buffer": {"decay": 1.5}
        }"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        let text = r#"{
            "problem": {"quadratic": {"eigs": [1.0]}},
            "seeds": []
        }"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn logreg_config_builds() {
        let text = r#"{
            "problem": {"logreg": {
                "data": {"synthetic": {"n": 40, "d": 3, "flip_prob": 0.1, "seed": 2}},
                "lambda": 0.1
            }},
            "oracle": {"minibatch": {"batch_size": 10}},
            "steps": 10
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        let p = config.build_problem().unwrap();
        assert_eq!(p.dim(), 3);
        assert_eq!(p.num_samples(), 40);
    }
}
