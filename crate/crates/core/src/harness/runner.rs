//! Executes configured experiments and writes their artifacts.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::harness::config::ExperimentConfig;
use crate::harness::csv::write_run_csv;
use crate::harness::{HResult, HarnessError};
use crate::numerics::RandomState;
use crate::optim::{train, RecordOptions, Trajectory};
use crate::problems::Problem;

/// Cross-seed summary written next to the per-seed CSVs.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub steps: u64,
    pub seeds: Vec<u64>,
    pub final_loss_per_seed: Vec<f64>,
    pub final_loss_mean: f64,
    pub final_loss_stddev: f64,
    pub final_dist_per_seed: Option<Vec<f64>>,
    pub final_dist_mean: Option<f64>,
    pub loss_threshold: Option<f64>,
    /// First step index with loss at or below the threshold, per seed.
    pub steps_to_threshold: Option<Vec<Option<u64>>>,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn stddev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// One deterministic training run for `seed`. The seed feeds a master
/// stream that is split once for the oracle and once for the buffer, so
/// runs differing only in strategy parameters stay comparable.
pub fn run_single(
    config: &ExperimentConfig,
    seed: u64,
    record: RecordOptions,
) -> HResult<(Trajectory, Box<dyn Problem>)> {
    let problem = config.build_problem()?;
    let mut master = RandomState::new(seed);
    let oracle_rng = master.split();
    let buffer_rng = master.split();
    let mut opt = config.build_optimizer(problem.as_ref())?;
    let mut buf = config.build_buffer(buffer_rng)?;
    let mut oracle = config.build_oracle(oracle_rng)?;
    let traj = train(
        problem.as_ref(),
        &mut opt,
        &mut buf,
        config.aggregation,
        config.steps,
        &mut oracle,
        record,
    )?;
    Ok((traj, problem))
}

/// Output file paths of [`run`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub csv_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
    pub summary: RunSummary,
}

/// Runs every seed in the config, writing one `run_seed<seed>.csv` per seed
/// plus `summary.json` into the output directory.
pub fn run(config: &ExperimentConfig) -> HResult<RunArtifacts> {
    config.validate()?;
    let out_dir = config.out_dir();
    create_dir(&out_dir)?;
    let mut csv_paths = Vec::new();
    let mut trajectories = Vec::new();
    let mut problem = None;
    for &seed in &config.seeds {
        let (traj, p) = run_single(config, seed, RecordOptions::default())?;
        let path = out_dir.join(format!("run_seed{seed}.csv"));
        write_text(&path, &write_run_csv(&traj))?;
        csv_paths.push(path);
        trajectories.push(traj);
        problem.get_or_insert(p);
    }
    let problem = problem.expect("at least one seed");
    let summary = summarize(config, problem.as_ref(), &trajectories)?;
    let summary_path = out_dir.join("summary.json");
    write_text(
        &summary_path,
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    Ok(RunArtifacts {
        csv_paths,
        summary_path,
        summary,
    })
}

pub fn summarize(
    config: &ExperimentConfig,
    problem: &dyn Problem,
    trajectories: &[Trajectory],
) -> HResult<RunSummary> {
    let mut final_losses = Vec::with_capacity(trajectories.len());
    for traj in trajectories {
        match traj.final_loss() {
            Some(loss) => final_losses.push(loss),
            None => final_losses.push(problem.loss(&traj.final_theta)?),
        }
    }
    let final_dists: Option<Vec<f64>> = trajectories
        .iter()
        .map(|t| {
            t.steps
                .last()
                .map(|s| s.dist_to_opt)
                .unwrap_or(t.initial_dist)
        })
        .collect();
    let steps_to_threshold = config.loss_threshold.map(|threshold| {
        trajectories
            .iter()
            .map(|t| {
                t.steps
                    .iter()
                    .find(|s| s.loss <= threshold)
                    .map(|s| s.step)
            })
            .collect()
    });
    Ok(RunSummary {
        steps: config.steps,
        seeds: config.seeds.clone(),
        final_loss_mean: mean(&final_losses),
        final_loss_stddev: stddev(&final_losses),
        final_loss_per_seed: final_losses,
        final_dist_mean: final_dists.as_deref().map(mean),
        final_dist_per_seed: final_dists,
        loss_threshold: config.loss_threshold,
        steps_to_threshold,
    })
}

pub(crate) fn create_dir(path: &Path) -> HResult<()> {
    std::fs::create_dir_all(path).map_err(|e| HarnessError::io(path.display().to_string(), e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> HResult<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path.display().to_string(), e))
}
