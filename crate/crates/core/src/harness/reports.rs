//! Analysis artifacts built on top of runs: staleness histograms, buffer
//! norm-gap series, and strategy-ablation sweeps.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::buffer::{ReplacementStrategy, SelectionStrategy};
use crate::error::Error;
use crate::harness::config::ExperimentConfig;
use crate::harness::csv::RunRow;
use crate::harness::runner::{mean, run_single, stddev};
use crate::harness::{HResult, HarnessError};
use crate::optim::{AggregationMode, RecordOptions, Trajectory};
use crate::problems::{baseline_optimum, Problem};

/// Histogram of buffer-entry ages sampled at the end of every
/// `interval`-step epoch, across all given trajectories. Trajectories must
/// have been recorded with ages enabled.
pub fn staleness_report(
    trajectories: &[Trajectory],
    interval: u64,
) -> HResult<BTreeMap<u64, u64>> {
    if interval == 0 {
        return Err(HarnessError::config("sampling interval must be positive"));
    }
    let mut histogram = BTreeMap::new();
    for traj in trajectories {
        for rec in &traj.steps {
            if (rec.step + 1) % interval != 0 {
                continue;
            }
            if rec.buffer_size > 0 && rec.ages.is_empty() {
                return Err(HarnessError::Core(Error::invalid(
                    "trajectory lacks age records; rerun with age recording enabled",
                )));
            }
            for &age in &rec.ages {
                *histogram.entry(age).or_insert(0) += 1;
            }
        }
    }
    Ok(histogram)
}

pub fn max_recorded_age(histogram: &BTreeMap<u64, u64>) -> Option<u64> {
    histogram.keys().next_back().copied()
}

/// Runs the config across its seeds with age recording and returns the
/// histogram plus the artifact rows (`age,count`).
pub fn staleness_from_config(config: &ExperimentConfig) -> HResult<BTreeMap<u64, u64>> {
    config.validate()?;
    let record = RecordOptions {
        ages: true,
        ..Default::default()
    };
    let mut trajectories = Vec::new();
    for &seed in &config.seeds {
        trajectories.push(run_single(config, seed, record)?.0);
    }
    staleness_report(&trajectories, config.epoch_interval)
}

pub fn histogram_csv(histogram: &BTreeMap<u64, u64>) -> String {
    let mut out = String::from("age,count\n");
    for (age, count) in histogram {
        out.push_str(&format!("{age},{count}\n"));
    }
    out
}

/// Per-step norm-gap series (mean over seeds) and the summary statistic:
/// the mean gap over the last quartile of steps.
#[derive(Debug, Clone, Serialize)]
pub struct NormGapReport {
    pub topc: usize,
    /// `(step, mean over seeds of gc_norm_mean - grad_norm)`.
    #[serde(skip)]
    pub series: Vec<(u64, f64)>,
    pub mean_gap_last_quartile: f64,
}

/// Builds the gap series from parsed run rows (one row set per seed). The
/// rows must carry the `gc_norm_mean` and `grad_norm` derived `norm_gap`
/// column; empty-buffer steps already report a gap of zero by convention.
pub fn norm_gap_report(topc: usize, per_seed_rows: &[Vec<RunRow>]) -> HResult<NormGapReport> {
    let steps = per_seed_rows
        .first()
        .map(|r| r.len())
        .ok_or_else(|| HarnessError::config("no rows given"))?;
    if steps == 0 {
        return Err(HarnessError::config("empty run records"));
    }
    if per_seed_rows.iter().any(|r| r.len() != steps) {
        return Err(HarnessError::config("seed runs have differing lengths"));
    }
    let mut series = Vec::with_capacity(steps);
    for i in 0..steps {
        let gaps: Vec<f64> = per_seed_rows.iter().map(|rows| rows[i].norm_gap).collect();
        series.push((per_seed_rows[0][i].step, mean(&gaps)));
    }
    let quartile_start = steps - steps.div_ceil(4);
    let tail: Vec<f64> = series[quartile_start..].iter().map(|&(_, g)| g).collect();
    Ok(NormGapReport {
        topc,
        mean_gap_last_quartile: mean(&tail),
        series,
    })
}

/// Runs the config once per requested buffer capacity and reports the gap
/// series for each.
pub fn norm_gap_from_config(
    config: &ExperimentConfig,
    topc_values: &[usize],
) -> HResult<Vec<NormGapReport>> {
    let mut reports = Vec::new();
    for &topc in topc_values {
        let mut variant = config.clone();
        variant.buffer.topc = topc;
        variant.validate()?;
        let mut per_seed_rows = Vec::new();
        for &seed in &variant.seeds {
            let (traj, _) = run_single(&variant, seed, RecordOptions::default())?;
            let rows: Vec<RunRow> = traj
                .steps
                .iter()
                .map(|rec| RunRow {
                    step: rec.step,
                    loss: rec.loss,
                    grad_norm: rec.grad_norm,
                    dist_to_opt: rec.dist_to_opt,
                    buffer_size: rec.buffer_size,
                    buffer_min_proxy: rec.buffer_min_proxy,
                    buffer_mean_age: rec.buffer_mean_age,
                    buffer_max_age: rec.buffer_max_age,
                    gc_norm_mean: rec.gc_norm_mean,
                    norm_gap: rec.norm_gap,
                })
                .collect();
            per_seed_rows.push(rows);
        }
        reports.push(norm_gap_report(topc, &per_seed_rows)?);
    }
    Ok(reports)
}

pub fn norm_gap_series_csv(report: &NormGapReport) -> String {
    let mut out = String::from("step,norm_gap\n");
    for &(step, gap) in &report.series {
        out.push_str(&format!("{step},{}\n", crate::problems::fmt_f64(gap)));
    }
    out
}

/// Outcome of replaying a recorded training run through the exact
/// linear-system recursion of the multi-step view.
#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub seed: u64,
    pub steps: u64,
    /// Observed staleness bound K: one plus the largest lag the
    /// aggregation actually used.
    pub staleness: usize,
    /// Maximum over steps of the distance between the optimizer's
    /// suboptimality vector and the simulated one.
    pub max_discrepancy: f64,
    /// Log-linear fitted per-step rate over the last quartile of steps.
    pub fitted_rate: Option<f64>,
    pub final_dist: f64,
}

/// Trains on the configured quadratic with the sgd rule, then replays the
/// recorded weight schedule and noise through [`simulate_system`] and
/// compares the suboptimality trajectories step by step.
pub fn replay_check(config: &ExperimentConfig, seed: u64) -> HResult<ReplayReport> {
    use crate::numerics::Vector;
    use crate::theory::{fit_asymptotic_rate, simulate_system, SystemHessian, WeightSchedule};

    config.validate()?;
    if config.optimizer.rule != crate::optim::Rule::Sgd {
        return Err(HarnessError::config(
            "the linear-system replay is defined for the sgd rule",
        ));
    }
    let quad = config.build_quadratic()?;
    let theta_star = quad
        .theta_star()
        .expect("quadratics know their minimizer")
        .clone();
    let theta0 = config.build_optimizer(&quad)?.theta().clone();
    let record = RecordOptions {
        thetas: true,
        weights: true,
        noise: true,
        ages: false,
    };
    let (traj, _) = run_single(config, seed, record)?;
    let schedule = WeightSchedule::from_source_steps(
        &traj.steps.iter().map(|s| s.weights.clone()).collect::<Vec<_>>(),
    )?;
    let r0 = &theta0 - &theta_star;
    let simulated = simulate_system(
        &SystemHessian::Constant(quad.hessian().clone()),
        &schedule,
        config.optimizer.lr,
        &r0,
        &traj.noise,
        config.steps as usize,
    )?;
    let mut observed: Vec<Vector> = Vec::with_capacity(traj.thetas.len() + 1);
    observed.push(r0);
    for theta in &traj.thetas {
        observed.push(theta - &theta_star);
    }
    let max_discrepancy = observed
        .iter()
        .zip(&simulated)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let dists: Vec<f64> = traj
        .steps
        .iter()
        .map(|s| s.dist_to_opt.unwrap_or(f64::NAN))
        .collect();
    let tail_start = dists.len() - dists.len() / 4;
    let fitted_rate = if dists.len() >= 8 {
        fit_asymptotic_rate(&dists[tail_start..])
    } else {
        None
    };
    Ok(ReplayReport {
        seed,
        steps: config.steps,
        staleness: schedule.staleness(),
        max_discrepancy,
        fitted_rate,
        final_dist: dists.last().copied().unwrap_or(f64::NAN),
    })
}

/// One cell of an ablation sweep.
#[derive(Debug, Clone, Serialize)]
pub struct AblationCell {
    pub selection: SelectionStrategy,
    pub replacement: ReplacementStrategy,
    pub aggregation: AggregationMode,
    pub final_loss_mean: f64,
    pub final_loss_stddev: f64,
    /// Relative gap to the reference optimum, when one is defined and
    /// nonzero.
    pub rel_gap: Option<f64>,
}

/// Runs every requested (selection, replacement, aggregation) combination
/// over the config's seeds. Rows come back sorted by strategy names, so
/// repeated invocations emit identical tables.
pub fn ablate(
    config: &ExperimentConfig,
    selections: &[SelectionStrategy],
    replacements: &[ReplacementStrategy],
    aggregations: &[AggregationMode],
) -> HResult<Vec<AblationCell>> {
    config.validate()?;
    if selections.is_empty() || replacements.is_empty() || aggregations.is_empty() {
        return Err(HarnessError::config("ablation matrix must be nonempty"));
    }
    let reference = {
        let problem = config.build_problem()?;
        match problem.optimal_loss() {
            Some(l) => Some(l),
            None => Some(baseline_optimum(problem.as_ref())?.1),
        }
    };
    let mut selections = selections.to_vec();
    selections.sort_by_key(|s| s.name());
    let mut replacements = replacements.to_vec();
    replacements.sort_by_key(|r| r.name());
    let mut aggregations = aggregations.to_vec();
    aggregations.sort_by_key(|a| a.name());

    let mut cells = Vec::new();
    for &selection in &selections {
        for &replacement in &replacements {
            for &aggregation in &aggregations {
                let mut variant = config.clone();
                variant.buffer.select = selection;
                variant.buffer.replace = replacement;
                variant.aggregation = aggregation;
                let mut finals = Vec::new();
                for &seed in &variant.seeds {
                    let (traj, problem) =
                        run_single(&variant, seed, RecordOptions::default())?;
                    let loss = match traj.final_loss() {
                        Some(l) => l,
                        None => problem.loss(&traj.final_theta)?,
                    };
                    finals.push(loss);
                }
                let final_loss_mean = mean(&finals);
                let rel_gap = reference.and_then(|opt| {
                    if opt.abs() > 1e-300 {
                        Some((final_loss_mean - opt) / opt.abs())
                    } else {
                        None
                    }
                });
                cells.push(AblationCell {
                    selection,
                    replacement,
                    aggregation,
                    final_loss_mean,
                    final_loss_stddev: stddev(&finals),
                    rel_gap,
                });
            }
        }
    }
    Ok(cells)
}

pub fn ablation_csv(cells: &[AblationCell]) -> String {
    let mut out = String::from(
        "selection,replacement,aggregation,final_loss_mean,final_loss_stddev,rel_gap\n",
    );
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.selection,
            c.replacement,
            c.aggregation,
            crate::problems::fmt_f64(c.final_loss_mean),
            crate::problems::fmt_f64(c.final_loss_stddev),
            c.rel_gap.map(crate::problems::fmt_f64).unwrap_or_default(),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        let mut config = ExperimentConfig::default_quadratic();
        config.steps = 120;
        config.seeds = vec![0, 1];
        config.epoch_interval = 40;
        config
    }

    #[test]
    fn staleness_histogram_counts_ages() {
        let config = small_config();
        let hist = staleness_from_config(&config).unwrap();
        assert!(!hist.is_empty());
        let total: u64 = hist.values().sum();
        // 3 sampling points per run, up to topc entries each, two seeds.
        assert!(total <= 3 * config.buffer.topc as u64 * 2);
        assert!(total > 0);
    }

    #[test]
    fn staleness_capacity_zero_is_empty() {
        let mut config = small_config();
        config.buffer.topc = 0;
        let hist = staleness_from_config(&config).unwrap();
        assert!(hist.is_empty());
    }

    #[test]
    fn staleness_errors_without_age_records() {
        let config = small_config();
        let (traj, _) = run_single(&config, 0, RecordOptions::default()).unwrap();
        assert!(staleness_report(&[traj], 40).is_err());
    }

    #[test]
    fn lower_decay_flushes_faster() {
        let mut fast = small_config();
        fast.steps = 400;
        fast.buffer.decay = 0.7;
        let mut slow = fast.clone();
        slow.buffer.decay = 0.99;
        let fast_max = max_recorded_age(&staleness_from_config(&fast).unwrap()).unwrap();
        let slow_max = max_recorded_age(&staleness_from_config(&slow).unwrap()).unwrap();
        assert!(
            fast_max < slow_max,
            "decay 0.7 max age {fast_max} not below decay 0.99 max age {slow_max}"
        );
    }

    #[test]
    fn norm_gap_report_shapes() {
        let config = small_config();
        let reports = norm_gap_from_config(&config, &[0, 3]).unwrap();
        assert_eq!(reports.len(), 2);
        // Capacity 0 keeps the buffer empty, so the gap is 0 by convention.
        assert_eq!(reports[0].mean_gap_last_quartile, 0.0);
        assert!(reports[0].series.iter().all(|&(_, g)| g == 0.0));
        assert_eq!(reports[1].series.len(), 120);
    }

    #[test]
    fn noiseless_quadratic_gap_nonnegative_after_warmup() {
        let mut config = small_config();
        config.oracle = crate::harness::config::OracleSpec(
            crate::problems::OracleMode::AdditiveGaussian { sigma: 0.0 },
        );
        config.seeds = vec![0];
        // Keep the step size well inside the stable regime so the gradient
        // norms decay monotonically and the buffer retains the larger early
        // gradients.
        config.optimizer.lr = 0.01;
        let reports = norm_gap_from_config(&config, &[4]).unwrap();
        // The buffer keeps larger early gradients, so after warm-up the gap
        // must be nonnegative on a monotone-decaying gradient stream.
        for &(step, gap) in &reports[0].series {
            if step >= 5 {
                assert!(gap >= -1e-12, "negative gap {gap} at step {step}");
            }
        }
        assert!(reports[0].mean_gap_last_quartile >= 0.0);
    }

    #[test]
    fn single_cell_ablation_matches_plain_run() {
        let config = small_config();
        let cells = ablate(
            &config,
            &[config.buffer.select],
            &[config.buffer.replace],
            &[config.aggregation],
        )
        .unwrap();
        assert_eq!(cells.len(), 1);
        let mut finals = Vec::new();
        for &seed in &config.seeds {
            let (traj, _) = run_single(&config, seed, RecordOptions::default()).unwrap();
            finals.push(traj.final_loss().unwrap());
        }
        assert_eq!(cells[0].final_loss_mean, mean(&finals));
    }

    #[test]
    fn ablation_rows_sorted_deterministically() {
        let mut config = small_config();
        config.steps = 40;
        config.seeds = vec![0];
        let cells = ablate(
            &config,
            &[SelectionStrategy::Fifo, SelectionStrategy::Koth, SelectionStrategy::CoinToss],
            &[ReplacementStrategy::Random, ReplacementStrategy::MinProxy],
            &[AggregationMode::Mean],
        )
        .unwrap();
        let names: Vec<(String, String)> = cells
            .iter()
            .map(|c| (c.selection.to_string(), c.replacement.to_string()))
            .collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert_eq!(cells.len(), 6);
    }
}
