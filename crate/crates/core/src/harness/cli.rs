//! Command-line interface. Exit codes: 0 success, 2 configuration error,
//! 3 I/O failure (clap's own usage errors also exit 2).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::buffer::{ReplacementStrategy, SelectionStrategy};
use crate::harness::config::{ExperimentConfig, Overrides};
use crate::harness::reports::{
    ablate, ablation_csv, histogram_csv, max_recorded_age, norm_gap_from_config,
    norm_gap_series_csv, replay_check, staleness_from_config,
};
use crate::harness::runner::{create_dir, run, write_text};
use crate::harness::{HResult, HarnessError};
use crate::optim::AggregationMode;
use crate::theory::{rate_report, RateQuery};

#[derive(Debug, Parser)]
#[command(
    name = "gradmem",
    version,
    about = "Memory-augmented gradient-descent optimizers: experiments and rate reports"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Worst-case contraction factors and variance bound for a rate query.
    Rate {
        #[arg(long)]
        alpha: f64,
        /// Staleness bound K (order of the multi-step recursion).
        #[arg(long)]
        k: usize,
        /// Strong-convexity constant.
        #[arg(long)]
        mu: f64,
        /// Smoothness constant.
        #[arg(long)]
        l: f64,
        /// Gradient-noise variance entering the neighbourhood bound.
        #[arg(long, default_value_t = 0.0)]
        sigma2: f64,
        /// Write the JSON report here in addition to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train on a quadratic, replay the recorded aggregation schedule
    /// through the exact linear-system recursion, and report the
    /// discrepancy (requires an sgd optimizer and a quadratic problem).
    Simulate {
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the configured experiment for every seed, writing per-seed CSVs
    /// and a summary.
    Train {
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Sweep selection/replacement/aggregation combinations and tabulate
    /// final losses.
    Ablate {
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Histogram of buffer-entry ages sampled at every epoch interval.
    Staleness {
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Buffer-vs-current gradient norm-gap series, one run per requested
    /// capacity (repeat --topc to compare several).
    Normgap {
        #[command(flatten)]
        flags: RunFlags,
    },
}

#[derive(Debug, Args)]
struct RunFlags {
    /// JSON experiment config; defaults to a built-in noisy quadratic.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replace the config's seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    /// Buffer capacity; repeatable for `normgap` only.
    #[arg(long)]
    topc: Vec<usize>,
    #[arg(long)]
    decay: Option<f64>,
    /// One of mean, sum, min, max, median.
    #[arg(long)]
    aggr: Option<String>,
    /// One of sgd, sgdm, rmsprop, adam.
    #[arg(long)]
    optimizer: Option<String>,
    /// One of koth, bottomc, fifo, cointoss, mnds, cds, css.
    #[arg(long)]
    select: Option<String>,
    /// One of minproxy, random, ncpr.
    #[arg(long)]
    replace: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
}

impl RunFlags {
    fn single_topc(&self) -> HResult<Option<usize>> {
        match self.topc.as_slice() {
            [] => Ok(None),
            [one] => Ok(Some(*one)),
            _ => Err(HarnessError::config(
                "--topc may be repeated only with the normgap subcommand",
            )),
        }
    }

    fn load(&self, topc: Option<usize>) -> HResult<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default_quadratic(),
        };
        let overrides = Overrides {
            seed: self.seed,
            steps: self.steps,
            topc,
            decay: self.decay,
            aggr: self.aggr.as_deref().map(str::parse).transpose()?,
            optimizer: self.optimizer.as_deref().map(str::parse).transpose()?,
            select: self.select.as_deref().map(str::parse).transpose()?,
            replace: self.replace.as_deref().map(str::parse).transpose()?,
            out: self.out.clone(),
        };
        config.apply_overrides(&overrides);
        config.validate()?;
        Ok(config)
    }
}

pub fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> HResult<()> {
    match cli.command {
        Cmd::Rate {
            alpha,
            k,
            mu,
            l,
            sigma2,
            out,
        } => {
            let query = RateQuery::new(alpha, k, mu, l)?;
            let report = rate_report(&query, sigma2)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            println!("{json}");
            if let Some(path) = out {
                write_text(&path, &json)?;
            }
            Ok(())
        }
        Cmd::Simulate { flags } => {
            let config = flags.load(flags.single_topc()?)?;
            let seed = config.seeds[0];
            let report = replay_check(&config, seed)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            println!("{json}");
            if flags.out.is_some() || config.out.is_some() {
                let dir = config.out_dir();
                create_dir(&dir)?;
                write_text(&dir.join("simulate.json"), &json)?;
            }
            Ok(())
        }
        Cmd::Train { flags } => {
            let config = flags.load(flags.single_topc()?)?;
            let artifacts = run(&config)?;
            for path in &artifacts.csv_paths {
                println!("wrote {}", path.display());
            }
            println!("wrote {}", artifacts.summary_path.display());
            println!(
                "final loss mean {:.6e} (stddev {:.6e}) over {} seed(s)",
                artifacts.summary.final_loss_mean,
                artifacts.summary.final_loss_stddev,
                config.seeds.len()
            );
            Ok(())
        }
        Cmd::Ablate { flags } => {
            let config = flags.load(flags.single_topc()?)?;
            let selections = match &flags.select {
                Some(s) => vec![s.parse::<SelectionStrategy>()?],
                None => SelectionStrategy::ALL.to_vec(),
            };
            let replacements = match &flags.replace {
                Some(r) => vec![r.parse::<ReplacementStrategy>()?],
                None => ReplacementStrategy::ALL.to_vec(),
            };
            let aggregations: Vec<AggregationMode> = vec![config.aggregation];
            let cells = ablate(&config, &selections, &replacements, &aggregations)?;
            let table = ablation_csv(&cells);
            print!("{table}");
            let dir = config.out_dir();
            create_dir(&dir)?;
            write_text(&dir.join("ablation.csv"), &table)?;
            Ok(())
        }
        Cmd::Staleness { flags } => {
            let config = flags.load(flags.single_topc()?)?;
            let histogram = staleness_from_config(&config)?;
            let csv = histogram_csv(&histogram);
            print!("{csv}");
            match max_recorded_age(&histogram) {
                Some(age) => println!("# max recorded age: {age}"),
                None => println!("# empty histogram"),
            }
            let dir = config.out_dir();
            create_dir(&dir)?;
            write_text(&dir.join("staleness.csv"), &csv)?;
            Ok(())
        }
        Cmd::Normgap { flags } => {
            let config = flags.load(None)?;
            let topc_values = if flags.topc.is_empty() {
                vec![config.buffer.topc]
            } else {
                flags.topc.clone()
            };
            let reports = norm_gap_from_config(&config, &topc_values)?;
            let dir = config.out_dir();
            create_dir(&dir)?;
            for report in &reports {
                write_text(
                    &dir.join(format!("normgap_topc{}.csv", report.topc)),
                    &norm_gap_series_csv(report),
                )?;
                println!(
                    "topc {}: mean gap over last quartile = {:.6e}",
                    report.topc, report.mean_gap_last_quartile
                );
            }
            let summary =
                serde_json::to_string_pretty(&reports).expect("reports serialize");
            write_text(&dir.join("normgap_summary.json"), &summary)?;
            Ok(())
        }
    }
}
