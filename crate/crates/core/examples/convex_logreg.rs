//! All eight optimizers (four base rules and their buffered variants) on
//! synthetic l2-regularized logistic regression.
//!
//! Run with: cargo run --release --example convex_logreg

use gradmem::harness::config::{DataSpec, ExperimentConfig, OracleSpec, ProblemSpec};
use gradmem::harness::runner::run_single;
use gradmem::optim::{AggregationMode, RecordOptions, Rule};
use gradmem::problems::{baseline_optimum, OracleMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut base = ExperimentConfig::default_quadratic();
    base.problem = ProblemSpec::Logreg {
        data: DataSpec::Synthetic {
            n: 500,
            d: 10,
            class_sep: 1.0,
            flip_prob: 0.0,
            seed: 1403,
        },
        lambda: 0.1,
    };
    base.optimizer.theta0 = Some(vec![0.0; 10]);
    base.oracle = OracleSpec(OracleMode::Minibatch { batch_size: 25 });
    base.steps = 1000; // 50 passes

    let problem = base.build_problem()?;
    let (_, opt_loss) = baseline_optimum(problem.as_ref())?;
    println!("full-batch baseline optimum: {opt_loss:.8}");
    println!(
        "{:>10} {:>8} {:>6} {:>7} {:>12} {:>10}",
        "optimizer", "lr", "topC", "aggr", "final loss", "rel gap"
    );

    let table: [(&str, Rule, f64, usize, AggregationMode); 8] = [
        ("sgd", Rule::Sgd, 0.1, 0, AggregationMode::Mean),
        ("sgd_c", Rule::Sgd, 0.05, 5, AggregationMode::Sum),
        ("sgdm", Rule::Sgdm, 0.02, 0, AggregationMode::Mean),
        ("sgdm_c", Rule::Sgdm, 0.01, 5, AggregationMode::Sum),
        ("rmsprop", Rule::Rmsprop, 0.005, 0, AggregationMode::Mean),
        ("rmsprop_c", Rule::Rmsprop, 0.005, 5, AggregationMode::Mean),
        ("adam", Rule::Adam, 0.01, 0, AggregationMode::Mean),
        ("adam_c", Rule::Adam, 0.005, 5, AggregationMode::Mean),
    ];
    for (name, rule, lr, topc, aggr) in table {
        let mut config = base.clone();
        config.optimizer.rule = rule;
        config.optimizer.lr = lr;
        config.buffer.topc = topc;
        config.aggregation = aggr;
        let (traj, _) = run_single(&config, 0, RecordOptions::default())?;
        let final_loss = traj.final_loss().unwrap();
        println!(
            "{name:>10} {lr:>8} {topc:>6} {aggr:>7} {final_loss:>12.6} {:>10.4}",
            (final_loss - opt_loss) / opt_loss
        );
    }
    Ok(())
}
