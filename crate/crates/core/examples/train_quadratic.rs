//! Vanilla SGD against its buffered variant on a noiseless strongly convex
//! quadratic.
//!
//! Run with: cargo run --example train_quadratic

use gradmem::buffer::CriticalBuffer;
use gradmem::numerics::{RandomState, Vector};
use gradmem::optim::{train, AggregationMode, OptimizerState, RecordOptions};
use gradmem::problems::{make_quadratic, GradientOracle, OracleMode};
use gradmem::theory::fit_asymptotic_rate;

fn main() -> gradmem::Result<()> {
    let problem = make_quadratic(&[1.0, 3.25, 5.5, 7.75, 10.0], None, true, 42)?;
    let steps = 1500;

    let mut results = Vec::new();
    for (name, capacity) in [("sgd (vanilla)", 0usize), ("sgd_c (topC = 4)", 4)] {
        let mut opt = OptimizerState::sgd(Vector::filled(5, 1.0)?, 0.05)?;
        let mut buf = CriticalBuffer::koth(capacity, 0.7)?;
        let mut oracle = GradientOracle::new(
            OracleMode::AdditiveGaussian { sigma: 0.0 },
            RandomState::new(0),
        )?;
        let traj = train(
            &problem,
            &mut opt,
            &mut buf,
            AggregationMode::Mean,
            steps,
            &mut oracle,
            RecordOptions::default(),
        )?;
        let dists: Vec<f64> = traj.steps.iter().map(|s| s.dist_to_opt.unwrap()).collect();
        results.push((name, dists));
    }

    println!("distance to optimum, noiseless quadratic (mu = 1, L = 10, alpha = 0.05):");
    println!("{:>6} {:>16} {:>16}", "step", results[0].0, results[1].0);
    for &step in &[0usize, 50, 100, 200, 400, 800, 1499] {
        println!(
            "{:>6} {:>16.3e} {:>16.3e}",
            step, results[0].1[step], results[1].1[step]
        );
    }
    for (name, dists) in &results {
        let rate = fit_asymptotic_rate(&dists[steps as usize - 500..]).unwrap();
        println!("fitted asymptotic rate for {name}: {rate:.4}");
    }
    Ok(())
}
