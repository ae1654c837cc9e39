//! The multi-step view made concrete: a buffered training run replayed,
//! step for step, through the stacked linear-system recursion.
//!
//! Run with: cargo run --example system_replay

use gradmem::harness::config::{ExperimentConfig, OracleSpec, ProblemSpec};
use gradmem::harness::reports::replay_check;
use gradmem::numerics::{companion_spectral_radius, Matrix, Vector};
use gradmem::problems::OracleMode;
use gradmem::theory::{fit_asymptotic_rate, simulate_system, SystemHessian, WeightSchedule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Part 1: replay a real buffered SGD run. Every update is a linear
    // combination of stored gradients, so the suboptimality trajectory is
    // exactly reproduced by the recursion
    //   r_{t+1} = r_t - alpha * sum_k w_{t,k} (H r_{t-k} + noise_{t-k}).
    let mut config = ExperimentConfig::default_quadratic();
    config.problem = ProblemSpec::Quadratic {
        eigs: vec![1.0, 2.0, 4.0, 8.0],
        theta_star: Some(vec![1.0, -0.5, 0.25, 2.0]),
        rotate: true,
        seed: 3,
    };
    config.optimizer.lr = 0.02;
    config.buffer.topc = 4;
    config.buffer.decay = 0.9;
    config.steps = 300;
    config.oracle = OracleSpec(OracleMode::AdditiveGaussian { sigma: 0.4 });
    let report = replay_check(&config, 0)?;
    println!("buffered run vs linear-system replay over {} steps:", report.steps);
    println!("  observed staleness bound K = {}", report.staleness);
    println!("  max per-step discrepancy    = {:.3e}", report.max_discrepancy);
    println!("  final distance to optimum   = {:.3e}", report.final_dist);

    // Part 2: a fixed-coefficient recursion converges at the companion
    // spectral radius of its coefficients.
    let coeffs = [0.9, -0.05];
    let rho = companion_spectral_radius(&coeffs)?;
    let schedule = WeightSchedule::new(
        (0..600)
            .map(|t| {
                let mut s = vec![(0usize, 1.0)];
                if t >= 1 {
                    s.push((1, 0.5)); // lambda_1 = -alpha w eta = -0.05
                }
                s
            })
            .collect(),
    )?;
    let h = SystemHessian::Constant(Matrix::diagonal(&[1.0])?);
    let rs = simulate_system(&h, &schedule, 0.1, &Vector::new(vec![1.0])?, &[], 600)?;
    let norms: Vec<f64> = rs[300..].iter().map(|r| r.norm()).collect();
    let fitted = fit_asymptotic_rate(&norms).unwrap();
    println!("\nfixed coefficients lambda = (0.9, -0.05):");
    println!("  companion spectral radius = {rho:.6}");
    println!("  fitted decay of |r_t|     = {fitted:.6}");
    Ok(())
}
