//! How the decay factor controls the age of gradients held in the buffer.
//!
//! Run with: cargo run --release --example staleness_histogram

use gradmem::harness::config::{ExperimentConfig, OracleSpec};
use gradmem::harness::reports::{max_recorded_age, staleness_from_config};
use gradmem::problems::OracleMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ExperimentConfig::default_quadratic();
    config.steps = 2000;
    config.seeds = vec![0, 1, 2, 3, 4];
    config.epoch_interval = 100;
    config.buffer.topc = 5;
    config.oracle = OracleSpec(OracleMode::AdditiveGaussian { sigma: 0.5 });

    for decay in [0.7, 0.9, 0.99] {
        config.buffer.decay = decay;
        let histogram = staleness_from_config(&config)?;
        let total: u64 = histogram.values().sum();
        println!("decay = {decay}: {total} sampled entries, max age {}", max_recorded_age(&histogram).unwrap());
        // Coarse text histogram over age buckets of 8 steps.
        let mut buckets = std::collections::BTreeMap::new();
        for (&age, &count) in &histogram {
            *buckets.entry(age / 8).or_insert(0u64) += count;
        }
        for (bucket, count) in buckets {
            let bar = "#".repeat((count as usize * 60 / total as usize).max(1));
            println!("  ages {:>3}-{:<3} {bar} ({count})", bucket * 8, bucket * 8 + 7);
        }
    }
    println!("\nlower decay flushes the buffer faster, bounding gradient staleness.");
    Ok(())
}
