//! Dataset generation with label noise, delimited-text export/import, and a
//! closed-form ridge fit on the round-tripped data.
//!
//! Run with: cargo run --example dataset_io

use gradmem::problems::{make_ridge, synth_classification, Dataset, Problem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let clean = synth_classification(80, 4, 1.5, 0.0, 99)?;
    let noisy = synth_classification(80, 4, 1.5, 0.25, 99)?;
    let flips = clean
        .y()
        .iter()
        .zip(noisy.y())
        .filter(|(a, b)| *a != *b)
        .count();
    println!("same seed, flip probability 0.25: {flips}/80 labels flipped, features identical: {}",
        clean.x() == noisy.x());

    let dir = std::env::temp_dir().join("gradmem_dataset_example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("synthetic.csv");
    noisy.write_file(&path)?;
    println!("\nwrote {} ({} samples, {} features per line + label)", path.display(), noisy.n(), noisy.dim());

    let back = Dataset::read_file(&path)?;
    println!("round trip exact: {}", back.x() == noisy.x() && back.y() == noisy.y());

    let ridge = make_ridge(&back, 0.5)?;
    println!("\nridge fit on the imported data (lambda = 0.5):");
    println!("  mu = {:.4}, L = {:.4}", ridge.mu(), ridge.smoothness());
    let theta = ridge.theta_star().unwrap();
    println!("  closed-form theta*: {:?}", theta.as_slice().iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>());
    println!("  gradient norm at theta*: {:.2e}", ridge.full_gradient(theta)?.norm());
    Ok(())
}
