//! A close look at the gradient buffer: offers, decaying priorities,
//! eviction, and snapshot serialization.
//!
//! Run with: cargo run --example buffer_inspection

use gradmem::buffer::CriticalBuffer;
use gradmem::harness::csv::buffer_snapshot_csv;
use gradmem::numerics::Vector;
use gradmem::optim::AggregationMode;

fn show(buf: &CriticalBuffer, now: u64) {
    for e in buf.entries() {
        println!(
            "  inserted at {:>2}: true norm {:.3}, proxy {:.4}",
            e.inserted_at(),
            e.true_norm(),
            e.proxy_norm()
        );
    }
    let _ = now;
}

fn main() -> gradmem::Result<()> {
    let mut buf = CriticalBuffer::koth(2, 0.9)?;

    println!("offer norms 3 and 2 into an empty capacity-2 buffer:");
    buf.offer(Vector::new(vec![3.0])?, 0)?;
    buf.offer(Vector::new(vec![2.0])?, 1)?;
    show(&buf, 1);

    println!("decay once (proxies shrink, gradients untouched):");
    buf.decay_all();
    show(&buf, 1);

    println!("offer norm 2.0 -> beats the decayed 1.8, evicting it:");
    let accepted = buf.offer(Vector::new(vec![2.0])?, 2)?;
    println!("  accepted: {accepted}");
    show(&buf, 2);

    println!("decay again, then offer norm 1.8 -> 1.8 > 1.8 is false, tie rejected:");
    buf.decay_all(); // proxies now 2.43, 1.8
    let accepted = buf.offer(Vector::new(vec![1.8])?, 3)?;
    println!("  accepted: {accepted}");
    show(&buf, 3);

    println!("\naggregation weights the training loop would apply (mean mode):");
    for (g, w) in buf.entries_and_weights(AggregationMode::Mean) {
        println!("  entry with norm {:.3}: weight {w:.4}", g.norm());
    }

    println!("\nsnapshot rows as the harness serializes them (at step 3):");
    print!("{}", buffer_snapshot_csv(&buf.snapshot(3)?));
    Ok(())
}
