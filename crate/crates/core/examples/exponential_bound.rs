//! Planar sets covered by the trace: P[A ⊆ X_{[0, D_t]}] against |A|, with
//! the fitted exponential decay rate.
//!
//!     cargo run --release --example exponential_bound

use cylwalk::harness::{run, ExperimentConfig, ExperimentKind};

fn main() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Expbound);
    cfg.sides = vec![8];
    cfg.replicas = 300;
    let rec = run(&cfg).expect("expbound run");
    let t = rec.table("sizes").unwrap();
    println!("{}", t.columns.join("\t"));
    for row in &t.rows {
        println!("{}", row.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("\t"));
    }
    println!(
        "\ndecay rate {:.3} (R² {:.3})",
        rec.summary_f64("decay_rate_N8").unwrap_or(f64::NAN),
        rec.summary_f64("decay_r_squared_N8").unwrap_or(f64::NAN)
    );
}
