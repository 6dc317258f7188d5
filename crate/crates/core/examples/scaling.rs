//! The scaling law T_N ≈ N^{2d}: a log–log fit of median disconnection
//! times over several sides, with a bootstrap interval.
//!
//!     cargo run --release --example scaling [d]

use cylwalk::harness::{run, ExperimentConfig, ExperimentKind};

fn main() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Scaling);
    cfg.d = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    cfg.sides = if cfg.d == 1 { vec![8, 16, 32] } else { vec![4, 6, 8] };
    cfg.replicas = 60;
    let rec = run(&cfg).expect("scaling run");

    let scaling = rec.table("scaling").unwrap();
    println!("{}", scaling.columns.join("\t"));
    for row in &scaling.rows {
        println!("{}", row.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("\t"));
    }
    println!(
        "\nexponent {:.3} (CI {:.3}..{:.3}), expected {}",
        rec.summary_f64("exponent").unwrap(),
        rec.summary_f64("exponent_ci_lo").unwrap(),
        rec.summary_f64("exponent_ci_hi").unwrap(),
        2 * cfg.d
    );
}
