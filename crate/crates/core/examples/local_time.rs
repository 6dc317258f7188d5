//! Level local times of the cylinder walk's height against those of simple
//! random walk on Z: KS and chi-square comparisons at several horizons.
//!
//!     cargo run --release --example local_time

use cylwalk::harness::{run, ExperimentConfig, ExperimentKind};

fn main() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Localtime);
    cfg.replicas = 2000;
    cfg.localtime.ks = vec![50, 200];
    let rec = run(&cfg).expect("localtime run");
    let t = rec.table("identity").unwrap();
    println!("{}", t.columns.join("\t"));
    for row in &t.rows {
        println!("{}", row.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("\t"));
    }
    println!("\nsmallest KS p-value: {:.3}", rec.summary_f64("min_ks_p").unwrap());
}
