//! Excursions between the blocks C_0 and the complement of B̃_0: the chance
//! that the walk has disconnected by time γN^{2d}, as a function of γ.
//!
//!     cargo run --release --example excursions

use cylwalk::harness::{run, ExperimentConfig, ExperimentKind};

fn main() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Excursions);
    cfg.sides = vec![6];
    cfg.replicas = 200;
    let rec = run(&cfg).expect("excursion run");
    let t = rec.table("gamma").unwrap();
    let (gamma, p) = (t.floats("gamma"), t.floats("P_D"));
    for (g, p) in gamma.iter().zip(&p) {
        println!("gamma = {g:<5} P[disconnected] = {p:.3}");
    }
    for (k, v) in &rec.summary {
        println!("{k} = {v}");
    }
}
