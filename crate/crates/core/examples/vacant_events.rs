//! The vacant-set events 𝒱, 𝒰 and 𝒢 on a trace, first on hand-made sets and
//! then along simulated excursions on a d = 3 cylinder.
//!
//!     cargo run --release --example vacant_events

use cylwalk::geometry::{Cylinder, CylinderPoint, Site};
use cylwalk::harness::{run, ExperimentConfig, ExperimentKind};
use cylwalk::vacant::{check_g, check_u, DirectionSet, PlaneScope, SiteSet, check_v};

fn main() {
    let plane = Cylinder::new(2, 8).unwrap();
    let empty = SiteSet::new();
    let lines: SiteSet = (0..8u32)
        .flat_map(|v| [0u32, 4].map(|u| plane.pack(&CylinderPoint::new(vec![u, v], 0))))
        .collect();
    println!("empty trace: G = {}", check_g(&plane, &empty, 1.0, 0, PlaneScope::All).unwrap().holds);
    println!("two separating lines: U = {}", check_u(&plane, &lines, 1.0, 0, PlaneScope::All).unwrap().holds);
    let single: SiteSet = [Site { cell: 0, z: 0 }].into_iter().collect();
    println!("single site: V = {}", check_v(&plane, &single, 1.0, 0, DirectionSet::Signed).unwrap().holds);

    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Events);
    cfg.replicas = 4;
    let rec = run(&cfg).expect("events run");
    let probs = rec.table("probabilities").unwrap();
    println!("\n{}", probs.columns.join("\t"));
    for row in &probs.rows {
        println!("{}", row.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("\t"));
    }
    for c in &rec.checks {
        println!("check {}: {} ({})", c.name, if c.passed { "ok" } else { "FAILED" }, c.detail);
    }
}
