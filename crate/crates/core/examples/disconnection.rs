//! Disconnection time of a single walk, step by step and with the
//! checkpointed binary search, plus the defining constructions.
//!
//!     cargo run --release --example disconnection

use std::collections::HashSet;

use cylwalk::geometry::{Cylinder, CylinderPoint};
use cylwalk::vacant::{disconnection_time, is_disconnecting};
use cylwalk::walk::WalkConfig;

fn main() {
    let cyl = Cylinder::new(2, 5).unwrap();
    let mut layer: HashSet<CylinderPoint> = HashSet::new();
    for x in 0..5 {
        for y in 0..5 {
            layer.insert(CylinderPoint::new(vec![x, y], 3));
        }
    }
    println!("full layer disconnects: {}", is_disconnecting(&cyl, &layer));
    layer.remove(&CylinderPoint::new(vec![2, 2], 3));
    println!("layer with one hole disconnects: {}", is_disconnecting(&cyl, &layer));

    let cfg = WalkConfig::new(2, 5, 42);
    for replica in 0..5 {
        let exact = disconnection_time(&cfg, replica, 1).expect("walk");
        let fast = disconnection_time(&cfg, replica, 500).expect("walk");
        println!(
            "replica {replica}: T = {:?} (cadence 500 gives {:?}); lower bound N^d - 1 = 24",
            exact.time.at(),
            fast.time.at()
        );
    }
}
