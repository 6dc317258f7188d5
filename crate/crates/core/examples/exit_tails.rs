//! Tails of the exit time from B̃_0 and of the first block-crossing time,
//! in units of N², plus a binary dump of one trajectory and its round trip.
//!
//!     cargo run --release --example exit_tails

use std::io::Cursor;

use cylwalk::dump::{read_dump, write_dump, DumpHeader};
use cylwalk::tails::exit_tail_stats;
use cylwalk::walk::{StoreOptions, WalkConfig};

fn main() {
    let stats = exit_tail_stats(2, 6, 2000, 3);
    for (name, curve) in [("exit", &stats.exit), ("tau", &stats.tau)] {
        let rate = curve.fit.as_ref().map_or(f64::NAN, |f| -f.slope);
        println!("{name}: mean {:.3} N², tail decay rate {rate:.3}", curve.mean);
        for (s, p) in curve.grid.iter().zip(&curve.survival).step_by(4) {
            println!("   P[T/N² > {s:>4}] = {p:.4}");
        }
    }

    let cfg = WalkConfig::new(2, 6, 3);
    let (mut store, mut rng) = cfg.open(0, StoreOptions::with_path()).unwrap();
    for _ in 0..1000 {
        store.advance(&mut rng).unwrap();
    }
    let path = store.path().unwrap();
    let mut bytes = Vec::new();
    write_dump(&mut bytes, &DumpHeader::new(2, 6, 3, 0), path).unwrap();
    let (header, records) = read_dump(Cursor::new(&bytes)).unwrap();
    println!(
        "\ndumped {} steps in {} bytes; read back {} records for replica {} (sites match: {})",
        path.len() - 1,
        bytes.len(),
        records.len(),
        header.replica,
        records.iter().map(|r| r.1).eq(path.iter().copied())
    );
}
