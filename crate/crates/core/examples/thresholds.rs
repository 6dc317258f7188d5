//! Where does the criticality condition ρ(d) < 1 start to hold?
//!
//! Scans d = 4..=30 with the quadrature return probabilities and prints the
//! margin for each dimension.
//!
//!     cargo run --example thresholds

use cylwalk::criticality::threshold_scan;

fn main() {
    let scan = threshold_scan(4, 30, 1e-8).expect("scan");
    println!("{:>3} {:>12} {:>10} {:>9} {:>6}", "d", "q(d-1)", "rho", "rho_err", "holds");
    for r in &scan.reports {
        println!(
            "{:>3} {:>12.9} {:>10.6} {:>9.1e} {:>6}",
            r.d, r.q_used.value, r.rho, r.rho_err, r.holds
        );
    }
    match scan.minimal_holding {
        Some(d) => println!("\nsmallest dimension with rho < 1: d = {d}"),
        None => println!("\nrho >= 1 throughout the scan"),
    }
}
