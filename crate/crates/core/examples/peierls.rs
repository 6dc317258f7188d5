//! Counts of self-avoiding paths in the ∗-lattice of Z^2 against the
//! Peierls bound 8·7^{n−1}.
//!
//!     cargo run --release --example peierls [n_max]

use cylwalk::criticality::{peierls_bound, star_saw_count};

fn main() {
    let n_max: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let mut prev = None;
    for n in 1..=n_max {
        let a = star_saw_count(n).expect("count");
        let bound = peierls_bound(n);
        let growth = prev.map_or(String::from("-"), |p: u64| format!("{:.3}", a as f64 / p as f64));
        println!("n = {n}: a(n) = {a:>9}, bound {bound:>9}, ratio {:.3}, growth {growth}", a as f64 / bound as f64);
        prev = Some(a);
    }
}
