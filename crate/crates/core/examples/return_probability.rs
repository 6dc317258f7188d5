//! Return probabilities of simple random walk on Z^ν, three ways:
//!
//! * the Bessel-integral quadrature with its error bound,
//! * a staged Monte Carlo with a truncation-bias bound,
//! * the strip analogue q_N on a finite cylinder (d = 4, m = 2).
//!
//!     cargo run --release --example return_probability

use cylwalk::returnprob::{q_monte_carlo_staged, q_n_estimate, q_quadrature, truncation_bias_bound, QnConfig, StagedPlan};

fn main() {
    println!("quadrature");
    for nu in [1, 2, 3, 4, 5, 8, 16, 30] {
        let q = q_quadrature(nu, 1e-10).expect("quadrature");
        println!("  q({nu:>2}) = {:.10}  ± {:.1e}", q.value, q.abs_error);
    }

    let plan = StagedPlan::standard(100_000, 100_000);
    let mc = q_monte_carlo_staged(3, &plan, 7).expect("monte carlo");
    let exact = q_quadrature(3, 1e-10).unwrap().value;
    println!(
        "\nmonte carlo, nu = 3, horizon {}: {:.5} ± {:.5} (truncation bias ≤ {:.5}; quadrature {exact:.5})",
        plan.horizon(),
        mc.estimate.value,
        mc.std_error,
        truncation_bias_bound(3, plan.horizon())
    );

    println!("\nstrip estimate q_N, d = 4, m = 2");
    for side in [4u32, 8, 16] {
        let est = q_n_estimate(&QnConfig::new(4, 2, side, 1000, 11)).expect("strip");
        println!("  N = {side:>2}: {:.4} ± {:.4} (best of {} candidates)", est.value, est.std_error, est.candidates.len());
    }
}
