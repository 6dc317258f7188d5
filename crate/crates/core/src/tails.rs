//! Tails of the exit time `T_{B̃_0}` and of the level-crossing time `τ_1`.
//!
//! Both depend only on the vertical coordinate, which moves with probability
//! `1/(d+1)` per step; the simulation still draws all `2(d+1)` directions so
//! that the step counts have the cylinder walk's law.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{block_sites, BlockKind, BlockSpec};
use crate::rng::StepRng;
use crate::stats::{ols, LinearFit};

/// Fit window for `log P[T/N² > s]`.
pub const FIT_WINDOW: (f64, f64) = (1.0, 6.0);
const GRID_STEP: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    /// Grid of `s` values (in units of `N²`).
    pub grid: Vec<f64>,
    /// Empirical `P[T/N² > s]`.
    pub survival: Vec<f64>,
    pub mean: f64,
    /// Fit of `log survival` against `s` over the fit window; `None` when
    /// fewer than two grid points have positive survival.
    pub fit: Option<LinearFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitTailStats {
    pub d: usize,
    pub side: u32,
    pub replicas: u64,
    pub exit: TailCurve,
    pub tau: TailCurve,
}

fn curve(mut samples: Vec<f64>) -> TailCurve {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let steps = (FIT_WINDOW.1 / GRID_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * GRID_STEP).collect();
    let survival: Vec<f64> = grid
        .iter()
        .map(|&s| {
            let below = samples.partition_point(|&v| v <= s);
            (samples.len() - below) as f64 / n
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .zip(&survival)
        .filter(|(s, p)| **s >= FIT_WINDOW.0 && **p > 0.0)
        .map(|(s, p)| (*s, p.ln()))
        .unzip();
    TailCurve {
        mean: samples.iter().sum::<f64>() / n,
        fit: ols(&xs, &ys),
        grid,
        survival,
    }
}

/// Simulates `replicas` walks from the origin and returns the tails of
/// `T_{B̃_0}/N²` and `τ_1/N²`.
pub fn exit_tail_stats(d: usize, side: u32, replicas: u64, seed: u64) -> ExitTailStats {
    assert!(d >= 1 && side >= 2 && replicas >= 1);
    let outer = block_sites(BlockSpec::new(0, side, BlockKind::BTilde));
    let n = i64::from(side);
    let up = 2 * d;
    let down = 2 * d + 1;
    let scale = (n * n) as f64;
    let (exit, tau): (Vec<f64>, Vec<f64>) = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = StepRng::new(seed, r, 2 * (d + 1));
            let mut z = 0i64;
            let mut t = 0u64;
            let mut tau1 = None;
            loop {
                t += 1;
                match rng.direction() {
                    dir if dir == up => z += 1,
                    dir if dir == down => z -= 1,
                    _ => continue,
                }
                if tau1.is_none() && z.abs() == n {
                    tau1 = Some(t);
                }
                if !outer.contains(z) {
                    // |z| = N is reached before leaving B̃_0
                    return (t as f64 / scale, tau1.expect("crossed level ±N first") as f64 / scale);
                }
            }
        })
        .unzip();
    ExitTailStats {
        d,
        side,
        replicas,
        exit: curve(exit),
        tau: curve(tau),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_is_monotone_and_starts_at_one() {
        let s = exit_tail_stats(1, 8, 2000, 3);
        for c in [&s.exit, &s.tau] {
            assert_eq!(c.survival[0], 1.0);
            assert!(c.survival.windows(2).all(|w| w[1] <= w[0]));
        }
        // τ_1 ≤ T_{B̃}
        assert!(s.tau.mean < s.exit.mean);
    }

    #[test]
    fn mean_exit_time_matches_gambler_ruin() {
        // vertical exit from (−2N, 2N) takes (2N)² vertical moves on average,
        // each costing d+1 steps: E[T]/N² = 4(d+1)
        let s = exit_tail_stats(2, 8, 20_000, 5);
        assert!((s.exit.mean - 12.0).abs() < 0.4, "{}", s.exit.mean);
        // and |z| = N takes N² vertical moves: E[τ_1]/N² = d+1
        assert!((s.tau.mean - 3.0).abs() < 0.1, "{}", s.tau.mean);
    }
}
