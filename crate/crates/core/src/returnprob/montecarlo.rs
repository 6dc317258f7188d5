//! Monte Carlo estimates of `P[H̃_0 ≤ horizon]` on `Z^ν`.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{replica_rng, StepRng};
use crate::walk::Observed;
use crate::zlattice::run_until_origin;

use super::{QEstimate, QMethod, ReturnProbError};

const Z95: f64 = 1.959_963_984_540_054;

fn check_nu(nu: usize) -> Result<(), ReturnProbError> {
    match nu {
        0 => Err(ReturnProbError::Dimension),
        1 | 2 => Err(ReturnProbError::Recurrent(nu)),
        _ => Ok(()),
    }
}

/// First return time of replica `r`, if within `horizon`.
fn return_time(nu: usize, seed: u64, r: u64, horizon: u64) -> Observed<u64> {
    let mut rng = StepRng::new(seed, r, 2 * nu);
    let mut pos = vec![0i64; nu];
    run_until_origin(&mut rng, &mut pos, horizon)
}

/// Fraction of `replicas` walks returning to the origin within `horizon`
/// steps. The error is the 95% binomial half-width; the estimate is biased
/// low by `P[horizon < H̃_0 < ∞]`, see [`truncation_bias_bound`].
pub fn q_monte_carlo(nu: usize, horizon: u64, replicas: u64, seed: u64) -> Result<QEstimate, ReturnProbError> {
    check_nu(nu)?;
    let hits = (0..replicas)
        .into_par_iter()
        .filter(|&r| return_time(nu, seed, r, horizon).is_seen())
        .count();
    let p = hits as f64 / replicas.max(1) as f64;
    Ok(QEstimate {
        nu,
        value: p,
        abs_error: Z95 * (p * (1.0 - p) / replicas.max(1) as f64).sqrt(),
        method: QMethod::MonteCarlo,
    })
}

/// Leading-order size of `P[horizon < H̃_0 < ∞]`: the expected number of
/// visits to the origin after `horizon`, `(ν/2π)^{ν/2} H^{1−ν/2} / (ν/2 − 1)`
/// by the local central limit theorem.
pub fn truncation_bias_bound(nu: usize, horizon: u64) -> f64 {
    let v = nu as f64;
    (v / (2.0 * std::f64::consts::PI)).powf(v / 2.0) * (horizon as f64).powf(1.0 - v / 2.0) / (v / 2.0 - 1.0)
}

/// Stages `(sample size, horizon)` with increasing horizons. Stage 1 runs
/// its sample from the origin; each later stage continues a uniform sample
/// of the previous stage's survivors up to its own horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagedPlan {
    pub stages: Vec<(u64, u64)>,
}

impl StagedPlan {
    /// Stages `(replicas, h/10^4)`, `(replicas/10, h/100)`, `(replicas/250, h)`.
    /// For `h = 10^6` and `10^6` replicas this costs about `10^10` steps
    /// instead of `7·10^{11}`.
    pub fn standard(replicas: u64, horizon: u64) -> Self {
        let h1 = (horizon / 10_000).max(1);
        let h2 = (horizon / 100).max(h1);
        Self {
            stages: vec![(replicas, h1), (replicas / 10, h2), ((replicas / 250).max(1), horizon)],
        }
    }

    pub fn horizon(&self) -> u64 {
        self.stages.last().map_or(0, |s| s.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub horizon: u64,
    pub sampled: u64,
    pub returned: u64,
    pub survivors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagedEstimate {
    pub estimate: QEstimate,
    pub std_error: f64,
    pub stages: Vec<StageReport>,
}

/// Unbiased estimate of `P[H̃_0 ≤ H]` by survivor subsampling:
/// `p̂ = 1 − Π_k (1 − r̂_k)`, where `r̂_k` is the fraction of stage-`k`
/// walks returning in `(h_{k−1}, h_k]`. Survivors are not stored; a sampled
/// survivor is replayed from its own stream, which reproduces its path.
pub fn q_monte_carlo_staged(nu: usize, plan: &StagedPlan, seed: u64) -> Result<StagedEstimate, ReturnProbError> {
    check_nu(nu)?;
    assert!(!plan.stages.is_empty(), "plan needs at least one stage");
    assert!(plan.stages.windows(2).all(|w| w[0].1 <= w[1].1), "stage horizons must increase");
    let mut pool: Vec<u64> = (0..plan.stages[0].0).collect();
    let mut reports = Vec::new();
    for (k, &(size, horizon)) in plan.stages.iter().enumerate() {
        if k > 0 && (size as usize) < pool.len() {
            let mut rng = replica_rng(seed, u64::MAX - k as u64);
            let mut picked: Vec<u64> = sample(&mut rng, pool.len(), size as usize).into_iter().map(|i| pool[i]).collect();
            picked.sort_unstable();
            pool = picked;
        }
        let outcome: Vec<(u64, bool)> = pool
            .par_iter()
            .map(|&r| (r, return_time(nu, seed, r, horizon).is_seen()))
            .collect();
        let sampled = pool.len() as u64;
        pool = outcome.iter().filter(|o| !o.1).map(|o| o.0).collect();
        reports.push(StageReport {
            horizon,
            sampled,
            returned: sampled - pool.len() as u64,
            survivors: pool.len() as u64,
        });
    }

    let rates: Vec<(f64, f64)> = reports
        .iter()
        .map(|s| {
            let r = s.returned as f64 / s.sampled.max(1) as f64;
            (r, r * (1.0 - r) / s.sampled.max(1) as f64)
        })
        .collect();
    let survive: f64 = rates.iter().map(|(r, _)| 1.0 - r).product();
    let variance: f64 = (0..rates.len())
        .map(|k| {
            let others: f64 = rates.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, (r, _))| 1.0 - r).product();
            others * others * rates[k].1
        })
        .sum();
    let std_error = variance.sqrt();
    Ok(StagedEstimate {
        estimate: QEstimate {
            nu,
            value: 1.0 - survive,
            abs_error: Z95 * std_error,
            method: QMethod::MonteCarlo,
        },
        std_error,
        stages: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrent_dimensions_rejected() {
        assert_eq!(q_monte_carlo(2, 10, 10, 0), Err(ReturnProbError::Recurrent(2)));
    }

    #[test]
    fn deterministic() {
        let a = q_monte_carlo(3, 1000, 2000, 5).unwrap();
        let b = q_monte_carlo(3, 1000, 2000, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_stage_matches_plain_estimator() {
        let plain = q_monte_carlo(3, 500, 3000, 9).unwrap();
        let staged = q_monte_carlo_staged(3, &StagedPlan { stages: vec![(3000, 500)] }, 9).unwrap();
        assert_eq!(plain.value, staged.estimate.value);
    }

    #[test]
    fn staged_matches_plain_statistically() {
        let plain = q_monte_carlo(3, 2000, 20_000, 1).unwrap();
        let plan = StagedPlan {
            stages: vec![(20_000, 20), (5_000, 200), (2_000, 2000)],
        };
        let staged = q_monte_carlo_staged(3, &plan, 1).unwrap();
        let se = (staged.std_error.powi(2) + (plain.abs_error / Z95).powi(2)).sqrt();
        assert!((plain.value - staged.estimate.value).abs() < 4.0 * se);
        assert_eq!(staged.stages[1].sampled, 5_000);
    }

    #[test]
    fn horizon_monotone_per_replica() {
        // with common random numbers the estimator is monotone exactly
        let short = q_monte_carlo(4, 100, 2000, 3).unwrap().value;
        let long = q_monte_carlo(4, 1000, 2000, 3).unwrap().value;
        assert!(long >= short);
    }
}
