//! Summary statistics and the few tests the experiments need.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::rng::replica_rng;

/// Linear-interpolation quantile (type 7) of unsorted data.
pub fn quantile(data: &[f64], p: f64) -> Option<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&p) {
        return None;
    }
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn median(data: &[f64]) -> Option<f64> {
    quantile(data, 0.5)
}

pub fn mean(data: &[f64]) -> Option<f64> {
    (!data.is_empty()).then(|| data.iter().sum::<f64>() / data.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_std_error: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn ols(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = mean(x)?;
    let my = mean(y)?;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let slope_std_error = if n > 2 { (sse / (n - 2) as f64 / sxx).sqrt() } else { f64::NAN };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
        slope_std_error,
    })
}

/// Percentile bootstrap interval for the slope of `log median(sample_k)`
/// against `log x_k`, resampling each group independently.
pub fn bootstrap_loglog_slope(x: &[f64], groups: &[Vec<f64>], resamples: usize, level: f64, seed: u64) -> Option<(f64, f64)> {
    if x.len() != groups.len() || groups.iter().any(|g| g.is_empty()) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let mut rng = replica_rng(seed, 0);
    let mut slopes = Vec::with_capacity(resamples);
    let mut buf = Vec::new();
    for _ in 0..resamples {
        let ly: Vec<f64> = groups
            .iter()
            .map(|g| {
                buf.clear();
                buf.extend((0..g.len()).map(|_| g[rng.random_range(0..g.len())]));
                median(&buf).expect("nonempty").ln()
            })
            .collect();
        slopes.push(ols(&lx, &ly)?.slope);
    }
    slopes.sort_by(f64::total_cmp);
    let a = (1.0 - level) / 2.0;
    Some((quantile_sorted(&slopes, a)?, quantile_sorted(&slopes, 1.0 - a)?))
}

/// `sup_x |F_a(x) − F_b(x)|` for the empirical distribution functions.
pub fn ecdf_sup_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

impl TestResult {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value
/// (conservative for discrete data).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestResult {
    let d = ecdf_sup_distance(a, b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ne = (na * nb / (na + nb)).sqrt();
    TestResult {
        statistic: d,
        p_value: kolmogorov_q((ne + 0.12 + 0.11 / ne) * d),
    }
}

/// Chi-square test of homogeneity for two samples of integer values. Cells
/// are merged from the right until each pooled count is at least `min_pooled`.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], min_pooled: u64) -> TestResult {
    let top = a.iter().chain(b).copied().max().unwrap_or(0) as usize;
    let mut ca = vec![0u64; top + 1];
    let mut cb = vec![0u64; top + 1];
    a.iter().for_each(|&v| ca[v as usize] += 1);
    b.iter().for_each(|&v| cb[v as usize] += 1);
    let mut cells: Vec<(u64, u64)> = Vec::new();
    let (mut xa, mut xb) = (0, 0);
    for v in (0..=top).rev() {
        xa += ca[v];
        xb += cb[v];
        if xa + xb >= min_pooled {
            cells.push((xa, xb));
            xa = 0;
            xb = 0;
        }
    }
    if xa + xb > 0 {
        match cells.last_mut() {
            Some(c) => {
                c.0 += xa;
                c.1 += xb;
            }
            None => cells.push((xa, xb)),
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let mut stat = 0.0;
    for &(x, y) in &cells {
        let pooled = (x + y) as f64;
        let ea = pooled * na / n;
        let eb = pooled * nb / n;
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let dof = cells.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(stat)
    };
    TestResult { statistic: stat, p_value }
}

/// Chi-square goodness of fit of integer counts against the uniform law.
pub fn chi_square_uniform(counts: &[u64]) -> TestResult {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).expect("at least two cells");
    TestResult {
        statistic: stat,
        p_value: 1.0 - dist.cdf(stat),
    }
}

/// Wilson score interval at normal quantile `z`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Median, quartiles and 5%/95% quantiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
}

pub fn summarize(data: &[f64]) -> Option<Summary> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    Some(Summary {
        count: v.len(),
        mean: mean(&v)?,
        q05: quantile_sorted(&v, 0.05)?,
        q25: quantile_sorted(&v, 0.25)?,
        median: quantile_sorted(&v, 0.5)?,
        q75: quantile_sorted(&v, 0.75)?,
        q95: quantile_sorted(&v, 0.95)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quantiles() {
        let d = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(median(&d), Some(2.5));
        assert_eq!(quantile(&d, 0.0), Some(1.0));
        assert_eq!(quantile(&d, 1.0), Some(4.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let f = ols(&x, &y).unwrap();
        assert_abs_diff_eq!(f.slope, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.intercept, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ecdf_distance() {
        assert_eq!(ecdf_sup_distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ecdf_sup_distance(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert_abs_diff_eq!(ecdf_sup_distance(&[1.0, 2.0, 3.0, 4.0], &[2.5]), 0.5);
    }

    #[test]
    fn kolmogorov_values() {
        // Q(1.36) ≈ 0.049, Q(1.63) ≈ 0.010
        assert_abs_diff_eq!(kolmogorov_q(1.36), 0.0494, epsilon = 5e-4);
        assert_abs_diff_eq!(kolmogorov_q(1.628), 0.0100, epsilon = 5e-4);
    }

    #[test]
    fn ks_detects_shift() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 0.2).collect();
        assert!(!ks_two_sample(&a, &b).passes(0.01));
        assert!(ks_two_sample(&a, &a).passes(0.01));
    }

    #[test]
    fn chi_square_homogeneity() {
        let a: Vec<u64> = (0..2000).map(|i| i % 5).collect();
        let b: Vec<u64> = (0..3000).map(|i| (i * 7) % 5).collect();
        assert!(chi_square_two_sample(&a, &b, 10).p_value > 0.99);
        let c: Vec<u64> = (0..3000).map(|i| i % 3).collect();
        assert!(chi_square_two_sample(&a, &c, 10).p_value < 1e-6);
    }

    #[test]
    fn wilson_interval() {
        let (lo, hi) = wilson(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5);
        assert_abs_diff_eq!(hi - 0.5, 0.5 - lo, epsilon = 1e-12);
        assert_eq!(wilson(0, 0, 1.96), (0.0, 1.0));
    }
}
