//! Thresholds built from `q(ν)`: `χ(λ)`, `ρ(d)`, `λ₀(d)`, `c₀(d)`, and the
//! ★-self-avoiding path counts behind the Peierls constant 7.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::returnprob::{q_quadrature, QEstimate};

/// Peierls constant: each ★-step of a self-avoiding path has at most 7
/// continuations.
pub const PEIERLS: f64 = 7.0;

/// Largest `n` accepted by [`star_saw_count`].
pub const SAW_BUDGET: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum CriticalityError {
    #[error("d = {0} is below 4, where the criticality condition cannot hold")]
    Dimension(usize),
    #[error("scan range {lo}..={hi} must lie within 4..=64")]
    ScanRange { lo: usize, hi: usize },
    #[error("λ must be finite and nonnegative, got {0}")]
    Lambda(f64),
    #[error("plane dimension m = {m} must satisfy 1 ≤ m ≤ d − 2 = {max}")]
    PlaneDimension { m: usize, max: i64 },
    #[error("q must lie in [0, 1], got {0}")]
    QRange(f64),
    #[error("★-path length {0} outside 1..=10")]
    SawBudget(usize),
    #[error("criticality condition fails at d = {d} (ρ = {rho:.6})")]
    ConditionFails { d: usize, rho: f64 },
}

/// `χ(λ) = e^λ (m/(d+1) + (1 − m/(d+1)) q)`.
pub fn chi(lambda: f64, m: usize, d: usize, q: f64) -> Result<f64, CriticalityError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(CriticalityError::Lambda(lambda));
    }
    if m == 0 || m + 2 > d {
        return Err(CriticalityError::PlaneDimension {
            m,
            max: d as i64 - 2,
        });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(CriticalityError::QRange(q));
    }
    let w = m as f64 / (d + 1) as f64;
    Ok(lambda.exp() * (w + (1.0 - w) * q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub d: usize,
    /// `q(d − 1)` with its quadrature error.
    pub q_used: QEstimate,
    pub rho: f64,
    pub rho_err: f64,
    pub holds: bool,
    /// `log 7 − ½ log ρ`, defined when the condition holds.
    pub lambda0: Option<f64>,
    /// `8d / log(1/ρ)`, defined when the condition holds.
    pub c0: Option<f64>,
}

impl ThresholdReport {
    /// Composes the report from a given `q(d − 1)`.
    pub fn from_q(d: usize, q_used: QEstimate) -> Self {
        let w = 2.0 / (d + 1) as f64;
        let rho = PEIERLS * (w + (1.0 - w) * q_used.value);
        let rho_err = PEIERLS * (1.0 - w) * q_used.abs_error;
        let holds = rho < 1.0;
        Self {
            d,
            q_used,
            rho,
            rho_err,
            holds,
            lambda0: holds.then(|| PEIERLS.ln() - 0.5 * rho.ln()),
            c0: holds.then(|| 8.0 * d as f64 / (1.0 / rho).ln()),
        }
    }

    /// Whether the verdict is robust to the error in `ρ`.
    pub fn is_certain(&self) -> bool {
        (self.rho - 1.0).abs() > self.rho_err
    }
}

/// `ρ(d) = 7 (2/(d+1) + (1 − 2/(d+1)) q(d−1))`, with `q` to `tol`.
pub fn rho(d: usize, tol: f64) -> Result<ThresholdReport, CriticalityError> {
    if d < 4 {
        return Err(CriticalityError::Dimension(d));
    }
    let q = q_quadrature(d - 1, tol).expect("d − 1 ≥ 3 and tol validated by caller");
    Ok(ThresholdReport::from_q(d, q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub reports: Vec<ThresholdReport>,
    /// Smallest `d` in the range where the condition holds.
    pub minimal_holding: Option<usize>,
}

pub fn threshold_scan(lo: usize, hi: usize, tol: f64) -> Result<ThresholdScan, CriticalityError> {
    if lo < 4 || hi > 64 || lo > hi {
        return Err(CriticalityError::ScanRange { lo, hi });
    }
    let reports = (lo..=hi).map(|d| rho(d, tol)).collect::<Result<Vec<_>, _>>()?;
    let minimal_holding = reports.iter().find(|r| r.holds).map(|r| r.d);
    Ok(ThresholdScan {
        reports,
        minimal_holding,
    })
}

/// Writes `d,q(d-1),rho,rho_err,holds,lambda0,c0`; undefined constants are
/// left empty.
pub fn write_thresholds<W: Write>(reports: &[ThresholdReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "q(d-1)", "rho", "rho_err", "holds", "lambda0", "c0"])?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
    for r in reports {
        w.write_record([
            r.d.to_string(),
            format!("{:.12}", r.q_used.value),
            format!("{:.9}", r.rho),
            format!("{:.3e}", r.rho_err),
            r.holds.to_string(),
            opt(r.lambda0),
            opt(r.c0),
        ])?;
    }
    w.flush()?;
    Ok(())
}

const STAR: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Number `a(n)` of `n`-step self-avoiding paths on `Z²` from the origin
/// using the eight ★-steps.
pub fn star_saw_count(n: usize) -> Result<u64, CriticalityError> {
    if n == 0 || n > SAW_BUDGET {
        return Err(CriticalityError::SawBudget(n));
    }
    let w = 2 * n + 1;
    let mut seen = vec![false; w * w];
    let centre = (n, n);
    seen[centre.1 * w + centre.0] = true;

    fn extend(x: usize, y: usize, left: usize, w: usize, seen: &mut [bool]) -> u64 {
        if left == 0 {
            return 1;
        }
        let mut total = 0;
        for (dx, dy) in STAR {
            let nx = (x as i32 + dx) as usize;
            let ny = (y as i32 + dy) as usize;
            let i = ny * w + nx;
            if !seen[i] {
                if left == 1 {
                    total += 1;
                    continue;
                }
                seen[i] = true;
                total += extend(nx, ny, left - 1, w, seen);
                seen[i] = false;
            }
        }
        total
    }
    Ok(extend(centre.0, centre.1, n, w, &mut seen))
}

/// The Peierls bound `8 · 7^{n−1}`.
pub fn peierls_bound(n: usize) -> u64 {
    8 * 7u64.pow(n as u32 - 1)
}

/// The experiment value of `u₀(d)`, which is only known to exist: the
/// configured value is echoed together with the constants it is paired with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct U0Provenance {
    pub d: usize,
    pub u: f64,
    pub source: String,
    pub rho: f64,
    pub lambda0: f64,
    pub c0: f64,
}

pub fn u0_placeholder(d: usize, configured: f64, tol: f64) -> Result<U0Provenance, CriticalityError> {
    let report = rho(d, tol)?;
    match (report.lambda0, report.c0) {
        (Some(lambda0), Some(c0)) => Ok(U0Provenance {
            d,
            u: configured,
            source: "configured".into(),
            rho: report.rho,
            lambda0,
            c0,
        }),
        _ => Err(CriticalityError::ConditionFails { d, rho: report.rho }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Enumerates all `8^n` step sequences and keeps the self-avoiding ones.
    fn brute_force_saw(n: usize) -> u64 {
        let mut count = 0;
        for code in 0..8u64.pow(n as u32) {
            let mut c = code;
            let mut pts = vec![(0i32, 0i32)];
            for _ in 0..n {
                let (dx, dy) = STAR[(c % 8) as usize];
                c /= 8;
                let (x, y) = *pts.last().unwrap();
                pts.push((x + dx, y + dy));
            }
            let mut sorted = pts.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() == pts.len() {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn saw_small_values() {
        assert_eq!(star_saw_count(1), Ok(8));
        assert_eq!(star_saw_count(2), Ok(56));
        for n in 1..=6 {
            assert_eq!(star_saw_count(n).unwrap(), brute_force_saw(n), "n = {n}");
        }
        assert_eq!(star_saw_count(0), Err(CriticalityError::SawBudget(0)));
        assert_eq!(star_saw_count(11), Err(CriticalityError::SawBudget(11)));
    }

    #[test]
    fn saw_growth() {
        let a: Vec<u64> = (1..=8).map(|n| star_saw_count(n).unwrap()).collect();
        for (i, &v) in a.iter().enumerate() {
            assert!(v <= peierls_bound(i + 1));
        }
        assert!(a.windows(2).all(|w| w[1] <= 7 * w[0]));
    }

    #[test]
    fn chi_identities() {
        assert_eq!(chi(0.0, 2, 17, 1.0), Ok(1.0));
        let grid: Vec<f64> = (0..20).map(|k| chi(0.1 * k as f64, 2, 10, 0.2).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
        assert!(chi(-1.0, 2, 10, 0.2).is_err());
        assert!(chi(0.0, 9, 10, 0.2).is_err());
        assert!(chi(0.0, 2, 10, 1.5).is_err());
    }

    #[test]
    fn golden_thresholds() {
        let r17 = rho(17, 1e-10).unwrap();
        let r16 = rho(16, 1e-10).unwrap();
        assert_abs_diff_eq!(r17.rho, 0.985_963, epsilon = 1e-6);
        assert_abs_diff_eq!(r16.rho, 1.045_077, epsilon = 1e-6);
        assert!(r17.holds && !r16.holds);
        assert!(r17.is_certain() && r16.is_certain());
        assert!(r16.lambda0.is_none() && r16.c0.is_none());
        // χ(λ₀) = ρ^{1/2}
        let x = chi(r17.lambda0.unwrap(), 2, 17, r17.q_used.value).unwrap();
        assert_abs_diff_eq!(x, r17.rho.sqrt(), epsilon = 1e-12);
        // recomposition is exact
        assert_eq!(ThresholdReport::from_q(17, r17.q_used), r17);
        assert_eq!(rho(3, 1e-6), Err(CriticalityError::Dimension(3)));
    }

    #[test]
    fn chi_at_seventeen_below_one() {
        let q16 = q_quadrature(16, 1e-10).unwrap().value;
        let v = chi(0.0, 2, 17, q16).unwrap();
        assert_abs_diff_eq!(v, 2.0 / 18.0 + 16.0 / 18.0 * q16, epsilon = 1e-15);
        assert!(v < 1.0);
    }

    #[test]
    fn u0_is_a_passthrough() {
        let p = u0_placeholder(17, 0.01, 1e-8).unwrap();
        assert_eq!(p.u, 0.01);
        assert_eq!(p.source, "configured");
        assert!(p.c0 > 0.0 && p.lambda0 > PEIERLS.ln());
        assert!(matches!(u0_placeholder(16, 0.01, 1e-8), Err(CriticalityError::ConditionFails { d: 16, .. })));
    }

    #[test]
    fn scan_reports_seventeen() {
        let scan = threshold_scan(4, 30, 1e-6).unwrap();
        assert_eq!(scan.minimal_holding, Some(17));
        assert!(scan.reports.iter().all(|r| r.holds == (r.d >= 17)));
        assert!(scan.reports.windows(2).all(|w| w[1].rho < w[0].rho));
        let mut buf = Vec::new();
        write_thresholds(&scan.reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("d,q(d-1),rho,rho_err,holds,lambda0,c0\n4,"));
        assert!(threshold_scan(3, 30, 1e-6).is_err());
    }
}
