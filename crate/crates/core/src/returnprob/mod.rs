//! Return probability `q(ν)` of simple random walk on `Z^ν`.
//!
//! With `G(ν)` the expected number of visits to the origin (including time
//! 0), `q = 1 − 1/G`, and
//!
//! ```text
//! G(ν) = ∫_0^∞ e^{−t} I₀(t/ν)^ν dt = ν ∫_0^∞ (e^{−x} I₀(x))^ν dx .
//! ```
//!
//! The integral is split at a truncation point `T`: the body is integrated
//! adaptively over geometric panels, and the tail is bracketed using
//! `(2πx)^{−1/2} < e^{−x}I₀(x) ≤ r(T) (2πx)^{−1/2}` for `x ≥ T ≥ 1`, where
//! `r(x) = √(2πx) e^{−x} I₀(x)` decreases to 1. The reported value is the
//! midpoint of the resulting interval for `q` and the error its half-width.

pub mod bessel;
pub mod montecarlo;
pub mod quadrature;
pub mod strip;

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bessel::i0_scaled;
pub use montecarlo::{q_monte_carlo, q_monte_carlo_staged, truncation_bias_bound, StagedEstimate, StagedPlan};
pub use strip::{q_n_estimate, QnCandidate, QnConfig, QnEstimate};

use bessel::i0_scaled_ratio;
use quadrature::integrate;

#[derive(Debug, Error, PartialEq)]
pub enum ReturnProbError {
    #[error("dimension ν must be at least 1")]
    Dimension,
    #[error("dimension ν = {0} is recurrent; Monte Carlo needs ν ≥ 3")]
    Recurrent(usize),
    #[error("tolerance must be positive and finite")]
    Tolerance,
    #[error("plane dimension m = {m} outside 1..={max}")]
    PlaneDimension { m: usize, max: usize },
    #[error("torus dimension d = {0} too small; q_N needs d ≥ 3")]
    TorusDimension(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QMethod {
    Quadrature,
    MonteCarlo,
}

impl fmt::Display for QMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QMethod::Quadrature => "quadrature",
            QMethod::MonteCarlo => "monte_carlo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QEstimate {
    pub nu: usize,
    pub value: f64,
    /// For quadrature a guaranteed bound; for Monte Carlo a 95% half-width.
    pub abs_error: f64,
    pub method: QMethod,
}

impl QEstimate {
    pub fn interval(&self) -> (f64, f64) {
        (self.value - self.abs_error, self.value + self.abs_error)
    }
}

const FIRST_CUT: f64 = 64.0;
const LAST_CUT: f64 = 1e15;

/// Bracket for `ν ∫_T^∞ (e^{−x}I₀(x))^ν dx`, `ν ≥ 3`, `T ≥ 1`.
pub fn tail_bracket(nu: usize, cut: f64) -> (f64, f64) {
    let v = nu as f64;
    let lower = v * (2.0 * std::f64::consts::PI).powf(-v / 2.0) * cut.powf(1.0 - v / 2.0) / (v / 2.0 - 1.0);
    (lower, lower * i0_scaled_ratio(cut).powf(v))
}

/// Green function `G(ν)` at the origin as an interval `(lo, hi)`, with the
/// truncation point used.
fn green_interval(nu: usize, tol: f64) -> (f64, f64, f64) {
    let v = nu as i32;
    let f = |x: f64| i0_scaled(x).powi(v);
    let panel_tol = tol * 1e-3;
    let mut body = 0.0;
    let mut body_err = 0.0;
    let mut a = 0.0;
    let mut b = 1.0;
    loop {
        let part = integrate(f, a, b, panel_tol, 200);
        body += part.value;
        body_err += part.error;
        a = b;
        b *= 2.0;
        if a < FIRST_CUT {
            continue;
        }
        let (tl, th) = tail_bracket(nu, a);
        let lo = nu as f64 * (body - body_err) + tl;
        let hi = nu as f64 * (body + body_err) + th;
        // width of the q interval
        let width = 1.0 / lo - 1.0 / hi;
        if width <= tol || a >= LAST_CUT {
            return (lo, hi, a);
        }
    }
}

/// `q(ν)` with `abs_error ≤ tol` when attainable (otherwise the achieved
/// error is reported). `ν ∈ {1, 2}` return exactly 1.
pub fn q_quadrature(nu: usize, tol: f64) -> Result<QEstimate, ReturnProbError> {
    if nu == 0 {
        return Err(ReturnProbError::Dimension);
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(ReturnProbError::Tolerance);
    }
    if nu <= 2 {
        return Ok(QEstimate {
            nu,
            value: 1.0,
            abs_error: 0.0,
            method: QMethod::Quadrature,
        });
    }
    let (lo, hi, _) = green_interval(nu, tol);
    let (q_lo, q_hi) = (1.0 - 1.0 / lo, 1.0 - 1.0 / hi);
    Ok(QEstimate {
        nu,
        value: 0.5 * (q_lo + q_hi),
        abs_error: 0.5 * (q_hi - q_lo),
        method: QMethod::Quadrature,
    })
}

/// Truncation point `T` chosen by [`q_quadrature`] (exposed for diagnostics).
pub fn truncation_point(nu: usize, tol: f64) -> f64 {
    green_interval(nu, tol).2
}

/// Writes `nu,q,abs_error,method` rows.
pub fn write_qtable<W: Write>(rows: &[QEstimate], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["nu", "q", "abs_error", "method"])?;
    for r in rows {
        w.write_record([r.nu.to_string(), format!("{:.12}", r.value), format!("{:.3e}", r.abs_error), r.method.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrent_dimensions() {
        for nu in [1, 2] {
            let q = q_quadrature(nu, 1e-8).unwrap();
            assert_eq!(q.value, 1.0);
            assert_eq!(q.abs_error, 0.0);
        }
        assert_eq!(q_quadrature(0, 1e-8), Err(ReturnProbError::Dimension));
        assert_eq!(q_quadrature(3, 0.0), Err(ReturnProbError::Tolerance));
    }

    #[test]
    fn three_dimensions() {
        // Watson's value: q(3) = 0.340537329550999...
        let q = q_quadrature(3, 1e-9).unwrap();
        assert!(q.abs_error <= 1e-9);
        assert!((q.value - 0.340_537_329_551).abs() < 2e-9, "{q:?}");
    }

    #[test]
    fn decreasing_and_asymptotic() {
        let qs: Vec<f64> = (3..=30).map(|nu| q_quadrature(nu, 1e-8).unwrap().value).collect();
        assert!(qs.windows(2).all(|w| w[1] < w[0]));
        let q30 = qs[27];
        assert!((60.0 * q30 - 1.0).abs() <= 0.1, "2ν q(ν) = {}", 60.0 * q30);
    }

    #[test]
    fn halving_truncation_is_consistent() {
        for nu in [3, 4, 8] {
            let tol = 1e-6;
            let (lo, hi, cut) = green_interval(nu, tol);
            let q = 1.0 - 2.0 / (lo + hi);
            // recompute with the cut halved, i.e. one panel fewer
            let v = nu as i32;
            let body = integrate(|x| i0_scaled(x).powi(v), 0.0, cut / 2.0, 1e-12, 5000).value;
            let (tl, th) = tail_bracket(nu, cut / 2.0);
            let (g_lo, g_hi) = (nu as f64 * body + tl, nu as f64 * body + th);
            let q_half = 1.0 - 2.0 / (g_lo + g_hi);
            let err_half = 0.5 * (1.0 / g_lo - 1.0 / g_hi);
            // both brackets contain the true value, so they must overlap
            let err = q_quadrature(nu, tol).unwrap().abs_error;
            assert!((q - q_half).abs() <= err + err_half + 1e-12, "ν={nu}: {q} vs {q_half}, err {err} + {err_half}");
        }
    }

    #[test]
    fn qtable_csv() {
        let rows: Vec<QEstimate> = (1..=4).map(|nu| q_quadrature(nu, 1e-6).unwrap()).collect();
        let mut buf = Vec::new();
        write_qtable(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("nu,q,abs_error,method\n1,1.000000000000,"));
        assert_eq!(text.lines().count(), 5);
    }
}
