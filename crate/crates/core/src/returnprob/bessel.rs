//! The exponentially scaled modified Bessel function `e^{-x} I₀(x)`.

/// Above this argument the asymptotic expansion is used.
const SERIES_LIMIT: f64 = 15.0;

/// `e^{-x} I₀(x)` for `x ≥ 0`, relative error below `1e-14`.
pub fn i0_scaled(x: f64) -> f64 {
    assert!(x >= 0.0 && x.is_finite(), "argument must be finite and nonnegative, got {x}");
    if x <= SERIES_LIMIT {
        series(x)
    } else {
        asymptotic(x)
    }
}

/// `Σ_k (x²/4)^k / (k!)²`, scaled by `e^{-x}`. All terms are positive, so
/// the sum is well conditioned.
fn series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k: f64 = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum * (-x).exp()
}

/// `(2πx)^{-1/2} Σ_k a_k x^{-k}` with `a_k = a_{k-1} (2k-1)² / (8k)`,
/// summed until the terms stop decreasing or become negligible.
fn asymptotic(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k: f64 = 1.0;
    loop {
        let next = term * (2.0 * k - 1.0).powi(2) / (8.0 * k * x);
        if next >= term || next < sum * 1e-17 {
            break;
        }
        term = next;
        sum += term;
        k += 1.0;
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// `√(2πx) e^{-x} I₀(x)`; tends to 1 from above as `x → ∞`.
pub fn i0_scaled_ratio(x: f64) -> f64 {
    (2.0 * std::f64::consts::PI * x).sqrt() * i0_scaled(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Abramowitz–Stegun 9.8.1 / 9.8.2 rational approximations (|ε| < 2e-7).
    fn i0_scaled_as(x: f64) -> f64 {
        if x <= 3.75 {
            let t = (x / 3.75).powi(2);
            let p = 1.0 + t * (3.5156229 + t * (3.0899424 + t * (1.2067492 + t * (0.2659732 + t * (0.0360768 + t * 0.0045813)))));
            p * (-x).exp()
        } else {
            let t = 3.75 / x;
            let p = 0.39894228
                + t * (0.01328592
                    + t * (0.00225319
                        + t * (-0.00157565
                            + t * (0.00916281 + t * (-0.02057706 + t * (0.02635537 + t * (-0.01647633 + t * 0.00392377)))))));
            p / x.sqrt()
        }
    }

    /// `(1/π) ∫_0^π e^{x(cos θ - 1)} dθ` by the trapezoid rule, which is
    /// spectrally accurate for this periodic integrand.
    fn i0_scaled_trapezoid(x: f64) -> f64 {
        let n = 4000;
        let h = std::f64::consts::PI / n as f64;
        let f = |t: f64| (x * (t.cos() - 1.0)).exp();
        let inner: f64 = (1..n).map(|k| f(k as f64 * h)).sum();
        (0.5 * (f(0.0) + f(std::f64::consts::PI)) + inner) * h / std::f64::consts::PI
    }

    #[test]
    fn small_arguments() {
        assert_eq!(i0_scaled(0.0), 1.0);
        // I₀(1) = 1.2660658777520082
        assert_relative_eq!(i0_scaled(1.0) * 1f64.exp(), 1.2660658777520082, max_relative = 1e-14);
    }

    #[test]
    fn agrees_with_rational_approximation() {
        for k in 0..400 {
            let x = 0.1 * k as f64;
            assert_relative_eq!(i0_scaled(x), i0_scaled_as(x), max_relative = 3e-7);
        }
    }

    #[test]
    fn agrees_with_trapezoid() {
        for &x in &[0.3, 2.0, 7.5, 14.9, 15.1, 22.0, 60.0, 300.0] {
            assert_relative_eq!(i0_scaled(x), i0_scaled_trapezoid(x), max_relative = 1e-12);
        }
    }

    #[test]
    fn branches_meet_continuously() {
        let below = series(SERIES_LIMIT);
        let above = asymptotic(SERIES_LIMIT);
        assert_relative_eq!(below, above, max_relative = 1e-14);
    }

    #[test]
    fn ratio_decreases_to_one() {
        let mut prev = f64::INFINITY;
        let mut x = 1.0;
        while x < 1e8 {
            let r = i0_scaled_ratio(x);
            assert!(r > 1.0 && r < prev, "x = {x}: {r} vs {prev}");
            prev = r;
            x *= 1.05;
        }
        // so the naive tail bound e^{-x}I₀(x) ≤ (2πx)^{-1/2} fails everywhere
        assert!(i0_scaled(50.0) > (2.0 * std::f64::consts::PI * 50.0).powf(-0.5));
    }
}
