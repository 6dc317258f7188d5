//! Exact sampling of a vertical passage: where and when the cylinder walk
//! first reaches a given height, without simulating the steps in between.
//!
//! The walk's step types (vertical or along one of the `d` torus axes) are
//! i.i.d., and given the types the coordinates move independently. So a
//! passage over vertical distance `a` is
//!
//! * `V` vertical steps, a sum of `a` first-passage times of simple random
//!   walk on `Z` to `+1`;
//! * `H` horizontal steps before the last vertical one, negative binomial
//!   with `V` successes of probability `1/(d+1)`;
//! * a multinomial split of `H` over the torus axes, and along each axis a
//!   displacement `2·Bin(m, 1/2) − m`.
//!
//! Every piece is drawn from its exact law, so the result has the law of the
//! simulated walk (though not the same realization for a given stream).

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};

use crate::geometry::{Cylinder, Site};
use crate::rng::StepRng;

/// Beyond this the exact recurrence gives way to the asymptotic expansion.
const EXACT_TERMS: u64 = 1024;

/// `P[T_1 > 2n − 1] = C(2n, n) 4^{−n}` for the first-passage time `T_1` of
/// simple random walk to `+1`.
pub fn first_passage_survival(n: u64) -> f64 {
    if n <= EXACT_TERMS {
        let mut s = 1.0;
        for k in 1..=n {
            s *= (2 * k - 1) as f64 / (2 * k) as f64;
        }
        s
    } else {
        // Γ(n + 1/2) / (√π Γ(n + 1)), relative error below 1e−15 here
        let x = n as f64;
        let inv = 1.0 / x;
        let series = 1.0 - inv / 8.0 + inv * inv / 128.0 + 5.0 * inv.powi(3) / 1024.0 - 21.0 * inv.powi(4) / 32768.0;
        series / (std::f64::consts::PI * x).sqrt()
    }
}

/// One draw of `T_1` by inversion: `T_1 = 2n − 1` for the least `n` with
/// `S(n) < U`. Saturates at `u64::MAX` for vanishing `U`.
pub fn sample_first_passage<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut s = 1.0;
    for n in 1..=EXACT_TERMS {
        s *= (2 * n - 1) as f64 / (2 * n) as f64;
        if s < u {
            return 2 * n - 1;
        }
    }
    // S(n) ≈ (πn)^{−1/2}: bracket, then bisect
    let (mut lo, mut hi) = (EXACT_TERMS, EXACT_TERMS * 2);
    while first_passage_survival(hi) >= u {
        if hi >= 1 << 62 {
            return u64::MAX;
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if first_passage_survival(mid) < u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    2 * hi - 1
}

/// The walk started at `from`, run until it first reaches height `target`:
/// returns the site it reaches and the number of steps taken, or `None` if
/// that number would exceed `limit`.
pub fn vertical_passage(cyl: &Cylinder, rng: &mut StepRng, from: Site, target: i32, limit: u64) -> Option<(Site, u64)> {
    let a = (i64::from(from.z) - i64::from(target)).unsigned_abs();
    let rng = rng.inner();
    let mut vertical: u64 = 0;
    for _ in 0..a {
        vertical = vertical.saturating_add(sample_first_passage(rng));
        if vertical > limit {
            return None;
        }
    }
    let mut cell = from.cell;
    let d = cyl.dim();
    if vertical > 0 {
        // negative binomial as a gamma–Poisson mixture
        let p = 1.0 / (d + 1) as f64;
        let lambda = Gamma::new(vertical as f64, (1.0 - p) / p).expect("positive shape").sample(rng);
        if lambda > limit as f64 * 2.0 + 1e3 {
            return None;
        }
        let horizontal = if lambda > 0.0 {
            Poisson::new(lambda).expect("finite rate").sample(rng) as u64
        } else {
            0
        };
        if vertical.saturating_add(horizontal) > limit {
            return None;
        }
        let mut remaining = horizontal;
        for axis in 0..d {
            let m = if axis + 1 == d {
                remaining
            } else {
                Binomial::new(remaining, 1.0 / (d - axis) as f64).expect("probability").sample(rng)
            };
            remaining -= m;
            let up = Binomial::new(m, 0.5).expect("probability").sample(rng);
            let shift = 2 * i128::from(up) - i128::from(m);
            let shift = shift.rem_euclid(i128::from(cyl.side())) as i64;
            cell = cyl.shift_cell(cell, axis, shift);
        }
        return Some((Site { cell, z: target }, vertical + horizontal));
    }
    Some((from, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::chi_square_two_sample;

    #[test]
    fn survival_matches_catalan_recurrence() {
        assert_eq!(first_passage_survival(0), 1.0);
        assert_eq!(first_passage_survival(1), 0.5);
        assert_eq!(first_passage_survival(2), 0.375);
        // the two branches agree where they meet
        let exact = first_passage_survival(EXACT_TERMS);
        let x = EXACT_TERMS as f64;
        let asym = (1.0 - 1.0 / (8.0 * x) + 1.0 / (128.0 * x * x)) / (std::f64::consts::PI * x).sqrt();
        assert!((exact - asym).abs() / exact < 1e-9);
    }

    #[test]
    fn first_passage_pmf() {
        let mut rng = StepRng::new(5, 0, 2);
        let n = 200_000;
        let mut counts = [0u64; 4];
        for _ in 0..n {
            let t = sample_first_passage(rng.inner());
            assert_eq!(t % 2, 1);
            if t <= 7 {
                counts[(t / 2) as usize] += 1;
            }
        }
        // P[T = 1, 3, 5, 7] = 1/2, 1/8, 1/16, 5/128
        for (c, p) in counts.iter().zip([0.5, 0.125, 0.0625, 5.0 / 128.0]) {
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - p).abs() < 5.0 * se, "{c} vs {p}");
        }
    }

    #[test]
    fn passage_law_matches_direct_simulation() {
        // d = 2, N = 3, from height 2 down to 0: the hit cell and the
        // (log-bucketed) elapsed time against step-by-step simulation
        let cyl = Cylinder::new(2, 3).unwrap();
        let start = Site { cell: 4, z: 2 };
        let n = 20_000;
        let bucket = |t: u64| u64::from(64 - t.leading_zeros()).min(12);
        let (mut direct_cell, mut direct_time) = (Vec::new(), Vec::new());
        let (mut fast_cell, mut fast_time) = (Vec::new(), Vec::new());
        for r in 0..n {
            let mut rng = StepRng::new(11, r, cyl.directions());
            let (mut s, mut t) = (start, 0u64);
            // everything past 4096 steps lands in the top bucket
            while s.z != 0 && t < 4096 {
                s = cyl.step(s, rng.direction());
                t += 1;
            }
            direct_cell.push(if s.z == 0 { u64::from(s.cell) } else { 9 });
            direct_time.push(bucket(t));

            let mut rng = StepRng::new(99, r, cyl.directions());
            let (s, t) = vertical_passage(&cyl, &mut rng, start, 0, u64::MAX / 4).unwrap();
            assert_eq!(s.z, 0);
            fast_cell.push(if t < 4096 { u64::from(s.cell) } else { 9 });
            fast_time.push(bucket(t));
        }
        let cells = chi_square_two_sample(&direct_cell, &fast_cell, 5);
        let times = chi_square_two_sample(&direct_time, &fast_time, 5);
        assert!(cells.p_value > 0.001, "{cells:?}");
        assert!(times.p_value > 0.001, "{times:?}");
    }

    #[test]
    fn limit_censors() {
        let cyl = Cylinder::new(1, 4).unwrap();
        let mut rng = StepRng::new(1, 0, cyl.directions());
        let from = Site { cell: 0, z: 50 };
        assert!(vertical_passage(&cyl, &mut rng, from, 0, 10).is_none());
        assert_eq!(vertical_passage(&cyl, &mut rng, from, 50, 10), Some((from, 0)));
    }
}
