//! Simple random walk on `Z^ν` and on the torus `(Z/NZ)^k`.

use crate::rng::StepRng;
use crate::walk::Observed;

/// A path on `Z^ν`, stored flat: position `k` occupies
/// `coords[k*ν .. (k+1)*ν]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath {
    pub nu: usize,
    pub coords: Vec<i64>,
}

impl LatticePath {
    pub fn len(&self) -> usize {
        self.coords.len() / self.nu
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn position(&self, k: usize) -> &[i64] {
        &self.coords[k * self.nu..(k + 1) * self.nu]
    }
}

/// Walk of `horizon` steps on `Z^ν` from the origin, replica 0 of `seed`.
pub fn walk_z_nu(nu: usize, seed: u64, horizon: u64) -> LatticePath {
    assert!(nu >= 1, "dimension must be positive");
    let mut rng = StepRng::new(seed, 0, 2 * nu);
    let mut pos = vec![0i64; nu];
    let mut coords = Vec::with_capacity(nu * (horizon as usize + 1));
    coords.extend_from_slice(&pos);
    for _ in 0..horizon {
        let dir = rng.direction();
        pos[dir >> 1] += if dir & 1 == 0 { 1 } else { -1 };
        coords.extend_from_slice(&pos);
    }
    LatticePath { nu, coords }
}

/// Walk on `Z` returning only positions (used for local-time comparisons).
pub fn walk_z(rng: &mut StepRng, horizon: u64) -> Vec<i64> {
    let mut z = 0i64;
    let mut out = Vec::with_capacity(horizon as usize + 1);
    out.push(z);
    for _ in 0..horizon {
        z += if rng.direction() == 0 { 1 } else { -1 };
        out.push(z);
    }
    out
}

/// Continues a walk on `Z^ν` from `pos` for at most `budget` steps, stopping
/// at the first visit to the origin. Returns the number of steps taken when
/// the origin is hit. `nonzero` must equal the number of nonzero coordinates.
pub fn run_until_origin(rng: &mut StepRng, pos: &mut [i64], budget: u64) -> Observed<u64> {
    let mut nonzero = pos.iter().filter(|&&c| c != 0).count();
    for step in 1..=budget {
        let dir = rng.direction();
        let c = &mut pos[dir >> 1];
        let was_zero = *c == 0;
        *c += if dir & 1 == 0 { 1 } else { -1 };
        if was_zero {
            nonzero += 1;
        } else if *c == 0 {
            nonzero -= 1;
            if nonzero == 0 {
                return Observed::At(step);
            }
        }
    }
    Observed::NotYet
}

/// First return time `H̃_0` to the origin of a walk on `Z^ν`, if it happens
/// within `horizon` steps.
pub fn first_return(rng: &mut StepRng, nu: usize, horizon: u64) -> Observed<u64> {
    let mut pos = vec![0i64; nu];
    run_until_origin(rng, &mut pos, horizon)
}

/// First hitting time of the origin for the walk on `(Z/NZ)^k` started at
/// `start`, within `horizon` steps.
pub fn torus_hit_origin(rng: &mut StepRng, side: u32, start: &[u32], horizon: u64) -> Observed<u64> {
    let mut pos: Vec<u32> = start.iter().map(|&c| c % side).collect();
    let mut nonzero = pos.iter().filter(|&&c| c != 0).count();
    if nonzero == 0 {
        return Observed::At(0);
    }
    for step in 1..=horizon {
        let dir = rng.direction();
        let c = &mut pos[dir >> 1];
        let was_zero = *c == 0;
        *c = if dir & 1 == 0 { (*c + 1) % side } else { (*c + side - 1) % side };
        if was_zero && *c != 0 {
            nonzero += 1;
        } else if !was_zero && *c == 0 {
            nonzero -= 1;
            if nonzero == 0 {
                return Observed::At(step);
            }
        }
    }
    Observed::NotYet
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_increments_are_unit() {
        let p = walk_z_nu(1, 4, 1000);
        assert_eq!(p.len(), 1001);
        for k in 0..1000 {
            assert_eq!((p.position(k + 1)[0] - p.position(k)[0]).abs(), 1);
        }
    }

    #[test]
    fn replay_determinism() {
        assert_eq!(walk_z_nu(3, 8, 500), walk_z_nu(3, 8, 500));
        assert_ne!(walk_z_nu(3, 8, 500), walk_z_nu(3, 9, 500));
    }

    #[test]
    fn first_return_agrees_with_path() {
        for seed in 0..50 {
            let path = walk_z_nu(2, seed, 400);
            let expected = (1..path.len()).find(|&k| path.position(k).iter().all(|&c| c == 0));
            let mut rng = StepRng::new(seed, 0, 4);
            let got = first_return(&mut rng, 2, 400);
            assert_eq!(got.at(), expected.map(|k| k as u64), "seed {seed}");
        }
    }

    #[test]
    fn first_return_in_one_dimension_is_even() {
        let mut rng = StepRng::new(1, 0, 2);
        for _ in 0..100 {
            if let Observed::At(t) = first_return(&mut rng, 1, 10_000) {
                assert_eq!(t % 2, 0);
            }
        }
    }

    #[test]
    fn torus_hit_from_origin_is_zero() {
        let mut rng = StepRng::new(1, 0, 6);
        assert_eq!(torus_hit_origin(&mut rng, 5, &[0, 0, 0], 10), Observed::At(0));
        assert!(torus_hit_origin(&mut rng, 2, &[1, 0, 0], 1_000_000).is_seen());
    }
}
