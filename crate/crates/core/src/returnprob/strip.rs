//! Monte Carlo estimate of `q_N`: the largest probability, over planes
//! `F ∈ ℒ_m` and starting points `z ∈ ∂F`, of entering `F` before leaving the
//! block `B̃_0`.
//!
//! Torus translations and coordinate permutations act transitively on planes
//! of the same orientation, so only two representatives are simulated: a
//! horizontal plane spanned by `e_1, …, e_m`, and a vertical one spanned by
//! `e_1, …, e_{m−1}, e_{d+1}`. What is left is where `z` sits: a torus step
//! off `F` or (for horizontal planes) a vertical one, at each configured
//! height. The block `B̃_0` breaks vertical translation invariance, so heights
//! are scanned rather than reduced.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{block_sites, BlockKind, BlockSpec};
use crate::rng::StepRng;

use super::ReturnProbError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QnConfig {
    pub d: usize,
    pub m: usize,
    pub side: u32,
    pub replicas: u64,
    pub seed: u64,
    /// Heights of the horizontal plane, and starting heights next to the
    /// vertical plane.
    pub heights: Vec<i64>,
}

impl QnConfig {
    pub fn new(d: usize, m: usize, side: u32, replicas: u64, seed: u64) -> Self {
        Self {
            d,
            m,
            side,
            replicas,
            seed,
            heights: vec![0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Where the starting point sits relative to `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Offset {
    Torus,
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnCandidate {
    pub orientation: Orientation,
    pub offset: Offset,
    pub height: i64,
    pub hits: u64,
    pub p: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnEstimate {
    pub d: usize,
    pub m: usize,
    pub side: u32,
    pub replicas: u64,
    /// Largest candidate estimate (biased upward by the maximisation when
    /// candidates are close).
    pub value: f64,
    pub std_error: f64,
    pub candidates: Vec<QnCandidate>,
}

struct Walker {
    /// `true` for coordinates that must match the plane.
    constrained: Vec<bool>,
    /// Target value on constrained torus axes is 0; the vertical target is
    /// `plane_z` when the plane is horizontal.
    plane_z: Option<i64>,
    lo: i64,
    hi: i64,
    side: u32,
}

impl Walker {
    fn hits(&self, rng: &mut StepRng, start: &[u32], z0: i64) -> bool {
        let d = start.len();
        let mut pos = start.to_vec();
        let mut z = z0;
        let mut off = (0..d).filter(|&a| self.constrained[a] && pos[a] != 0).count()
            + usize::from(self.plane_z.is_some_and(|h| z != h));
        debug_assert!(off > 0, "start must lie off the plane");
        loop {
            let dir = rng.direction();
            let axis = dir >> 1;
            let up = dir & 1 == 0;
            if axis == d {
                let was = self.plane_z.map(|h| z == h);
                z += if up { 1 } else { -1 };
                if z < self.lo || z > self.hi {
                    return false;
                }
                if let (Some(was), Some(h)) = (was, self.plane_z) {
                    match (was, z == h) {
                        (true, false) => off += 1,
                        (false, true) => off -= 1,
                        _ => {}
                    }
                }
            } else {
                let c = &mut pos[axis];
                let was = *c == 0;
                *c = if up { (*c + 1) % self.side } else { (*c + self.side - 1) % self.side };
                if self.constrained[axis] {
                    match (was, *c == 0) {
                        (true, false) => off += 1,
                        (false, true) => off -= 1,
                        _ => {}
                    }
                }
            }
            if off == 0 {
                return true;
            }
        }
    }
}

/// Estimates `q_N` at level 0 for planes of dimension `m`, `1 ≤ m ≤ d−2`.
pub fn q_n_estimate(cfg: &QnConfig) -> Result<QnEstimate, ReturnProbError> {
    let QnConfig { d, m, side, replicas, seed, .. } = *cfg;
    if d < 3 {
        return Err(ReturnProbError::TorusDimension(d));
    }
    if m == 0 || m > d - 2 {
        return Err(ReturnProbError::PlaneDimension { m, max: d - 2 });
    }
    let outer = block_sites(BlockSpec::new(0, side, BlockKind::BTilde));
    // first torus axis outside both representatives
    let free_axis = m;
    let mut plan = Vec::new();
    for &h in &cfg.heights {
        if !outer.contains(h) {
            continue;
        }
        plan.push((Orientation::Horizontal, Offset::Torus, h));
        if outer.contains(h + 1) {
            plan.push((Orientation::Horizontal, Offset::Up, h));
        }
        if outer.contains(h - 1) {
            plan.push((Orientation::Horizontal, Offset::Down, h));
        }
        plan.push((Orientation::Vertical, Offset::Torus, h));
    }

    let candidates: Vec<QnCandidate> = plan
        .iter()
        .enumerate()
        .map(|(ci, &(orientation, offset, height))| {
            let constrained: Vec<bool> = (0..d)
                .map(|a| match orientation {
                    Orientation::Horizontal => a >= m,
                    Orientation::Vertical => a >= m - 1,
                })
                .collect();
            let walker = Walker {
                constrained,
                plane_z: (orientation == Orientation::Horizontal).then_some(height),
                lo: outer.lo,
                hi: outer.hi,
                side,
            };
            let mut start = vec![0u32; d];
            let z0 = match offset {
                Offset::Torus => {
                    start[free_axis] = 1;
                    height
                }
                Offset::Up => height + 1,
                Offset::Down => height - 1,
            };
            let base = ci as u64 * replicas;
            let hits = (0..replicas)
                .into_par_iter()
                .filter(|&r| {
                    let mut rng = StepRng::new(seed, base + r, 2 * (d + 1));
                    walker.hits(&mut rng, &start, z0)
                })
                .count() as u64;
            let p = hits as f64 / replicas.max(1) as f64;
            QnCandidate {
                orientation,
                offset,
                height,
                hits,
                p,
                std_error: (p * (1.0 - p) / replicas.max(1) as f64).sqrt(),
            }
        })
        .collect();
    let best = candidates
        .iter()
        .max_by(|a, b| a.p.total_cmp(&b.p))
        .cloned()
        .expect("height 0 always yields candidates");
    Ok(QnEstimate {
        d,
        m,
        side,
        replicas,
        value: best.p,
        std_error: best.std_error,
        candidates,
    })
}
