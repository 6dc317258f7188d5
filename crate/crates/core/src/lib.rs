//! Random walk on the discrete cylinder `E = (Z/NZ)^d × Z`.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] — points, neighbourhoods, blocks `C_j ⊆ B_j ⊆ B̃_j`, lattice planes;
//! * [`rng`], [`walk`], [`clocks`], [`zlattice`] — seeded walks, trace storage,
//!   excursion clocks, level crossings and local times;
//! * [`vacant`] — disconnection of the cylinder and the vacant-set events;
//! * [`returnprob`], [`criticality`] — the return probability `q(ν)` and the
//!   thresholds built from it;
//! * [`harness`] — seeded experiment drivers and result emission.

pub mod clocks;
pub mod criticality;
pub mod dump;
pub mod geometry;
pub mod harness;
pub mod passage;
pub mod returnprob;
pub mod rng;
pub mod stats;
pub mod tails;
pub mod unionfind;
pub mod vacant;
pub mod walk;
pub mod zlattice;
