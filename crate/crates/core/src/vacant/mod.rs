//! Connectivity of the vacant set `E \ X_{[0,n]}`.

pub mod events;
pub mod slab;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use events::{
    check_g, check_u, check_v, offset_count, segment_length, segment_linkage, DirectionSet, GOutcome, Linkage, PlaneScope,
    SegmentCensus, UOutcome, VOutcome,
};
pub use slab::{
    disconnection_time, first_disconnecting_prefix, is_disconnecting, DisconnectionProbe, DisconnectionRun, Occupancy,
    PrefixView, SiteSet,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("check cadence must be at least 1")]
    Cadence,
    #[error("trace window does not cover heights {lo}..={hi}")]
    Window { lo: i64, hi: i64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
