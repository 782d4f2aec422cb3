//! Stable norms of Z^d-periodic weighted graphs: shortest paths in lifted
//! windows for upper bounds, a calibration LP for lower bounds, and planar
//! sections and lattice counts built on the exact polyhedral norm.

mod calibration;
mod graph;
mod models;
mod planar;
mod window;

use thiserror::Error;

pub use calibration::{calibrate, Calibration};
pub use graph::{Edge, PeriodicWeightedGraph, Shift};
pub use models::{flat_grid, hedlund_graph, hedlund_graph_with_resolution, HEDLUND_RESOLUTION};
pub use planar::{
    chart_point, count_classes, section_polygon, section_profile, unit_ball_section, LatticeCount,
    PlanarNorm, SectionPolygon, MAX_COUNT,
};
pub use window::{
    stable_norm, stable_norm_with, window_distance, StableNormEstimate, StableNormOptions, MAX_SPAN,
    MAX_WINDOW_VERTICES,
};

use crate::convex::ConvexError;

#[derive(Debug, Error)]
pub enum StableNormError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("lifted graph is not connected: {0}")]
    Disconnected(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("h must be nonzero")]
    ZeroVector,
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the lift multiplier N must be at least 1")]
    InvalidMultiplier,
    #[error("window overflow: {0}")]
    WindowOverflow(String),
    #[error("target not reachable inside the window")]
    WindowDisconnected,
    #[error("distance still changing at margin {margin}")]
    WindowUnstable { margin: i64 },
    #[error("calibration LP failed: {0}")]
    Lp(String),
    #[error("plane vectors are linearly dependent")]
    DependentPlane,
    #[error("epsilon must lie in (0, 0.5), got {0}")]
    InvalidEpsilon(f64),
    #[error("T must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("need at least one section direction")]
    InvalidDirections,
    #[error("lattice counting needs d = 2, got {0}")]
    NotPlanar(usize),
    #[error("predicted count {0:.3e} exceeds the enumeration guard")]
    CountTooLarge(f64),
    #[error(transparent)]
    Convex(#[from] ConvexError),
}
