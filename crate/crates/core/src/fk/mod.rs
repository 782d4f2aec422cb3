//! The Frenkel-Kontorova chain: a discrete one-degree-of-freedom minimal-action
//! model whose periodic minimizers give beta at rational rotation numbers.

mod minimize;
mod model;
mod profile;

pub use minimize::{minimize_periodic, minimize_periodic_with, MinimizerOptions, PeriodicConfiguration};
pub use model::{GeneratingFunction, Potential};
pub use profile::{
    alpha_from_beta, beta_profile, beta_profile_with, corner_gap, farey_fractions, raw_corner_gap, BetaEntry,
    BetaProfile, Fraction, PROFILE_CONVEX_TOL,
};

use thiserror::Error;

use crate::convex::{ConvexError, ConvexityViolation};

#[derive(Debug, Error)]
pub enum FkError {
    #[error("{p}/{q} is not a reduced fraction with positive denominator")]
    InvalidFraction { p: i64, q: usize },
    #[error("at least one restart is required")]
    NoRestarts,
    #[error("Farey depth must be at least 2, got {0}")]
    DepthTooSmall(u64),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("minimization of {p}/{q} did not converge: residual {residual:e}")]
    NotConverged { p: i64, q: usize, residual: f64, best: Box<PeriodicConfiguration> },
    #[error("at {fraction}: {source}")]
    AtFraction { fraction: Fraction, source: Box<FkError> },
    #[error("beta profile fails the convexity certificate: {0}")]
    NotConvex(ConvexityViolation),
    #[error("{0} lacks two Farey neighbours on each side in the profile")]
    MissingNeighbours(Fraction),
    #[error(transparent)]
    Convex(#[from] ConvexError),
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
