//! Sampled convex functions of one variable and the duality tools built on them.

mod faces;
mod irrationality;
mod legendre;
mod profile;

pub use faces::{detect_faces, radial_face, FaceDescriptor, FaceKind};
pub use irrationality::{
    find_integer_relation, irrationality, HomologyVector, IrrationalityReport, EXHAUSTIVE_MAX_DIM, MAX_DIM,
};
pub use legendre::{legendre_transform, one_sided_derivatives};
pub use profile::{ConvexityViolation, Sample, SampledConvexProfile, Tolerances};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConvexError {
    #[error("profile has no samples")]
    Empty,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("abscissae must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("{0}")]
    NotConvex(ConvexityViolation),
    #[error("dual grid is empty")]
    EmptyGrid,
    #[error("dual grid contains a non-finite value")]
    NonFiniteGrid,
    #[error("profile has {0} samples; slope data needs at least 3")]
    TooFewSamples(usize),
    #[error("abscissa {0} is not an interior sample of the profile")]
    NotInterior(f64),
    #[error("homology vector must have dimension >= 1 and finite coordinates")]
    InvalidVector,
    #[error("search bound must be >= 1")]
    InvalidBound,
    #[error("dimension {0} exceeds the relation search limit of {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("profile line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
