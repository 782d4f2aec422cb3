//! Lattice walks with heights modulo one, and cut-and-project quasicrystals
//! of a totally irrational plane `z = alpha x + beta y` in R^3.

mod coverage;
mod curves;
mod pair;
mod quasicrystal;
mod sequences;
mod walk;

use thiserror::Error;

pub use coverage::{circle_coverage, gap_analysis, interval_coverage, CoverageReport};
pub use curves::{
    bounded_line_check, hausdorff_distance, lemma_b_check, plane_line, BoundedLineReport, LemmaReport,
    BOUNDED_LINE_STEP, PLANE_TOL,
};
pub use pair::{IrrationalPair, INDEPENDENCE_BOUND};
pub use quasicrystal::{
    cantor_gaps, qc_build, qc_components, Component, ComponentReport, IntegerBox, IntervalSet, QcPoint,
    QuasiCrystalWindow, MAX_WINDOW_VOLUME,
};
pub use sequences::{
    all_words, all_words_sequence, avoid_interval_sequence, fibonacci_word, random_sequence,
    substitution_sequence, LetterMap, Substitution,
};
pub use walk::{heights, linear_height, split_height, HeightTrace, Step, StepSequence};

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("slopes and coordinates must be finite")]
    NonFinite,
    #[error("independence bound {0} is below the minimum of 1000")]
    BoundTooSmall(u32),
    #[error("1, alpha, beta satisfy {k0} + {k1} alpha + {k2} beta = 0")]
    Dependent { k0: i64, k1: i64, k2: i64 },
    #[error("{0}")]
    Precondition(String),
    #[error("empty height trace")]
    EmptyTrace,
    #[error("resolution must lie in (0, 0.5), got {0}")]
    InvalidDelta(f64),
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("invalid substitution: {0}")]
    InvalidSubstitution(String),
    #[error("substitution does not grow the word")]
    NotExpanding,
    #[error("curve vertex {vertex} is off the plane by {residual:e}")]
    OffPlane { vertex: usize, residual: f64 },
    #[error("curve crosses no fundamental domain boundary")]
    DegenerateCurve,
    #[error("curve crosses {got} domains, {wanted} requested")]
    TooFewCrossings { wanted: usize, got: usize },
    #[error("{0}")]
    EmptyTranslates(String),
    #[error("window volume {0} exceeds the limit of 10^8")]
    WindowTooLarge(u128),
    #[error("window is empty")]
    EmptyWindow,
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("parse error: {0}")]
    Parse(String),
}
