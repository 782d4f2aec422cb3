//! Experiment runner: TOML configs, one engine per run, manifests with
//! content hashes, and ordered parallel sweeps.

pub mod config;
pub mod engines;
pub mod runner;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{ConfigError, Engine, EngineParams, ExperimentConfig};
pub use engines::{execute, Check, EngineOutput, OutputFile};
pub use runner::{
    load_dir, output_dir, run, run_in, sha256_hex, sweep, sweep_in, write_atomic, RunManifest, OUT_ENV,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: key `{key}`: {message}")]
    Engine { path: PathBuf, key: String, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("two configs write to {0}")]
    DuplicateOutput(PathBuf),
    #[error("cannot build thread pool: {0}")]
    Pool(String),
}
