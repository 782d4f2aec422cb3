use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::engines::{execute, Check};
use crate::RunError;

/// Environment variable that replaces the output root.
pub const OUT_ENV: &str = "MATHER_LAB_OUT";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub output_dir: PathBuf,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputRecord>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl RunManifest {
    /// `(name, sha256)` of every output; equal for reruns of deterministic engines.
    pub fn hashes(&self) -> Vec<(String, String)> {
        self.outputs.iter().map(|o| (o.name.clone(), o.sha256.clone())).collect()
    }
}

/// Output root from the environment, else the working directory.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

/// Relative output paths resolve against `root`.
pub fn output_dir(cfg: &ExperimentConfig, root: &Path) -> PathBuf {
    if cfg.output.is_absolute() {
        cfg.output.clone()
    } else {
        root.join(&cfg.output)
    }
}

fn sibling(path: &Path, tag: &str) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    path.with_file_name(format!(".{name}.{tag}-{}", std::process::id()))
}

fn io_error(path: &Path, e: std::io::Error) -> RunError {
    RunError::Io { path: path.to_path_buf(), source: e }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    let tmp = sibling(path, "partial");
    let mut f = fs::File::create(&tmp).map_err(|e| io_error(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| io_error(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest, RunError> {
    run_in(cfg, &output_root())
}

/// Runs the engine, stages every output and the manifest in a sibling
/// directory, then swaps it into place. A failed run leaves the declared
/// output path as it was.
pub fn run_in(cfg: &ExperimentConfig, root: &Path) -> Result<RunManifest, RunError> {
    let dir = output_dir(cfg, root);
    let start = Instant::now();
    let out = execute(cfg)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let stage = sibling(&dir, "partial");
    if stage.exists() {
        fs::remove_dir_all(&stage).map_err(|e| io_error(&stage, e))?;
    }
    fs::create_dir_all(&stage).map_err(|e| io_error(&stage, e))?;
    let mut outputs = Vec::with_capacity(out.files.len());
    for f in &out.files {
        let path = stage.join(&f.name);
        fs::write(&path, &f.bytes).map_err(|e| io_error(&path, e))?;
        outputs.push(OutputRecord {
            name: f.name.clone(),
            bytes: f.bytes.len() as u64,
            sha256: sha256_hex(&f.bytes),
        });
    }
    let manifest = RunManifest {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        output_dir: dir.clone(),
        wall_time_s,
        outputs,
        passed: out.checks.iter().all(|c| c.pass),
        checks: out.checks,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let path = stage.join("manifest.json");
    fs::write(&path, text).map_err(|e| io_error(&path, e))?;

    let old = sibling(&dir, "old");
    if dir.exists() {
        fs::rename(&dir, &old).map_err(|e| io_error(&dir, e))?;
    }
    fs::rename(&stage, &dir).map_err(|e| io_error(&dir, e))?;
    if old.exists() {
        fs::remove_dir_all(&old).map_err(|e| io_error(&old, e))?;
    }
    Ok(manifest)
}

pub fn sweep(cfgs: &[ExperimentConfig], jobs: usize) -> Result<Vec<Result<RunManifest, RunError>>, RunError> {
    sweep_in(cfgs, jobs, &output_root())
}

/// Runs every config on a pool of `jobs` threads. Results keep the input
/// order, and a failing entry does not stop the others.
pub fn sweep_in(
    cfgs: &[ExperimentConfig],
    jobs: usize,
    root: &Path,
) -> Result<Vec<Result<RunManifest, RunError>>, RunError> {
    let mut seen = HashSet::new();
    for cfg in cfgs {
        let dir = output_dir(cfg, root);
        if !seen.insert(dir.clone()) {
            return Err(RunError::DuplicateOutput(dir));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    Ok(pool.install(|| cfgs.par_iter().map(|cfg| run_in(cfg, root)).collect()))
}

/// Configs `*.toml` in `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<ExperimentConfig>, RunError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_error(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths.iter().map(|p| ExperimentConfig::load(p).map_err(RunError::from)).collect()
}
