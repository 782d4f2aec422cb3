use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: key `{key}`: {message}")]
    Invalid { path: PathBuf, key: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    BetaFk,
    StableNorm,
    TorusSeq,
    Qc,
    Convex,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::BetaFk => "beta-fk",
            Engine::StableNorm => "stable-norm",
            Engine::TorusSeq => "torus-seq",
            Engine::Qc => "qc",
            Engine::Convex => "convex",
        })
    }
}

fn default_restarts() -> usize {
    4
}

fn default_dual_points() -> usize {
    601
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaFkParams {
    /// Coupling of the standard potential; exclusive with `table`.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Potential values on an equally spaced grid of one period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Size of the uniform part of the grid on which alpha is evaluated.
    #[serde(default = "default_dual_points")]
    pub dual_points: usize,
    /// Fractions `"p/q"` at which corner gaps are reported.
    #[serde(default)]
    pub corners: Vec<String>,
}

fn default_margin() -> i64 {
    3
}

fn default_directions() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableNormParams {
    /// A `pgraph` file, relative to the config file; exclusive with `model`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
    /// `flat2`, `flat3` or `hedlund`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Classes to evaluate.
    #[serde(default)]
    pub h: Vec<Vec<i64>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default = "default_margin")]
    pub margin: i64,
    /// Plane `(a, b)` of a unit-ball section.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<[Vec<i64>; 2]>,
    #[serde(default = "default_directions")]
    pub directions: usize,
    /// Radius `T` for lattice counting; planar graphs only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Avoid,
    Random,
    Fib,
    Allwords,
}

fn default_delta() -> f64 {
    1e-3
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSeqParams {
    pub kind: SequenceKind,
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    /// Probability of a right step for `random`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_right: Option<f64>,
    /// `zero-right` or `zero-up`; defaults to `zero-up` for `fib` and
    /// `zero-right` for `allwords`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub letters: Option<String>,
    /// Resolution of the gap report.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Reject pairs with a small integer relation. Defaults to false for
    /// `avoid`, whose construction only uses the order of the slopes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_independence: Option<bool>,
    /// Write the full height column.
    #[serde(default = "default_true")]
    pub write_heights: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QcParams {
    pub alpha: f64,
    pub beta: f64,
    /// Columns `[0, window]^2`.
    pub window: i64,
    /// Forbid the `m` largest Cantor gaps; exclusive with `K`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cantor_gaps: Option<usize>,
    /// Forbidden heights as `"a,b;c,d"`.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<String>,
    /// Also run every Cantor level `1, 3, ..., 2^j - 1` up to this `m` and
    /// check that each refines the previous one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_to: Option<usize>,
    #[serde(default)]
    pub write_points: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexParams {
    /// A profile file, relative to the config file.
    pub profile: PathBuf,
    pub dual_min: f64,
    pub dual_max: f64,
    #[serde(default = "default_dual_points")]
    pub dual_points: usize,
    #[serde(default = "default_face_tol")]
    pub face_tol: f64,
    #[serde(default = "default_corner_tol")]
    pub corner_tol: f64,
}

fn default_face_tol() -> f64 {
    1e-7
}

fn default_corner_tol() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineParams {
    BetaFk(BetaFkParams),
    StableNorm(StableNormParams),
    TorusSeq(TorusSeqParams),
    Qc(QcParams),
    Convex(ConvexParams),
}

impl EngineParams {
    pub fn engine(&self) -> Engine {
        match self {
            EngineParams::BetaFk(_) => Engine::BetaFk,
            EngineParams::StableNorm(_) => Engine::StableNorm,
            EngineParams::TorusSeq(_) => Engine::TorusSeq,
            EngineParams::Qc(_) => Engine::Qc,
            EngineParams::Convex(_) => Engine::Convex,
        }
    }

    fn uses_seed(&self) -> bool {
        match self {
            EngineParams::BetaFk(_) => true,
            EngineParams::TorusSeq(p) => p.kind == SequenceKind::Random,
            _ => false,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    output: PathBuf,
    #[serde(rename = "beta-fk")]
    beta_fk: Option<BetaFkParams>,
    #[serde(rename = "stable-norm")]
    stable_norm: Option<StableNormParams>,
    #[serde(rename = "torus-seq")]
    torus_seq: Option<TorusSeqParams>,
    qc: Option<QcParams>,
    convex: Option<ConvexParams>,
}

/// One experiment: a seed, an output directory and one engine section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub output: PathBuf,
    pub params: EngineParams,
    /// File the config came from; relative inputs resolve against its directory.
    #[serde(skip)]
    pub source: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(
        params: EngineParams,
        seed: Option<u64>,
        output: impl Into<PathBuf>,
    ) -> Result<Self, ConfigError> {
        let cfg = ExperimentConfig { seed, output: output.into(), params, source: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str, path: impl Into<PathBuf>) -> Result<Self, ConfigError> {
        let path = path.into();
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| ConfigError::Parse { path: path.clone(), message: e.to_string() })?;
        let mut sections: Vec<EngineParams> = Vec::new();
        sections.extend(raw.beta_fk.map(EngineParams::BetaFk));
        sections.extend(raw.stable_norm.map(EngineParams::StableNorm));
        sections.extend(raw.torus_seq.map(EngineParams::TorusSeq));
        sections.extend(raw.qc.map(EngineParams::Qc));
        sections.extend(raw.convex.map(EngineParams::Convex));
        if sections.len() != 1 {
            return Err(ConfigError::Parse {
                path,
                message: format!("expected exactly one engine section, found {}", sections.len()),
            });
        }
        let cfg = ExperimentConfig {
            seed: raw.seed,
            output: raw.output,
            params: sections.pop().unwrap(),
            source: Some(path),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text, path)
    }

    pub fn engine(&self) -> Engine {
        self.params.engine()
    }

    /// Path used in error messages.
    pub fn label(&self) -> PathBuf {
        self.source.clone().unwrap_or_else(|| PathBuf::from(format!("<{}>", self.engine())))
    }

    pub fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid { path: self.label(), key: key.to_string(), message: message.into() }
    }

    /// Resolves a path from the config against the config file's directory.
    pub fn resolve_input(&self, p: &Path) -> PathBuf {
        match self.source.as_ref().and_then(|s| s.parent()) {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.params.uses_seed() && self.seed.is_none() {
            return Err(self.invalid("seed", format!("the {} engine needs a seed", self.engine())));
        }
        if self.output.as_os_str().is_empty() {
            return Err(self.invalid("output", "must not be empty"));
        }
        match &self.params {
            EngineParams::BetaFk(p) => {
                if p.k.is_some() == p.table.is_some() {
                    return Err(self.invalid("K", "give exactly one of `K` and `table`"));
                }
                if p.dual_points < 2 {
                    return Err(self.invalid("dual_points", "need at least 2"));
                }
            }
            EngineParams::StableNorm(p) => {
                if p.graph.is_some() == p.model.is_some() {
                    return Err(self.invalid("graph", "give exactly one of `graph` and `model`"));
                }
                if !p.h.is_empty() && p.n.is_none() {
                    return Err(self.invalid("N", "required when `h` is given"));
                }
                if p.h.is_empty() && p.section.is_none() && p.count.is_none() {
                    return Err(self.invalid("h", "nothing to compute: give `h`, `section` or `count`"));
                }
            }
            EngineParams::TorusSeq(p) => {
                if p.kind == SequenceKind::Random && p.p_right.is_none() {
                    return Err(self.invalid("p_right", "required for random sequences"));
                }
            }
            EngineParams::Qc(p) => {
                if p.cantor_gaps.is_some() && p.k.is_some() {
                    return Err(self.invalid("K", "give at most one of `K` and `cantor_gaps`"));
                }
            }
            EngineParams::Convex(p) => {
                if !(p.dual_min < p.dual_max) || p.dual_points < 2 {
                    return Err(self.invalid("dual_min", "need dual_min < dual_max and dual_points >= 2"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_one_engine() {
        let cfg = ExperimentConfig::from_toml(
            "seed = 3\noutput = \"out/fk\"\n[beta-fk]\nK = 0.5\nQ = 6\n",
            "x.toml",
        )
        .unwrap();
        assert_eq!(cfg.engine(), Engine::BetaFk);
        let EngineParams::BetaFk(p) = &cfg.params else { panic!() };
        assert_eq!((p.k, p.q, p.restarts), (Some(0.5), 6, 4));
    }

    #[test]
    fn rejects_unknown_keys_and_missing_seed() {
        let err = ExperimentConfig::from_toml(
            "output = \"o\"\n[qc]\nalpha = 0.4\nbeta = 0.7\nwindow = 3\nspeed = 1\n",
            "q.toml",
        )
        .unwrap_err();
        assert!(err.to_string().contains("speed"), "{err}");
        let err = ExperimentConfig::from_toml(
            "output = \"o\"\ncolour = 1\n[qc]\nalpha = 0.4\nbeta = 0.7\nwindow = 3\n",
            "q.toml",
        )
        .unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        let err =
            ExperimentConfig::from_toml("output = \"o\"\n[beta-fk]\nK = 0\nQ = 4\n", "b.toml").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref key, .. } if key == "seed"), "{err}");
        let err = ExperimentConfig::from_toml(
            "output = \"o\"\n[qc]\nalpha = 0.4\nbeta = 0.7\nwindow = 3\n[convex]\nprofile = \"p\"\ndual_min = 0\ndual_max = 1\n",
            "two.toml",
        )
        .unwrap_err();
        assert!(err.to_string().contains("exactly one"), "{err}");
    }
}
