//! Engine dispatch: each engine turns its parameters into named output files,
//! a JSON summary and a list of pass/fail checks.

use std::fmt::Write as _;

use mather_core::convex::{detect_faces, legendre_transform, SampledConvexProfile, Tolerances};
use mather_core::fk::{
    alpha_from_beta, beta_profile, corner_gap, Fraction, GeneratingFunction, PROFILE_CONVEX_TOL,
};
use mather_core::stable_norm::{
    count_classes, flat_grid, hedlund_graph, section_polygon, stable_norm_with, unit_ball_section,
    PeriodicWeightedGraph, StableNormOptions,
};
use mather_core::torus::{
    all_words_sequence, avoid_interval_sequence, cantor_gaps, gap_analysis, heights, qc_build, qc_components,
    random_sequence, substitution_sequence, ComponentReport, IntegerBox, IntervalSet, IrrationalPair,
    LetterMap, QuasiCrystalWindow, StepSequence, Substitution,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    BetaFkParams, ConvexParams, EngineParams, ExperimentConfig, QcParams, SequenceKind, StableNormParams,
    TorusSeqParams,
};
use crate::RunError;

/// Tolerance of the convexity certificate on every emitted profile.
pub const CERTIFICATE_TOL: f64 = 1e-8;
/// Largest admissible `|min alpha + beta(0)|`.
pub const DUALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.to_string(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineOutput {
    pub files: Vec<OutputFile>,
    pub checks: Vec<Check>,
    pub summary: Value,
}

impl EngineOutput {
    fn new(summary: Value) -> Self {
        EngineOutput { files: Vec::new(), checks: Vec::new(), summary }
    }

    fn file(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.push(OutputFile { name: name.to_string(), bytes: bytes.into() });
    }

    fn json_file(&mut self, name: &str, value: &impl Serialize) {
        let mut text = serde_json::to_string_pretty(value).expect("engine records serialize");
        text.push('\n');
        self.file(name, text);
    }
}

pub fn execute(cfg: &ExperimentConfig) -> Result<EngineOutput, RunError> {
    let mut out = match &cfg.params {
        EngineParams::BetaFk(p) => beta_fk(cfg, p),
        EngineParams::StableNorm(p) => stable_norm(cfg, p),
        EngineParams::TorusSeq(p) => torus_seq(cfg, p),
        EngineParams::Qc(p) => qc(cfg, p),
        EngineParams::Convex(p) => convex(cfg, p),
    }?;
    let summary = std::mem::take(&mut out.summary);
    out.json_file("summary.json", &json!({ "summary": summary, "checks": out.checks }));
    out.summary = summary;
    Ok(out)
}

fn engine_error(cfg: &ExperimentConfig, key: &str, err: impl std::fmt::Display) -> RunError {
    RunError::Engine { path: cfg.label(), key: key.to_string(), message: err.to_string() }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn parse_fraction(s: &str) -> Option<Fraction> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    Fraction::new(p.trim().parse().ok()?, q.trim().parse().ok()?).ok()
}

fn beta_fk(cfg: &ExperimentConfig, p: &BetaFkParams) -> Result<EngineOutput, RunError> {
    let gf = match (p.k, &p.table) {
        (Some(k), _) => GeneratingFunction::standard(k),
        (None, Some(t)) => GeneratingFunction::table(t.clone()),
        (None, None) => unreachable!("validated"),
    }
    .map_err(|e| engine_error(cfg, if p.k.is_some() { "K" } else { "table" }, e))?;
    let seed = cfg.seed.expect("validated");
    let beta = beta_profile(&gf, p.q, p.restarts, seed).map_err(|e| engine_error(cfg, "Q", e))?;

    // The uniform grid covers every chord slope; the chord slopes themselves
    // are subgradients of the sampled hull, where alpha attains its minimum.
    let samples = beta.to_profile();
    let s = samples.samples();
    let slopes: Vec<f64> =
        s.windows(2).map(|w| (w[1].value - w[0].value) / (w[1].abscissa - w[0].abscissa)).collect();
    let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let mut grid = linspace(lo, hi, p.dual_points);
    grid.extend(&slopes);
    let alpha = alpha_from_beta(&beta, &grid).map_err(|e| engine_error(cfg, "dual_points", e))?;

    let beta0 = beta.get(Fraction { p: 0, q: 1 }).expect("0/1 is a Farey fraction");
    let min_alpha = alpha.min();
    let duality = (min_alpha.value + beta0).abs();
    let mut corners = serde_json::Map::new();
    for c in &p.corners {
        let f =
            parse_fraction(c).ok_or_else(|| cfg.invalid("corners", format!("{c:?} is not a reduced p/q")))?;
        let g = corner_gap(&beta, f).map_err(|e| engine_error(cfg, "corners", e))?;
        corners.insert(f.to_string(), json!(g));
    }

    let mut out = EngineOutput::new(json!({
        "potential": gf.describe(),
        "depth": p.q,
        "fractions": beta.entries.len(),
        "beta_at_zero": beta0,
        "min_alpha": min_alpha.value,
        "min_alpha_at": min_alpha.abscissa,
        "duality_gap": duality,
        "corner_gaps": corners,
    }));
    out.checks.push(Check::new(
        "beta_convex",
        samples.certify(PROFILE_CONVEX_TOL).is_ok(),
        format!("midpoint certificate at {PROFILE_CONVEX_TOL:e}"),
    ));
    out.checks.push(Check::new(
        "alpha_convex",
        alpha.certify(CERTIFICATE_TOL).is_ok(),
        format!("midpoint certificate at {CERTIFICATE_TOL:e}"),
    ));
    out.checks.push(Check::new(
        "duality",
        duality <= DUALITY_TOL,
        format!("|min alpha + beta(0)| = {duality:e}"),
    ));
    out.file("beta.profile", samples.to_text());
    out.file("alpha.profile", alpha.to_text());
    Ok(out)
}

fn load_graph(cfg: &ExperimentConfig, p: &StableNormParams) -> Result<PeriodicWeightedGraph, RunError> {
    if let Some(path) = &p.graph {
        let path = cfg.resolve_input(path);
        let file = std::fs::File::open(&path)
            .map_err(|e| engine_error(cfg, "graph", format!("{}: {e}", path.display())))?;
        return PeriodicWeightedGraph::read_from(std::io::BufReader::new(file))
            .map_err(|e| engine_error(cfg, "graph", e));
    }
    match p.model.as_deref() {
        Some("flat2") => flat_grid(2),
        Some("flat3") => flat_grid(3),
        Some("hedlund") => hedlund_graph(p.epsilon.unwrap_or(0.1)),
        other => {
            return Err(cfg
                .invalid("model", format!("unknown model {other:?}; use flat2, flat3 or hedlund"))
                .into())
        }
    }
    .map_err(|e| engine_error(cfg, "model", e))
}

fn stable_norm(cfg: &ExperimentConfig, p: &StableNormParams) -> Result<EngineOutput, RunError> {
    let g = load_graph(cfg, p)?;
    let opts = StableNormOptions { margin: p.margin, ..StableNormOptions::default() };
    let mut out = EngineOutput::new(Value::Null);
    let mut estimates = Vec::new();
    for h in &p.h {
        let est =
            stable_norm_with(&g, h, p.n.expect("validated"), &opts).map_err(|e| engine_error(cfg, "h", e))?;
        let ok = est.lower <= est.upper * (1.0 + 1e-12);
        out.checks.push(Check::new(
            "bounds_ordered",
            ok,
            format!("h = {h:?}: lower {} <= upper {}", est.lower, est.upper),
        ));
        estimates.push(est);
    }
    let mut summary = json!({ "graph_vertices": g.vertices().len(), "graph_edges": g.edges().len(), "estimates": estimates });
    if let Some([a, b]) = &p.section {
        let prof = unit_ball_section(&g, a, b, p.directions).map_err(|e| engine_error(cfg, "section", e))?;
        let tol = Tolerances::default();
        let faces = detect_faces(&prof, tol.face, tol.corner).map_err(|e| engine_error(cfg, "section", e))?;
        let poly = section_polygon(&prof, &faces);
        out.checks.push(Check::new(
            "section_convex",
            prof.certify(CERTIFICATE_TOL).is_ok(),
            format!("midpoint certificate at {CERTIFICATE_TOL:e}"),
        ));
        summary["section"] = json!({ "a": a, "b": b, "faces": faces, "polygon": poly });
        out.file("section.profile", prof.to_text());
    }
    if let Some(t) = p.count {
        let c = count_classes(&g, t).map_err(|e| engine_error(cfg, "count", e))?;
        summary["count"] = json!(c);
    }
    out.json_file("estimates.json", &estimates);
    out.summary = summary;
    Ok(out)
}

fn sequence(
    cfg: &ExperimentConfig,
    p: &TorusSeqParams,
    pair: &IrrationalPair,
) -> Result<StepSequence, RunError> {
    let letters = |default: LetterMap| -> Result<LetterMap, RunError> {
        p.letters.as_deref().map_or(Ok(default), |s| s.parse().map_err(|e| engine_error(cfg, "letters", e)))
    };
    Ok(match p.kind {
        SequenceKind::Avoid => {
            avoid_interval_sequence(pair, p.n).map_err(|e| engine_error(cfg, "alpha", e))?
        }
        SequenceKind::Random => {
            random_sequence(p.p_right.expect("validated"), p.n, cfg.seed.expect("validated"))
                .map_err(|e| engine_error(cfg, "p_right", e))?
        }
        SequenceKind::Fib => {
            let f = Substitution::fibonacci();
            substitution_sequence(&f, &[0], p.n, letters(LetterMap::ZeroUp)?)
                .map_err(|e| engine_error(cfg, "n", e))?
        }
        SequenceKind::Allwords => all_words_sequence(p.n, letters(LetterMap::ZeroRight)?),
    })
}

fn torus_seq(cfg: &ExperimentConfig, p: &TorusSeqParams) -> Result<EngineOutput, RunError> {
    let checked = p.check_independence.unwrap_or(p.kind != SequenceKind::Avoid);
    let pair = if checked {
        IrrationalPair::new(p.alpha, p.beta)
    } else {
        IrrationalPair::unchecked(p.alpha, p.beta)
    }
    .map_err(|e| engine_error(cfg, "alpha", e))?;
    // The avoiding construction is stated for the slopes as given.
    let pair = if p.kind == SequenceKind::Avoid { pair } else { pair.reduced() };
    let seq = sequence(cfg, p, &pair)?;
    let trace = heights(&seq, &pair);
    let report = gap_analysis(&trace, p.delta).map_err(|e| engine_error(cfg, "delta", e))?;
    let mut out = EngineOutput::new(json!({
        "alpha": pair.alpha,
        "beta": pair.beta,
        "independence_checked_to": pair.independence_checked_to,
        "steps": seq.len(),
        "coverage": report,
    }));
    if p.kind == SequenceKind::Avoid {
        let a = pair.alpha.min(pair.beta - pair.alpha);
        let inside = trace.values.iter().filter(|&&h| h > 0.0 && h < a).count();
        out.checks.push(Check::new("avoids_interval", inside == 0, format!("{inside} heights in ]0, {a}[")));
    }
    out.json_file("gaps.json", &report);
    if p.write_heights {
        let mut text = String::from("# index\tx\ty\theight\n");
        for (i, ((x, y), h)) in seq.positions().zip(&trace.values).enumerate() {
            writeln!(text, "{i}\t{x}\t{y}\t{h:.17e}").unwrap();
        }
        out.file("heights.tsv", text);
        out.file("steps.txt", seq.letters() + "\n");
    }
    Ok(out)
}

fn histogram(rep: &ComponentReport) -> Value {
    json!({
        "kept": rep.kept,
        "removed": rep.removed,
        "components": rep.components.len(),
        "spanning": rep.spanning(),
        "largest": rep.components.iter().map(|c| c.size).max().unwrap_or(0),
        "histogram": rep.histogram,
    })
}

fn qc_forbidden(cfg: &ExperimentConfig, p: &QcParams) -> Result<IntervalSet, RunError> {
    match (&p.k, p.cantor_gaps) {
        (Some(k), _) => IntervalSet::parse(k).map_err(|e| engine_error(cfg, "K", e)),
        (None, Some(m)) => Ok(cantor_gaps(m)),
        (None, None) => Ok(IntervalSet::empty()),
    }
}

fn qc(cfg: &ExperimentConfig, p: &QcParams) -> Result<EngineOutput, RunError> {
    let pair = IrrationalPair::new(p.alpha, p.beta).map_err(|e| engine_error(cfg, "alpha", e))?;
    let window = IntegerBox::columns(&pair, p.window).map_err(|e| engine_error(cfg, "window", e))?;
    let qcw: QuasiCrystalWindow = qc_build(&pair, window).map_err(|e| engine_error(cfg, "window", e))?;
    let k = qc_forbidden(cfg, p)?;
    let rep = qc_components(&qcw, &k);
    let counts = qcw.column_counts();
    let empty: Vec<[i64; 2]> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(i, _)| {
            let ny = (window.hi[1] - window.lo[1] + 1) as usize;
            [window.lo[0] + (i / ny) as i64, window.lo[1] + (i % ny) as i64]
        })
        .collect();
    let mut out = EngineOutput::new(json!({
        "alpha": pair.alpha,
        "beta": pair.beta,
        "window": window,
        "points": qcw.points.len(),
        "columns": counts.len(),
        "empty_columns": empty,
        "forbidden": k.intervals(),
        "components": histogram(&rep),
    }));
    out.checks.push(Check::new(
        "heights_in_slab",
        qcw.points.iter().all(|q| q.height > 0.0 && q.height < 1.0),
        "0 < height < 1 for every point",
    ));
    out.checks.push(Check::new(
        "at_most_one_per_column",
        counts.iter().all(|&c| c <= 1),
        format!("{} of {} columns empty", empty.len(), counts.len()),
    ));

    let mut lines = String::new();
    for c in &rep.components {
        lines.push_str(&serde_json::to_string(c).expect("components serialize"));
        lines.push('\n');
    }
    out.file("components.jsonl", lines);

    if let Some(top) = p.refine_to {
        let mut levels = Vec::new();
        let mut prev = qc_components(&qcw, &IntervalSet::empty());
        let mut m = 1;
        while m <= top {
            let cur = qc_components(&qcw, &cantor_gaps(m));
            let refines = cur.refines(&prev);
            let shrinks = cur.kept < prev.kept;
            out.checks.push(Check::new(
                "cantor_refinement",
                refines && shrinks,
                format!("m = {m}: refines previous {refines}, kept {} < {}", cur.kept, prev.kept),
            ));
            levels.push(json!({ "m": m, "stats": histogram(&cur) }));
            prev = cur;
            m = 2 * m + 1;
        }
        out.json_file("refinement.json", &levels);
    }

    if p.write_points {
        let mut text = String::from("# x\ty\tz\theight\tcomponent\n");
        for (q, label) in qcw.points.iter().zip(&rep.labels) {
            let label = label.map_or("-".to_string(), |l| l.to_string());
            writeln!(text, "{}\t{}\t{}\t{:.17e}\t{label}", q.x, q.y, q.z, q.height).unwrap();
        }
        out.file("points.tsv", text);
    }
    Ok(out)
}

fn convex(cfg: &ExperimentConfig, p: &ConvexParams) -> Result<EngineOutput, RunError> {
    let path = cfg.resolve_input(&p.profile);
    let file = std::fs::File::open(&path)
        .map_err(|e| engine_error(cfg, "profile", format!("{}: {e}", path.display())))?;
    let prof = SampledConvexProfile::read_from(std::io::BufReader::new(file))
        .map_err(|e| engine_error(cfg, "profile", e))?;
    let certified = prof.certify(CERTIFICATE_TOL);
    let mut out = EngineOutput::new(Value::Null);
    out.checks.push(Check::new(
        "profile_convex",
        certified.is_ok(),
        certified
            .as_ref()
            .err()
            .map_or(format!("midpoint certificate at {CERTIFICATE_TOL:e}"), |v| v.to_string()),
    ));
    let tol = Tolerances {
        convex: CERTIFICATE_TOL,
        face: p.face_tol,
        corner: p.corner_tol,
        ..Tolerances::default()
    };
    let faces =
        detect_faces(&prof, p.face_tol, p.corner_tol).map_err(|e| engine_error(cfg, "face_tol", e))?;
    let mut summary = json!({ "samples": prof.len(), "min": prof.min(), "faces": faces });
    if certified.is_ok() {
        let dual = legendre_transform(&prof, &linspace(p.dual_min, p.dual_max, p.dual_points), &tol)
            .map_err(|e| engine_error(cfg, "dual_min", e))?;
        summary["dual_min"] = json!(dual.min());
        out.file("dual.profile", dual.to_text());
    }
    out.json_file("faces.json", &faces);
    out.summary = summary;
    Ok(out)
}
