use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use super::{PeriodicWeightedGraph, StableNormError};

/// A co-vector `c` with potential `psi` such that
/// `psi(v) - psi(u) + <c, s> <= w` on every edge, after the reported
/// rescaling. Every path from vertex 0 to its translate by `h` then has
/// length at least `<c, h>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub covector: Vec<f64>,
    pub potential: Vec<f64>,
    /// LP optimum before certification.
    pub raw_value: f64,
    /// Largest relative edge violation `lambda` of the LP solution; the
    /// co-vector and potential are divided by `1 + lambda`.
    pub violation: f64,
    /// Certified `<c, h>`; a lower bound for the stable norm of `h`.
    pub value: f64,
}

/// Maximizes `<c, h>` over calibrating pairs `(c, psi)` with `psi(0) = 0`.
/// The optimum is the stable norm of `h`.
pub fn calibrate(g: &PeriodicWeightedGraph, h: &[f64]) -> Result<Calibration, StableNormError> {
    let d = g.d();
    if h.len() != d {
        return Err(StableNormError::DimensionMismatch { expected: d, got: h.len() });
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let free = (f64::NEG_INFINITY, f64::INFINITY);
    let c: Vec<_> = (0..d).map(|j| lp.add_var(h[j], free)).collect();
    let psi: Vec<_> =
        (0..g.vertices().len()).map(|v| lp.add_var(0.0, if v == 0 { (0.0, 0.0) } else { free })).collect();
    for e in g.edges() {
        let mut terms = Vec::with_capacity(d + 2);
        if e.from != e.to {
            terms.push((psi[e.to], 1.0));
            terms.push((psi[e.from], -1.0));
        }
        for j in 0..d {
            if e.shift[j] != 0 {
                terms.push((c[j], e.shift[j] as f64));
            }
        }
        if terms.is_empty() {
            continue;
        }
        lp.add_constraint(&terms[..], ComparisonOp::Le, e.weight);
    }
    let sol = lp.solve().map_err(|err| StableNormError::Lp(err.to_string()))?;
    let covector: Vec<f64> = c.iter().map(|&v| sol[v]).collect();
    let potential: Vec<f64> = psi.iter().map(|&v| sol[v]).collect();
    let violation = g
        .edges()
        .iter()
        .map(|e| {
            let lhs = potential[e.to] - potential[e.from]
                + (0..d).map(|j| covector[j] * e.shift[j] as f64).sum::<f64>();
            (lhs - e.weight) / e.weight
        })
        .fold(0.0, f64::max);
    let scale = 1.0 / (1.0 + violation);
    let covector: Vec<f64> = covector.iter().map(|x| x * scale).collect();
    let potential = potential.iter().map(|x| x * scale).collect();
    let value = (0..d).map(|j| covector[j] * h[j]).sum();
    Ok(Calibration { covector, potential, raw_value: sol.objective(), violation, value })
}
