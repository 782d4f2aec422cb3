use serde::Serialize;

use super::{HeightTrace, TorusError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub n: usize,
    pub resolution: f64,
    /// Fraction of the range within `resolution` of a sample.
    pub covered_measure: f64,
    /// Longest stretch of the range holding no sample.
    pub largest_gap: f64,
    /// Where that stretch begins.
    pub gap_start: f64,
}

fn check_delta(delta: f64) -> Result<(), TorusError> {
    if delta > 0.0 && delta < 0.5 {
        Ok(())
    } else {
        Err(TorusError::InvalidDelta(delta))
    }
}

/// Circular coverage of `[0, 1)` by the trace values.
pub fn gap_analysis(trace: &HeightTrace, delta: f64) -> Result<CoverageReport, TorusError> {
    circle_coverage(&trace.values, delta)
}

pub fn circle_coverage(values: &[f64], delta: f64) -> Result<CoverageReport, TorusError> {
    check_delta(delta)?;
    if values.is_empty() {
        return Err(TorusError::EmptyTrace);
    }
    let mut v: Vec<f64> = values.iter().map(|x| x.rem_euclid(1.0)).collect();
    v.sort_unstable_by(f64::total_cmp);
    let (mut largest, mut start) = (1.0 - v[v.len() - 1] + v[0], v[v.len() - 1]);
    let mut covered = largest.min(2.0 * delta);
    for w in v.windows(2) {
        let gap = w[1] - w[0];
        covered += gap.min(2.0 * delta);
        if gap > largest {
            largest = gap;
            start = w[0];
        }
    }
    Ok(CoverageReport {
        n: values.len(),
        resolution: delta,
        covered_measure: covered.min(1.0),
        largest_gap: largest,
        gap_start: start,
    })
}

/// Coverage of `[lo, hi]` by the values, which need not be sorted and may
/// fall outside the range. The measure is normalized by `hi - lo`, and the
/// largest gap counts the stretches from each end to the nearest sample.
pub fn interval_coverage(values: &[f64], lo: f64, hi: f64, delta: f64) -> CoverageReport {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_unstable_by(f64::total_cmp);
    // Sweep the union of delta-balls; left ends arrive in order.
    let (mut covered, mut reach) = (0.0, lo);
    for &x in &v {
        let a = (x - delta).max(reach);
        let b = (x + delta).min(hi);
        if b > a {
            covered += b - a;
            reach = b;
        }
    }
    let inside: Vec<f64> = v.into_iter().filter(|&x| lo <= x && x <= hi).collect();
    let mut marks = Vec::with_capacity(inside.len() + 2);
    marks.push(lo);
    marks.extend_from_slice(&inside);
    marks.push(hi);
    let (mut largest, mut gap_start) = (0.0, lo);
    for w in marks.windows(2) {
        if w[1] - w[0] > largest {
            largest = w[1] - w[0];
            gap_start = w[0];
        }
    }
    let width = hi - lo;
    CoverageReport {
        n: inside.len(),
        resolution: delta,
        covered_measure: if width > 0.0 { (covered / width).min(1.0) } else { 1.0 },
        largest_gap: largest,
        gap_start,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_points() {
        let r = circle_coverage(&[0.0, 0.25, 0.5, 0.75], 0.01).unwrap();
        assert!((r.largest_gap - 0.25).abs() < 1e-15);
        assert!((r.covered_measure - 0.08).abs() < 1e-15);
        assert!(r.covered_measure + r.largest_gap <= 1.0 + 0.02);
    }

    #[test]
    fn wrap_gap_is_found() {
        let r = circle_coverage(&[0.2, 0.3, 0.9], 0.01).unwrap();
        assert!((r.largest_gap - 0.6).abs() < 1e-15);
        assert_eq!(r.gap_start, 0.3);
        let r = circle_coverage(&[0.45, 0.55], 0.01).unwrap();
        assert!((r.largest_gap - 0.9).abs() < 1e-15);
        assert_eq!(r.gap_start, 0.55);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(circle_coverage(&[], 0.1), Err(TorusError::EmptyTrace)));
        assert!(matches!(circle_coverage(&[0.1], 0.5), Err(TorusError::InvalidDelta(_))));
    }

    #[test]
    fn interval_coverage_counts_ends() {
        let r = interval_coverage(&[-1.0, 0.5, 3.0], 0.0, 1.0, 0.1);
        assert!((r.largest_gap - 0.5).abs() < 1e-15);
        assert!((r.covered_measure - 0.2).abs() < 1e-12, "{r:?}");
        let r = interval_coverage(&[0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95], 0.0, 1.0, 0.1);
        assert!((r.covered_measure - 1.0).abs() < 1e-12, "{r:?}");
        let r = interval_coverage(&[-0.05, 1.05], 0.0, 1.0, 0.1);
        assert!((r.covered_measure - 0.1).abs() < 1e-12, "{r:?}");
        assert_eq!(r.n, 0);
    }
}
