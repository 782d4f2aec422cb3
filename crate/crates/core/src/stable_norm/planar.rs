use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::{calibrate, PeriodicWeightedGraph, StableNormError};
use crate::convex::{FaceDescriptor, FaceKind, SampledConvexProfile};

/// Largest predicted lattice count `count_classes` will enumerate.
pub const MAX_COUNT: f64 = 1e7;
const MAX_FUNCTIONALS: usize = 4096;
const SAME: f64 = 1e-9;

/// The stable norm restricted to the plane spanned by two integer vectors,
/// stored as the finitely many linear functionals whose maximum it is.
/// Coordinates `(x, y)` stand for `x a + y b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarNorm {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    /// Sorted by angle.
    pub functionals: Vec<[f64; 2]>,
}

fn cross(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

fn dot(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

fn close(u: [f64; 2], v: [f64; 2]) -> bool {
    let scale = u[0].abs().max(u[1].abs()).max(v[0].abs()).max(v[1].abs()).max(1e-300);
    (u[0] - v[0]).abs().max((u[1] - v[1]).abs()) <= SAME * scale
}

impl PlanarNorm {
    /// Explores the dual polygon: each LP solve at a direction yields a
    /// supporting functional, and the corner where two adjacent functionals
    /// meet is either on the unit sphere or exposes a new one.
    pub fn new(g: &PeriodicWeightedGraph, a: &[i64], b: &[i64]) -> Result<Self, StableNormError> {
        let d = g.d();
        for v in [a, b] {
            if v.len() != d {
                return Err(StableNormError::DimensionMismatch { expected: d, got: v.len() });
            }
        }
        let independent = (0..d).any(|i| (0..d).any(|j| a[i] * b[j] != a[j] * b[i]));
        if !independent {
            return Err(StableNormError::DependentPlane);
        }
        let support = |u: [f64; 2]| -> Result<[f64; 2], StableNormError> {
            let h: Vec<f64> = (0..d).map(|j| u[0] * a[j] as f64 + u[1] * b[j] as f64).collect();
            let c = calibrate(g, &h)?.covector;
            let proj = |v: &[i64]| (0..d).map(|j| c[j] * v[j] as f64).sum::<f64>();
            Ok([proj(a), proj(b)])
        };

        let mut ring: Vec<([f64; 2], [f64; 2])> = Vec::new();
        for u in [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]] {
            ring.push((u, support(u)?));
        }
        // Settle adjacent pairs left to right; an insertion is revisited next.
        let mut i = 0;
        while i < ring.len() {
            if ring.len() > MAX_FUNCTIONALS {
                return Err(StableNormError::Lp("unit ball has too many sides".into()));
            }
            let (u1, g1) = ring[i];
            let (u2, g2) = ring[(i + 1) % ring.len()];
            if close(g1, g2) {
                i += 1;
                continue;
            }
            let det = cross(g1, g2);
            let probe = if det.abs() > 1e-14 * dot(g1, g1).max(dot(g2, g2)) {
                // Corner of the two half planes g.x <= 1.
                [(g2[1] - g1[1]) / det, (g1[0] - g2[0]) / det]
            } else {
                [u1[0] + u2[0], u1[1] + u2[1]]
            };
            if cross(u1, probe) <= 0.0 || cross(probe, u2) <= 0.0 {
                // Numerically degenerate corner; accept the pair as adjacent.
                i += 1;
                continue;
            }
            let gk = support(probe)?;
            let level = dot(g1, probe).max(dot(g2, probe));
            if dot(gk, probe) <= level * (1.0 + SAME) {
                i += 1;
            } else {
                ring.insert(i + 1, (probe, gk));
            }
        }
        let mut functionals: Vec<[f64; 2]> = Vec::new();
        for (_, f) in ring {
            if !functionals.iter().any(|&g| close(g, f)) {
                functionals.push(f);
            }
        }
        functionals.sort_by(|u, v| u[1].atan2(u[0]).total_cmp(&v[1].atan2(v[0])));
        Ok(PlanarNorm { a: a.to_vec(), b: b.to_vec(), functionals })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.functionals.iter().map(|f| f[0] * x + f[1] * y).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Corners of the unit ball, counter-clockwise.
    pub fn unit_ball_vertices(&self) -> Vec<[f64; 2]> {
        let n = self.functionals.len();
        (0..n)
            .map(|i| {
                let (g1, g2) = (self.functionals[i], self.functionals[(i + 1) % n]);
                let det = cross(g1, g2);
                [(g2[1] - g1[1]) / det, (g1[0] - g2[0]) / det]
            })
            .collect()
    }

    pub fn unit_ball_area(&self) -> f64 {
        let v = self.unit_ball_vertices();
        (0..v.len()).map(|i| cross(v[i], v[(i + 1) % v.len()])).sum::<f64>() / 2.0
    }
}

/// Point of the plane at chart parameter `t`: `((1 - t) a + (1 + t) b) / 2`.
pub fn chart_point(t: f64) -> [f64; 2] {
    [(1.0 - t) / 2.0, (1.0 + t) / 2.0]
}

/// Chart parameter of the line through the origin and `p`, if `p` or `-p`
/// lies on the chart side.
fn chart_parameter(p: [f64; 2]) -> Option<f64> {
    let s = p[0] + p[1];
    if s.abs() <= 1e-12 * (p[0].abs() + p[1].abs()) {
        return None;
    }
    Some((p[1] - p[0]) / s)
}

/// Restriction of the norm to the affine line through `a` and `b`, sampled at
/// `t = tan(phi)` for `directions` equally spaced angles in `(-pi/2, pi/2)`
/// plus `t = -1, 0, 1`. The line meets every ray of the plane except the two
/// parallel to `b - a`, and the restricted norm is convex in `t`, so faces of
/// this profile are faces of the unit-ball section.
pub fn unit_ball_section(
    g: &PeriodicWeightedGraph,
    a: &[i64],
    b: &[i64],
    directions: usize,
) -> Result<SampledConvexProfile, StableNormError> {
    let norm = PlanarNorm::new(g, a, b)?;
    section_profile(&norm, directions)
}

pub fn section_profile(
    norm: &PlanarNorm,
    directions: usize,
) -> Result<SampledConvexProfile, StableNormError> {
    if directions == 0 {
        return Err(StableNormError::InvalidDirections);
    }
    let mut ts: Vec<f64> = (0..directions)
        .map(|k| (-PI / 2.0 + PI * (k + 1) as f64 / (directions + 1) as f64).tan())
        .chain([-1.0, 0.0, 1.0])
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
    let prov = format!("stable-norm section a={:?} b={:?}", norm.a, norm.b);
    Ok(SampledConvexProfile::from_fn(
        &ts,
        |t| {
            let p = chart_point(t);
            norm.eval(p[0], p[1])
        },
        prov,
    )?)
}

/// Unit-ball polygon recovered from a section chart and its detected faces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionPolygon {
    /// Unit vectors in `(a, b)` coordinates, counter-clockwise.
    pub vertices: Vec<[f64; 2]>,
    /// Sides between consecutive vertices that lie on a detected segment.
    pub facets: usize,
}

/// Chart vertices become unit-sphere points and their antipodes, which
/// assumes a symmetric norm. A side counts as a facet when sample points along it fall
/// inside detected segments of the chart.
pub fn section_polygon(profile: &SampledConvexProfile, faces: &[FaceDescriptor]) -> SectionPolygon {
    let s = profile.samples();
    let mut vertices: Vec<[f64; 2]> = Vec::new();
    for f in faces.iter().filter(|f| f.kind == FaceKind::Vertex) {
        let (t, value) = (s[f.first].abscissa, s[f.first].value);
        let p = chart_point(t);
        for sign in [1.0, -1.0] {
            let v = [sign * p[0] / value, sign * p[1] / value];
            if !vertices.iter().any(|&w| close(v, w)) {
                vertices.push(v);
            }
        }
    }
    vertices.sort_by(|u, v| u[1].atan2(u[0]).total_cmp(&v[1].atan2(v[0])));
    let (t_lo, t_hi) = (s[0].abscissa, s[s.len() - 1].abscissa);
    let in_segment = |t: f64| {
        faces
            .iter()
            .any(|f| f.kind == FaceKind::Segment && s[f.first].abscissa <= t && t <= s[f.last].abscissa)
    };
    let n = vertices.len();
    let facets = if n < 2 {
        0
    } else {
        (0..n)
            .filter(|&i| {
                let (u, v) = (vertices[i], vertices[(i + 1) % n]);
                let ts: Vec<f64> = [0.25, 0.5, 0.75]
                    .iter()
                    .filter_map(|&w| chart_parameter([u[0] + w * (v[0] - u[0]), u[1] + w * (v[1] - u[1])]))
                    .filter(|&t| t_lo <= t && t <= t_hi)
                    .collect();
                !ts.is_empty() && ts.iter().all(|&t| in_segment(t))
            })
            .count()
    };
    SectionPolygon { vertices, facets }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeCount {
    pub t: f64,
    pub count: u64,
    /// `count / T^2`.
    pub ratio: f64,
    /// Area of the unit ball, the limit of the ratio.
    pub area: f64,
}

/// Number of `h` in Z^2 with `||h|| <= T`. Each row `h_1` is cut by every
/// functional to an interval of `h_2`; values within a relative `1e-9` of
/// `T` count as inside.
pub fn count_classes(g: &PeriodicWeightedGraph, t: f64) -> Result<LatticeCount, StableNormError> {
    if g.d() != 2 {
        return Err(StableNormError::NotPlanar(g.d()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(StableNormError::InvalidRadius(t));
    }
    let norm = PlanarNorm::new(g, &[1, 0], &[0, 1])?;
    let area = norm.unit_ball_area();
    let predicted = area * t * t;
    if predicted > MAX_COUNT {
        return Err(StableNormError::CountTooLarge(predicted));
    }
    let verts = norm.unit_ball_vertices();
    let reach = verts.iter().map(|v| v[0].abs()).fold(0.0, f64::max);
    let tt = t * (1.0 + SAME);
    let x_max = (reach * tt).floor() as i64;
    let row = |x: i64| -> u64 {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for f in &norm.functionals {
            let rest = tt - f[0] * x as f64;
            if f[1].abs() <= 1e-15 {
                if rest < 0.0 {
                    return 0;
                }
            } else if f[1] > 0.0 {
                hi = hi.min(rest / f[1]);
            } else {
                lo = lo.max(rest / f[1]);
            }
        }
        let (lo, hi) = (lo.ceil(), hi.floor());
        if hi >= lo {
            (hi - lo) as u64 + 1
        } else {
            0
        }
    };
    let count: u64 = (-x_max..=x_max).into_par_iter().map(row).sum();
    Ok(LatticeCount { t, count, ratio: count as f64 / (t * t), area })
}
