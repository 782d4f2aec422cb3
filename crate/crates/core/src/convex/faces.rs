use serde::Serialize;

use super::{ConvexError, SampledConvexProfile};

/// A vertex must carry this many times the curvature density of either
/// neighbouring sample. Smooth profiles have comparable densities everywhere.
const VERTEX_SHARPNESS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceKind {
    Vertex,
    Segment,
    Radial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceDescriptor {
    pub kind: FaceKind,
    /// Inclusive sample index range. A vertex has `first == last`.
    pub first: usize,
    pub last: usize,
    /// One-sided slopes; both equal the fitted slope for segments.
    pub slopes: (f64, f64),
}

impl FaceDescriptor {
    pub fn contains_interior(&self, i: usize) -> bool {
        self.first < i && i < self.last
    }
}

fn chord_slope(p: &SampledConvexProfile, a: usize, b: usize) -> f64 {
    let s = p.samples();
    (s[b].value - s[a].value) / (s[b].abscissa - s[a].abscissa)
}

fn is_affine(p: &SampledConvexProfile, a: usize, b: usize, tol: f64) -> bool {
    let s = p.samples();
    let m = chord_slope(p, a, b);
    s[a + 1..b].iter().all(|q| (q.value - (s[a].value + m * (q.abscissa - s[a].abscissa))).abs() <= tol)
}

/// Affine runs of at least three samples (segments) and isolated slope jumps
/// (vertices), ordered by their first sample.
///
/// Segments are grown greedily from the left and share their end samples. A
/// vertex is an interior sample whose slope jump exceeds `tol_corner`, whose
/// jump per unit length dominates both neighbours, and which is not interior
/// to a segment.
pub fn detect_faces(
    profile: &SampledConvexProfile,
    tol_face: f64,
    tol_corner: f64,
) -> Result<Vec<FaceDescriptor>, ConvexError> {
    let n = profile.len();
    if n < 3 {
        return Err(ConvexError::TooFewSamples(n));
    }
    let mut faces = Vec::new();

    let mut i = 0;
    while i + 1 < n {
        let mut j = i + 1;
        while j + 1 < n && is_affine(profile, i, j + 1, tol_face) {
            j += 1;
        }
        if j - i >= 2 {
            let m = chord_slope(profile, i, j);
            faces.push(FaceDescriptor { kind: FaceKind::Segment, first: i, last: j, slopes: (m, m) });
        }
        i = j;
    }

    let s = profile.samples();
    let jump = |i: usize| chord_slope(profile, i, i + 1) - chord_slope(profile, i - 1, i);
    let density = |i: usize| {
        if i == 0 || i + 1 == n {
            0.0
        } else {
            jump(i) / ((s[i + 1].abscissa - s[i - 1].abscissa) / 2.0)
        }
    };
    let mut vertices = Vec::new();
    for i in 1..n - 1 {
        if jump(i) <= tol_corner || faces.iter().any(|f| f.contains_interior(i)) {
            continue;
        }
        let d = density(i);
        if d > VERTEX_SHARPNESS * density(i - 1).max(density(i + 1)) {
            vertices.push(FaceDescriptor {
                kind: FaceKind::Vertex,
                first: i,
                last: i,
                slopes: (chord_slope(profile, i - 1, i), chord_slope(profile, i, i + 1)),
            });
        }
    }
    faces.extend(vertices);
    faces.sort_by_key(|f| (f.first, f.last));
    Ok(faces)
}

/// The maximal affine run of `t -> beta(t h)` through the sample at `t = 1`,
/// given that restriction sampled as `ray`.
pub fn radial_face(ray: &SampledConvexProfile, tol_face: f64) -> Result<Option<FaceDescriptor>, ConvexError> {
    let at = ray.index_of(1.0).ok_or(ConvexError::NotInterior(1.0))?;
    let faces = detect_faces(ray, tol_face, f64::INFINITY)?;
    Ok(faces
        .into_iter()
        .find(|f| f.kind == FaceKind::Segment && f.first <= at && at <= f.last)
        .map(|f| FaceDescriptor { kind: FaceKind::Radial, ..f }))
}
