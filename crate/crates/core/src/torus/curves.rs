use serde::Serialize;

use super::{interval_coverage, CoverageReport, IrrationalPair, TorusError};

/// Vertex tolerance for membership in the plane `z = alpha x + beta y`.
pub const PLANE_TOL: f64 = 1e-9;

/// Height `l(Z) = z - alpha x - beta y` of a lattice point.
fn lattice_height(pair: &IrrationalPair, z: [i64; 3]) -> f64 {
    (-pair.alpha).mul_add(z[0] as f64, (-pair.beta).mul_add(z[1] as f64, z[2] as f64))
}

/// Straight polyline from the origin along `(a, b, alpha a + beta b)` for
/// parameter length `t`.
pub fn plane_line(pair: &IrrationalPair, a: f64, b: f64, t: f64) -> Vec<[f64; 3]> {
    vec![[0.0; 3], [a * t, b * t, (pair.alpha * a + pair.beta * b) * t]]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    /// Fundamental domains crossed, in order, by exact traversal.
    pub crossings: usize,
    /// Curve points sampled for the other side.
    pub samples: usize,
    pub traversal_heights: usize,
    pub sampled_heights: usize,
    /// Largest distance from a traversal height to the sampled set.
    pub traversal_to_sampled: f64,
    /// Largest distance from a sampled height to the traversal set.
    pub sampled_to_traversal: f64,
    pub hausdorff: f64,
    pub pass: bool,
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_unstable_by(f64::total_cmp);
    v.dedup();
    v
}

/// `max over a of min over b |a - b|`, for sorted inputs.
fn directed(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    let mut j = 0;
    let mut worst: f64 = 0.0;
    for &x in a {
        while j + 1 < b.len() && b[j + 1] <= x {
            j += 1;
        }
        let mut d = (x - b[j]).abs();
        if j + 1 < b.len() {
            d = d.min((b[j + 1] - x).abs());
        }
        worst = worst.max(d);
    }
    worst
}

/// Symmetric Hausdorff distance between two finite sets of reals.
pub fn hausdorff_distance(a: &[f64], b: &[f64]) -> f64 {
    let a = sorted_unique(a.to_vec());
    let b = sorted_unique(b.to_vec());
    directed(&a, &b).max(directed(&b, &a))
}

/// Cells in which a segment spends positive length, in order, by the voxel
/// walk of Amanatides and Woo. `visit` receives each cell with its entry
/// parameter in `[0, 1]`. Cells touched only at a point, as at exact ties
/// between axes or a start on a face, are skipped.
fn traverse(p: [f64; 3], q: [f64; 3], mut visit: impl FnMut([i64; 3], f64) -> bool) -> bool {
    let d = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
    let mut cell = p.map(|x| x.floor() as i64);
    let mut t_max = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    let mut step = [0i64; 3];
    for j in 0..3 {
        if d[j] > 0.0 {
            step[j] = 1;
            t_max[j] = ((cell[j] + 1) as f64 - p[j]) / d[j];
            t_delta[j] = 1.0 / d[j];
        } else if d[j] < 0.0 {
            step[j] = -1;
            t_max[j] = (cell[j] as f64 - p[j]) / d[j];
            t_delta[j] = -1.0 / d[j];
        }
    }
    let mut t_enter = 0.0;
    loop {
        let j = (0..3).min_by(|&a, &b| t_max[a].total_cmp(&t_max[b])).unwrap();
        if t_max[j].min(1.0) > t_enter && !visit(cell, t_enter) {
            return false;
        }
        if t_max[j] > 1.0 {
            return true;
        }
        t_enter = t_max[j];
        cell[j] += step[j];
        t_max[j] += t_delta[j];
    }
}

fn check_curve(pair: &IrrationalPair, curve: &[[f64; 3]]) -> Result<(), TorusError> {
    if curve.len() < 2 {
        return Err(TorusError::DegenerateCurve);
    }
    for (i, v) in curve.iter().enumerate() {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(TorusError::NonFinite);
        }
        let r = v[2] - pair.alpha * v[0] - pair.beta * v[1];
        if r.abs() > PLANE_TOL {
            return Err(TorusError::OffPlane { vertex: i, residual: r });
        }
    }
    Ok(())
}

/// Compares the heights `l(Z_n)` of the first `n_samples` fundamental domains
/// crossed by a polyline in the plane, found by exact traversal, with the
/// heights `l(Z)` of the translates `Z = -floor(p)` bringing curve points `p`
/// into the unit cube, found by sampling four points per crossing.
pub fn lemma_b_check(
    pair: &IrrationalPair,
    curve: &[[f64; 3]],
    n_samples: usize,
    delta: f64,
) -> Result<LemmaReport, TorusError> {
    check_curve(pair, curve)?;
    if n_samples == 0 {
        return Err(TorusError::Precondition("n_samples must be at least 1".into()));
    }
    // Side 2: traversal, stopping after n_samples domains.
    let mut traversal = Vec::with_capacity(n_samples);
    let mut last: Option<[i64; 3]> = None;
    let mut end = (curve.len() - 2, 1.0);
    'segments: for (k, w) in curve.windows(2).enumerate() {
        let (p, q) = (w[0], w[1]);
        let mut exit_t = 1.0;
        let complete = traverse(p, q, |cell, t| {
            if last != Some(cell) {
                if traversal.len() == n_samples {
                    // Stop where the walk leaves the last counted domain.
                    exit_t = t;
                    return false;
                }
                traversal.push(lattice_height(pair, cell.map(|c| -c)));
                last = Some(cell);
            }
            true
        });
        if !complete {
            end = (k, exit_t);
            break 'segments;
        }
    }
    if traversal.len() < 2 {
        return Err(TorusError::DegenerateCurve);
    }
    if traversal.len() < n_samples {
        return Err(TorusError::TooFewCrossings { wanted: n_samples, got: traversal.len() });
    }
    // Side 1: uniform samples in arc length over the traversed part.
    let seg_len = |w: &[[f64; 3]]| {
        ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2) + (w[1][2] - w[0][2]).powi(2)).sqrt()
    };
    let lens: Vec<f64> = curve.windows(2).map(seg_len).collect();
    let total: f64 = lens[..end.0].iter().sum::<f64>() + lens[end.0] * end.1;
    let samples = 4 * n_samples;
    let mut sampled = Vec::with_capacity(samples);
    let (mut seg, mut before) = (0usize, 0.0f64);
    for i in 0..samples {
        // Midpoints of equal arcs stay off the stopping boundary.
        let s = total * (i as f64 + 0.5) / samples as f64;
        while seg < end.0 && before + lens[seg] < s {
            before += lens[seg];
            seg += 1;
        }
        let t = if lens[seg] > 0.0 { (s - before) / lens[seg] } else { 0.0 };
        let (p, q) = (curve[seg], curve[seg + 1]);
        let pt = [0, 1, 2].map(|j| p[j] + t * (q[j] - p[j]));
        sampled.push(lattice_height(pair, pt.map(|x| -(x.floor() as i64))));
    }
    let traversal = sorted_unique(traversal);
    let sampled = sorted_unique(sampled);
    let t2s = directed(&traversal, &sampled);
    let s2t = directed(&sampled, &traversal);
    let hausdorff = t2s.max(s2t);
    Ok(LemmaReport {
        crossings: n_samples,
        samples,
        traversal_heights: traversal.len(),
        sampled_heights: sampled.len(),
        traversal_to_sampled: t2s,
        sampled_to_traversal: s2t,
        hausdorff,
        pass: hausdorff <= delta,
    })
}

/// Curve parameter spacing for the bounded-line check.
pub const BOUNDED_LINE_STEP: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedLineReport {
    pub radius: f64,
    pub samples: usize,
    /// Hull of `E.v` over the search window.
    pub interval: (f64, f64),
    /// Lattice translates found in the window, the trivial one included.
    pub translates: usize,
    /// Coverage of `interval` by heights of lattice points within `2R` of the
    /// curve, up to the sampling allowance.
    pub coverage: CoverageReport,
    pub pass: bool,
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Lattice points whose coordinate along `axis` lies in `[lo, hi]` and that
/// are within `r` of the line through the origin with unit direction `u`.
fn points_near_line(u: [f64; 3], s_lo: f64, s_hi: f64, r: f64, mut visit: impl FnMut([i64; 3])) {
    let axis = (0..3).max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs())).unwrap();
    let (o1, o2) = ((axis + 1) % 3, (axis + 2) % 3);
    let (c_lo, c_hi) = {
        let (a, b) = (s_lo * u[axis], s_hi * u[axis]);
        ((a.min(b) - r).floor() as i64, (a.max(b) + r).ceil() as i64)
    };
    // The tube meets each slab perpendicular to `axis` in an ellipse whose
    // extent is at most r / |u_axis| around the line.
    let half = r / u[axis].abs();
    for c in c_lo..=c_hi {
        let s = c as f64 / u[axis];
        let centre = [s * u[o1], s * u[o2]];
        for i in (centre[0] - half).floor() as i64..=(centre[0] + half).ceil() as i64 {
            for j in (centre[1] - half).floor() as i64..=(centre[1] + half).ceil() as i64 {
                let mut z = [0i64; 3];
                z[axis] = c;
                z[o1] = i;
                z[o2] = j;
                let zf = z.map(|x| x as f64);
                let t = dot(zf, u);
                if t < s_lo || t > s_hi {
                    continue;
                }
                let perp = [zf[0] - t * u[0], zf[1] - t * u[1], zf[2] - t * u[2]];
                if norm(perp) <= r {
                    visit(z);
                }
            }
        }
    }
}

/// Lattice points inside the ball of radius `r` around `c`.
fn points_in_ball(c: [f64; 3], r: f64, mut visit: impl FnMut([i64; 3])) {
    let lo = c.map(|x| (x - r).ceil() as i64);
    let hi = c.map(|x| (x + r).floor() as i64);
    for x in lo[0]..=hi[0] {
        for y in lo[1]..=hi[1] {
            for z in lo[2]..=hi[2] {
                let d = [x as f64 - c[0], y as f64 - c[1], z as f64 - c[2]];
                if dot(d, d) <= r * r {
                    visit([x, y, z]);
                }
            }
        }
    }
}

/// Curve `gamma(t) = t u + R (0.6 sin t + 0.4 sin(sqrt2 t)) w` in the plane,
/// where the line `D` through the origin has direction
/// `u ~ (a, b, alpha a + beta b)` and `w` is the unit normal to `u` inside the
/// plane. It stays within `R` of `D` and passes within `R` of every point of
/// `D`.
///
/// `E` is the set of lattice `z` with `D + z` inside the `R`-tube of `D`,
/// searched over `z.u` in `[-L, 0]` where `L` is the sampled parameter
/// length. `I` is the hull of `E.v` with `v = (-alpha, -beta, 1)`. The
/// heights `v.z` of lattice points within `2R` of `-gamma(t_k)` must then be
/// dense in `I`; the ball is enlarged by the curve's travel over half a
/// sample step so that no such point is lost between samples.
pub fn bounded_line_check(
    pair: &IrrationalPair,
    direction: (i64, i64),
    r: f64,
    n: usize,
    delta: f64,
) -> Result<BoundedLineReport, TorusError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(TorusError::Precondition(format!("R must be positive, got {r}")));
    }
    if direction == (0, 0) {
        return Err(TorusError::Precondition("direction must be nonzero".into()));
    }
    if n < 2 {
        return Err(TorusError::Precondition("need at least two curve samples".into()));
    }
    let (a, b) = (direction.0 as f64, direction.1 as f64);
    let d = [a, b, pair.alpha * a + pair.beta * b];
    let u = d.map(|x| x / norm(d));
    let v = [-pair.alpha, -pair.beta, 1.0];
    let wv = cross(v, u);
    let w = wv.map(|x| x / norm(wv));
    let height = |z: [i64; 3]| lattice_height(pair, z);

    let length = (n - 1) as f64 * BOUNDED_LINE_STEP;
    let mut translates = 0usize;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    points_near_line(u, -length, 0.0, r, |z| {
        translates += 1;
        let h = height(z);
        lo = lo.min(h);
        hi = hi.max(h);
    });
    if translates < 2 || hi <= lo {
        return Err(TorusError::EmptyTranslates(format!(
            "no nontrivial lattice translate of the line lies within R = {r} over a window of length {length:.3}; \
             increase R or the number of samples"
        )));
    }

    let speed = (1.0 + (r * (0.6 + 0.4 * 2f64.sqrt())).powi(2)).sqrt();
    let rho = 2.0 * r + speed * BOUNDED_LINE_STEP / 2.0;
    // Heights are binned at width delta/4, keeping each bin's extremes; the
    // coverage of an interval by delta-balls depends only on those.
    let width = delta / 4.0;
    let (b_lo, b_hi) = (lo - delta, hi + delta);
    let bins = ((b_hi - b_lo) / width).ceil() as usize + 1;
    let mut extremes = vec![(f64::INFINITY, f64::NEG_INFINITY); bins];
    for k in 0..n {
        let t = k as f64 * BOUNDED_LINE_STEP;
        let off = r * (0.6 * t.sin() + 0.4 * (2f64.sqrt() * t).sin());
        let g = [0, 1, 2].map(|j| t * u[j] + off * w[j]);
        points_in_ball(g.map(|x| -x), rho, |z| {
            let h = height(z);
            if h >= b_lo && h <= b_hi {
                let slot = &mut extremes[((h - b_lo) / width) as usize];
                slot.0 = slot.0.min(h);
                slot.1 = slot.1.max(h);
            }
        });
    }
    let reps: Vec<f64> = extremes.iter().filter(|e| e.0 <= e.1).flat_map(|e| [e.0, e.1]).collect();
    let coverage = interval_coverage(&reps, lo, hi, delta);
    let pass = coverage.covered_measure >= 1.0 - 1e-12;
    Ok(BoundedLineReport { radius: r, samples: n, interval: (lo, hi), translates, coverage, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> IrrationalPair {
        IrrationalPair::new(2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0).unwrap()
    }

    #[test]
    fn hausdorff_is_symmetric() {
        let a = [0.1, 0.5, 0.9];
        let b = [0.12, 0.7];
        assert_eq!(hausdorff_distance(&a, &b), hausdorff_distance(&b, &a));
        assert!((hausdorff_distance(&a, &b) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn traversal_counts_plane_crossings() {
        let mut cells = Vec::new();
        traverse([0.5, 0.5, 0.5], [3.5, 0.5, 0.5], |c, _| {
            cells.push(c);
            true
        });
        assert_eq!(cells, vec![[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]]);
    }

    #[test]
    fn traversal_skips_touched_cells() {
        // Starts on a corner heading into negative x and crosses an edge
        // exactly; neither touched cell has positive length.
        let mut cells = Vec::new();
        traverse([0.0, 0.0, 0.5], [-2.0, 2.0, 0.5], |c, t| {
            cells.push((c, t));
            true
        });
        assert_eq!(cells, vec![([-1, 0, 0], 0.0), ([-2, 1, 0], 0.5)]);
    }

    #[test]
    fn straight_line_heights_agree() {
        let p = pair();
        let curve = plane_line(&p, 1.0, 1.0, 5000.0);
        let rep = lemma_b_check(&p, &curve, 10_000, 0.01).unwrap();
        assert!(rep.pass, "{rep:?}");
        // Every sampled point lies in a traversed domain.
        assert_eq!(rep.sampled_to_traversal, 0.0);
        assert!(matches!(
            lemma_b_check(&p, &[[0.0, 0.0, 1.0], [1.0, 1.0, 2.0]], 10, 0.01),
            Err(TorusError::OffPlane { vertex: 0, .. })
        ));
        assert!(matches!(lemma_b_check(&p, &curve[..1], 10, 0.01), Err(TorusError::DegenerateCurve)));
        assert!(matches!(
            lemma_b_check(&p, &plane_line(&p, 1.0, 1.0, 2.0), 100, 0.01),
            Err(TorusError::TooFewCrossings { .. })
        ));
    }

    #[test]
    fn bounded_line_density_and_monotonicity() {
        let p = pair();
        let rep = bounded_line_check(&p, (1, 1), 2.0, 20_000, 0.01).unwrap();
        assert!(rep.pass, "{rep:?}");
        let wide = bounded_line_check(&p, (1, 1), 4.0, 20_000, 0.01).unwrap();
        assert!(wide.translates >= rep.translates);
        assert!(wide.interval.0 <= rep.interval.0 && wide.interval.1 >= rep.interval.1);
        assert!(matches!(bounded_line_check(&p, (1, 1), 0.01, 4, 0.01), Err(TorusError::EmptyTranslates(_))));
    }
}
