use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::{calibrate, PeriodicWeightedGraph, Shift, StableNormError};

/// Largest admissible `N |h|_inf`.
pub const MAX_SPAN: i64 = 10_000;
/// Largest lifted window, in vertices.
pub const MAX_WINDOW_VERTICES: u64 = 60_000_000;
/// Margin doublings tried before a window is declared unstable.
const MAX_DOUBLINGS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableNormOptions {
    /// Extra cells around the bounding box of `0` and `N h`.
    pub margin: i64,
    /// Also compute `d(0, 2N h) / 2N`.
    pub compare_double: bool,
    /// Solve the calibration LP for a certified lower bound.
    pub lower_bound: bool,
}

impl Default for StableNormOptions {
    fn default() -> Self {
        StableNormOptions { margin: 3, compare_double: true, lower_bound: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableNormEstimate {
    pub h: Vec<i64>,
    pub n: u64,
    /// `d(0, N h) / N`.
    pub upper: f64,
    /// From a calibrating co-vector; `-inf` when not computed.
    pub lower: f64,
    pub value: f64,
    /// Margin at which the distance was confirmed stable.
    pub margin: i64,
    /// `d(0, 2N h) / 2N` when requested and inside the span guard.
    pub upper_double: Option<f64>,
}

impl StableNormEstimate {
    /// Gap between the N and 2N upper estimates.
    pub fn n_gap(&self) -> Option<f64> {
        self.upper_double.map(|u2| self.upper - u2)
    }
}

#[derive(Debug, Clone, Copy)]
struct Window {
    lo: Shift,
    dims: Shift,
    nv: usize,
}

impl Window {
    fn around(d: usize, target: Shift, margin: i64, nv: usize) -> Window {
        let mut lo = [0; 3];
        let mut dims = [1; 3];
        for j in 0..d {
            lo[j] = target[j].min(0) - margin;
            dims[j] = target[j].abs() + 2 * margin + 1;
        }
        Window { lo, dims, nv }
    }

    fn size(&self) -> u64 {
        self.dims.iter().map(|&x| x as u64).product::<u64>() * self.nv as u64
    }

    fn index(&self, cell: Shift, v: usize) -> Option<usize> {
        let mut flat = 0i64;
        for j in (0..3).rev() {
            let c = cell[j] - self.lo[j];
            if c < 0 || c >= self.dims[j] {
                return None;
            }
            flat = flat * self.dims[j] + c;
        }
        Some(flat as usize * self.nv + v)
    }

    fn cell(&self, idx: usize) -> (Shift, usize) {
        let v = idx % self.nv;
        let mut flat = (idx / self.nv) as i64;
        let mut cell = [0; 3];
        for j in 0..3 {
            cell[j] = flat % self.dims[j] + self.lo[j];
            flat /= self.dims[j];
        }
        (cell, v)
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from vertex 0 of cell 0 to vertex 0 of cell `target`, restricted
/// to the box of cells around both padded by `margin`.
pub fn window_distance(
    g: &PeriodicWeightedGraph,
    target: Shift,
    margin: i64,
) -> Result<f64, StableNormError> {
    let w = Window::around(g.d(), target, margin, g.vertices().len());
    if w.size() > MAX_WINDOW_VERTICES {
        return Err(StableNormError::WindowOverflow(format!(
            "window of {} lifted vertices exceeds {MAX_WINDOW_VERTICES}",
            w.size()
        )));
    }
    let source = w.index([0; 3], 0).expect("origin lies in the window");
    let goal = w.index(target, 0).expect("target lies in the window");
    let mut dist = vec![f64::INFINITY; w.size() as usize];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(du, u)) = heap.pop() {
        if u == goal {
            return Ok(du);
        }
        if du > dist[u] {
            continue;
        }
        let (cell, v) = w.cell(u);
        for e in g.out_edges(v) {
            let next = [cell[0] + e.shift[0], cell[1] + e.shift[1], cell[2] + e.shift[2]];
            if let Some(x) = w.index(next, e.to) {
                let dx = du + e.weight;
                if dx < dist[x] {
                    dist[x] = dx;
                    heap.push(Entry(dx, x));
                }
            }
        }
    }
    Err(StableNormError::WindowDisconnected)
}

fn same_distance(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

/// Distance confirmed by rerunning with the margin doubled; returns it with
/// the margin that passed.
fn stable_distance(
    g: &PeriodicWeightedGraph,
    target: Shift,
    margin: i64,
) -> Result<(f64, i64), StableNormError> {
    let mut m = margin;
    let mut d = window_distance(g, target, m)?;
    for _ in 0..MAX_DOUBLINGS {
        let wider = window_distance(g, target, 2 * m)?;
        if same_distance(d, wider) {
            return Ok((d, m));
        }
        m *= 2;
        d = wider;
    }
    Err(StableNormError::WindowUnstable { margin: m })
}

fn check_vector(g: &PeriodicWeightedGraph, h: &[i64]) -> Result<Shift, StableNormError> {
    if h.len() != g.d() {
        return Err(StableNormError::DimensionMismatch { expected: g.d(), got: h.len() });
    }
    if h.iter().all(|&x| x == 0) {
        return Err(StableNormError::ZeroVector);
    }
    let mut s = [0; 3];
    s[..h.len()].copy_from_slice(h);
    Ok(s)
}

fn scaled(h: Shift, n: u64) -> Option<Shift> {
    let max = h.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
    (max.checked_mul(n)? <= MAX_SPAN as u64).then(|| h.map(|x| x * n as i64))
}

pub fn stable_norm(
    g: &PeriodicWeightedGraph,
    h: &[i64],
    n: u64,
) -> Result<StableNormEstimate, StableNormError> {
    stable_norm_with(g, h, n, &StableNormOptions::default())
}

pub fn stable_norm_with(
    g: &PeriodicWeightedGraph,
    h: &[i64],
    n: u64,
    opts: &StableNormOptions,
) -> Result<StableNormEstimate, StableNormError> {
    let hv = check_vector(g, h)?;
    if n == 0 {
        return Err(StableNormError::InvalidMultiplier);
    }
    if opts.margin < 1 {
        return Err(StableNormError::WindowOverflow("margin must be at least one cell".into()));
    }
    let target = scaled(hv, n)
        .ok_or_else(|| StableNormError::WindowOverflow(format!("N |h|_inf exceeds {MAX_SPAN}")))?;
    let (d, margin) = stable_distance(g, target, opts.margin)?;
    let upper = d / n as f64;
    let upper_double = match (opts.compare_double, scaled(hv, 2 * n)) {
        (true, Some(t2)) => Some(stable_distance(g, t2, opts.margin)?.0 / (2 * n) as f64),
        _ => None,
    };
    let lower = if opts.lower_bound {
        let real: Vec<f64> = h.iter().map(|&x| x as f64).collect();
        calibrate(g, &real)?.value.min(upper)
    } else {
        f64::NEG_INFINITY
    };
    Ok(StableNormEstimate { h: h.to_vec(), n, upper, lower, value: upper, margin, upper_double })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stable_norm::{flat_grid, hedlund_graph};

    #[test]
    fn flat_grid_is_manhattan() {
        let g = flat_grid(2).unwrap();
        let e = stable_norm(&g, &[1, 0], 1).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.lower, 1.0);
        let e = stable_norm(&g, &[1, 1], 1).unwrap();
        assert_eq!(e.value, 2.0);
        assert_eq!(e.upper_double, Some(2.0));
        let e = stable_norm(&g, &[-3, 7], 5).unwrap();
        assert_eq!(e.value, 10.0);
    }

    #[test]
    fn rejects_bad_requests() {
        let g = flat_grid(2).unwrap();
        assert!(matches!(stable_norm(&g, &[0, 0], 1), Err(StableNormError::ZeroVector)));
        assert!(matches!(stable_norm(&g, &[1, 0], 0), Err(StableNormError::InvalidMultiplier)));
        assert!(matches!(stable_norm(&g, &[1, 0, 0], 1), Err(StableNormError::DimensionMismatch { .. })));
        assert!(matches!(stable_norm(&g, &[1, 0], 10_001), Err(StableNormError::WindowOverflow(_))));
    }

    #[test]
    fn hedlund_axes_are_cheap() {
        let g = hedlund_graph(0.1).unwrap();
        let e = stable_norm(&g, &[1, 0, 0], 30).unwrap();
        // One connector edge each way: 2/8 + 30 * 0.1.
        assert!((e.upper - (0.25 + 3.0) / 30.0).abs() < 1e-12, "{e:?}");
        assert!(e.lower <= e.value);
        assert!((e.lower - 0.1).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn windows_index_round_trip() {
        let w = Window::around(3, [4, -2, 0], 3, 5);
        for idx in [0, 17, 311, w.size() as usize - 1] {
            let (c, v) = w.cell(idx);
            assert_eq!(w.index(c, v), Some(idx));
        }
    }
}
