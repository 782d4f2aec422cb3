use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::{split_height, IrrationalPair, TorusError};

/// Largest window volume `qc_build` accepts.
pub const MAX_WINDOW_VOLUME: u128 = 100_000_000;

/// Inclusive integer box in Z^3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntegerBox {
    pub lo: [i64; 3],
    pub hi: [i64; 3],
}

impl IntegerBox {
    pub fn new(lo: [i64; 3], hi: [i64; 3]) -> Result<Self, TorusError> {
        if (0..3).any(|j| lo[j] > hi[j]) {
            return Err(TorusError::EmptyWindow);
        }
        Ok(IntegerBox { lo, hi })
    }

    pub fn cube(n: i64) -> Result<Self, TorusError> {
        Self::new([0; 3], [n; 3])
    }

    /// Columns `[0, n]^2` with the z-range spanning every candidate
    /// `floor(alpha x + beta y)` over them.
    pub fn columns(pair: &IrrationalPair, n: i64) -> Result<Self, TorusError> {
        if n < 0 {
            return Err(TorusError::EmptyWindow);
        }
        let corners =
            [(0, 0), (n, 0), (0, n), (n, n)].map(|(x, y)| split_height(pair.alpha, pair.beta, x, y).0);
        let z_lo = *corners.iter().min().unwrap() - 1;
        let z_hi = *corners.iter().max().unwrap() + 1;
        Self::new([0, 0, z_lo], [n, n, z_hi])
    }

    pub fn volume(&self) -> u128 {
        (0..3).map(|j| (self.hi[j] - self.lo[j] + 1) as u128).product()
    }

    fn extent(&self, j: usize) -> usize {
        (self.hi[j] - self.lo[j] + 1) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QcPoint {
    pub x: i64,
    pub y: i64,
    pub z: i64,
    /// `alpha x + beta y - z`, in `(0, 1)`.
    pub height: f64,
}

/// Points of the window with `z < alpha x + beta y < z + 1`. A column holds
/// at most one; columns where `alpha x + beta y` is an integer hold none.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiCrystalWindow {
    pub pair: IrrationalPair,
    pub window: IntegerBox,
    /// Sorted by `(x, y)`.
    pub points: Vec<QcPoint>,
}

impl QuasiCrystalWindow {
    /// Index of the point in column `(x, y)`, if any.
    pub fn column_index(&self) -> Vec<Option<usize>> {
        let (nx, ny) = (self.window.extent(0), self.window.extent(1));
        let mut grid = vec![None; nx * ny];
        for (i, p) in self.points.iter().enumerate() {
            let (cx, cy) = ((p.x - self.window.lo[0]) as usize, (p.y - self.window.lo[1]) as usize);
            grid[cx * ny + cy] = Some(i);
        }
        grid
    }

    /// Number of points in each column, row-major in `x`.
    pub fn column_counts(&self) -> Vec<usize> {
        self.column_index().iter().map(|c| c.is_some() as usize).collect()
    }
}

pub fn qc_build(pair: &IrrationalPair, window: IntegerBox) -> Result<QuasiCrystalWindow, TorusError> {
    let volume = window.volume();
    if volume > MAX_WINDOW_VOLUME {
        return Err(TorusError::WindowTooLarge(volume));
    }
    let mut points = Vec::new();
    for x in window.lo[0]..=window.hi[0] {
        for y in window.lo[1]..=window.hi[1] {
            let (z, height) = split_height(pair.alpha, pair.beta, x, y);
            if height > 0.0 && window.lo[2] <= z && z <= window.hi[2] {
                points.push(QcPoint { x, y, z, height });
            }
        }
    }
    Ok(QuasiCrystalWindow { pair: *pair, window, points })
}

/// Finite union of open subintervals of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self, TorusError> {
        for &(a, b) in &intervals {
            if !(0.0 <= a && a < b && b <= 1.0) {
                return Err(TorusError::InvalidInterval(format!(
                    "({a}, {b}) is not an open subinterval of [0, 1]"
                )));
            }
        }
        intervals.sort_by(|u, v| u.0.total_cmp(&v.0).then(u.1.total_cmp(&v.1)));
        Ok(IntervalSet { intervals })
    }

    pub fn empty() -> Self {
        IntervalSet::default()
    }

    /// Parses `"a,b;c,d"`.
    pub fn parse(text: &str) -> Result<Self, TorusError> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Self::empty());
        }
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| TorusError::Parse(format!("interval bound {s:?}: {e}")))
        };
        let intervals = text
            .split(';')
            .map(|part| match part.split(',').collect::<Vec<_>>()[..] {
                [a, b] => Ok((parse(a)?, parse(b)?)),
                _ => Err(TorusError::Parse(format!("expected 'a,b', got {part:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(intervals)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, h: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a < h && h < b)
    }

    /// Whether every interval of `self` lies inside one of `other`.
    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.intervals.iter().all(|&(a, b)| other.intervals.iter().any(|&(c, d)| c <= a && b <= d))
    }
}

/// The `m` longest open gaps of the triadic Cantor set, longest first and
/// left to right within a length.
pub fn cantor_gaps(m: usize) -> IntervalSet {
    let mut gaps = Vec::with_capacity(m);
    let mut kept = vec![(0.0f64, 1.0f64)];
    while gaps.len() < m {
        let mut next = Vec::with_capacity(2 * kept.len());
        for &(a, b) in &kept {
            let third = (b - a) / 3.0;
            if gaps.len() < m {
                gaps.push((a + third, b - third));
            }
            next.push((a, a + third));
            next.push((b - third, b));
        }
        kept = next;
    }
    IntervalSet::new(gaps).expect("Cantor gaps are subintervals of [0, 1]")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub id: usize,
    pub size: usize,
    pub bbox: IntegerBox,
    /// Reaches both faces of the window in x or in y.
    pub spanning: bool,
    /// For spanning components: displacement over length of a shortest chain
    /// between opposite faces.
    pub direction: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    pub kept: usize,
    pub removed: usize,
    pub components: Vec<Component>,
    /// Component size to number of components of that size.
    pub histogram: BTreeMap<usize, usize>,
    /// Component id of every window point, `None` when its height is in K.
    pub labels: Vec<Option<usize>>,
}

impl ComponentReport {
    pub fn spanning(&self) -> usize {
        self.components.iter().filter(|c| c.spanning).count()
    }

    /// Whether every component here lies inside one component of `coarser`,
    /// both reports coming from the same window.
    pub fn refines(&self, coarser: &ComponentReport) -> bool {
        if self.labels.len() != coarser.labels.len() {
            return false;
        }
        let mut image: Vec<Option<usize>> = vec![None; self.components.len()];
        for (fine, coarse) in self.labels.iter().zip(&coarser.labels) {
            if let Some(f) = *fine {
                let Some(c) = *coarse else { return false };
                match image[f] {
                    None => image[f] = Some(c),
                    Some(prev) if prev != c => return false,
                    _ => {}
                }
            }
        }
        true
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Components of the points whose height is outside `k`, under
/// nearest-neighbour adjacency. With at most one point per column, two points
/// are neighbours exactly when their columns are adjacent and their z agree.
/// Ids follow the first point of each component in `(x, y)` order.
pub fn qc_components(qc: &QuasiCrystalWindow, k: &IntervalSet) -> ComponentReport {
    let n = qc.points.len();
    let keep: Vec<bool> = qc.points.iter().map(|p| !k.contains(p.height)).collect();
    let grid = qc.column_index();
    let (lo, ny) = (qc.window.lo, qc.window.extent(1));
    let at = |x: i64, y: i64| -> Option<usize> {
        if x < lo[0] || x > qc.window.hi[0] || y < lo[1] || y > qc.window.hi[1] {
            return None;
        }
        grid[(x - lo[0]) as usize * ny + (y - lo[1]) as usize]
    };
    let (keep_ref, at_ref) = (&keep, &at);
    let neighbours = move |i: usize| {
        let p = qc.points[i];
        [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .into_iter()
            .filter_map(move |(dx, dy)| at_ref(p.x + dx, p.y + dy))
            .filter(move |&j| keep_ref[j] && qc.points[j].z == p.z)
    };
    let mut uf = UnionFind::new(n);
    for i in (0..n).filter(|&i| keep[i]) {
        for j in neighbours(i) {
            uf.union(i, j);
        }
    }
    let mut id_of_root: Vec<Option<usize>> = vec![None; n];
    let mut labels = vec![None; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in (0..n).filter(|&i| keep[i]) {
        let r = uf.find(i);
        let id = *id_of_root[r].get_or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        labels[i] = Some(id);
        members[id].push(i);
    }
    let w = qc.window;
    let components: Vec<Component> = members
        .iter()
        .enumerate()
        .map(|(id, pts)| {
            let mut bbox = IntegerBox { lo: [i64::MAX; 3], hi: [i64::MIN; 3] };
            for &i in pts {
                let c = [qc.points[i].x, qc.points[i].y, qc.points[i].z];
                for j in 0..3 {
                    bbox.lo[j] = bbox.lo[j].min(c[j]);
                    bbox.hi[j] = bbox.hi[j].max(c[j]);
                }
            }
            let span_axis = (0..2).find(|&j| bbox.lo[j] == w.lo[j] && bbox.hi[j] == w.hi[j]);
            let direction = span_axis.map(|j| chain_direction(qc, pts, j, &neighbours));
            Component { id, size: pts.len(), bbox, spanning: span_axis.is_some(), direction }
        })
        .collect();
    let mut histogram = BTreeMap::new();
    for c in &components {
        *histogram.entry(c.size).or_insert(0) += 1;
    }
    let kept = keep.iter().filter(|&&k| k).count();
    ComponentReport { kept, removed: n - kept, components, histogram, labels }
}

/// Breadth-first chain from the first member on the low face of `axis` to the
/// nearest member on the high face.
fn chain_direction<I: Iterator<Item = usize>>(
    qc: &QuasiCrystalWindow,
    members: &[usize],
    axis: usize,
    neighbours: &impl Fn(usize) -> I,
) -> [f64; 3] {
    let coord = |i: usize| [qc.points[i].x, qc.points[i].y, qc.points[i].z];
    let start = *members.iter().find(|&&i| coord(i)[axis] == qc.window.lo[axis]).unwrap();
    let mut dist = std::collections::HashMap::from([(start, 0usize)]);
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        if coord(i)[axis] == qc.window.hi[axis] {
            let (a, b, len) = (coord(start), coord(i), dist[&i] as f64);
            return [0, 1, 2].map(|j| (b[j] - a[j]) as f64 / len);
        }
        let di = dist[&i];
        for j in neighbours(i) {
            dist.entry(j).or_insert_with(|| {
                queue.push_back(j);
                di + 1
            });
        }
    }
    unreachable!("a spanning component connects its two faces")
}
