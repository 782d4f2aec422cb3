use super::{Edge, PeriodicWeightedGraph, StableNormError};

/// Subdivisions per cell side in the cheap-lines model.
pub const HEDLUND_RESOLUTION: usize = 8;

/// Unit grid with one vertex per cell and unit edges to the 2d neighbours.
pub fn flat_grid(d: usize) -> Result<PeriodicWeightedGraph, StableNormError> {
    let mut edges = Vec::new();
    for axis in 0..d.min(3) {
        for sign in [1, -1] {
            let mut shift = [0; 3];
            shift[axis] = sign;
            edges.push(Edge { from: 0, to: 0, shift, weight: 1.0 });
        }
    }
    PeriodicWeightedGraph::new(d, vec!["0".into()], edges)
}

/// Three pairwise disjoint cheap axis lines on the cubic grid of T^3.
///
/// The cell is an `L^3` grid (`L = 8`) with edge length `1/L`. The x-line
/// runs through grid points `(., 1, 0)`, the y-line through `(0, ., 1)` and
/// the z-line through `(1, 0, .)`; their edges cost `epsilon/L`, all others `1/L`.
/// Vertex `(i, j, k)` has index `i + L(j + L k)`.
pub fn hedlund_graph(epsilon: f64) -> Result<PeriodicWeightedGraph, StableNormError> {
    hedlund_graph_with_resolution(epsilon, HEDLUND_RESOLUTION)
}

pub fn hedlund_graph_with_resolution(
    epsilon: f64,
    l: usize,
) -> Result<PeriodicWeightedGraph, StableNormError> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(StableNormError::InvalidEpsilon(epsilon));
    }
    if l < 2 {
        return Err(StableNormError::InvalidGraph("the cell needs at least 2 subdivisions".into()));
    }
    let index = |c: [usize; 3]| c[0] + l * (c[1] + l * c[2]);
    let cheap = |c: [usize; 3], axis: usize| match axis {
        0 => c[1] == 1 && c[2] == 0,
        1 => c[0] == 0 && c[2] == 1,
        _ => c[0] == 1 && c[1] == 0,
    };
    let mut vertices = Vec::with_capacity(l * l * l);
    let mut edges = Vec::with_capacity(6 * l * l * l);
    for k in 0..l {
        for j in 0..l {
            for i in 0..l {
                vertices.push(format!("{i}.{j}.{k}"));
            }
        }
    }
    for k in 0..l {
        for j in 0..l {
            for i in 0..l {
                let c = [i, j, k];
                for axis in 0..3 {
                    let weight = if cheap(c, axis) { epsilon } else { 1.0 } / l as f64;
                    for forward in [true, false] {
                        let mut to = c;
                        let mut shift = [0i64; 3];
                        if forward {
                            to[axis] = (c[axis] + 1) % l;
                            if to[axis] == 0 {
                                shift[axis] = 1;
                            }
                        } else {
                            to[axis] = (c[axis] + l - 1) % l;
                            if c[axis] == 0 {
                                shift[axis] = -1;
                            }
                        }
                        edges.push(Edge { from: index(c), to: index(to), shift, weight });
                    }
                }
            }
        }
    }
    PeriodicWeightedGraph::new(3, vertices, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hedlund_has_three_cheap_lines() {
        let g = hedlund_graph(0.1).unwrap();
        assert_eq!(g.vertices().len(), 512);
        assert_eq!(g.edges().len(), 3072);
        let cheap = g.edges().iter().filter(|e| e.weight < 0.1).count();
        // Each line has 8 edges, counted in both directions.
        assert_eq!(cheap, 3 * 8 * 2);
        assert!(g.is_symmetric());
        assert!(matches!(hedlund_graph(0.5), Err(StableNormError::InvalidEpsilon(_))));
    }
}
