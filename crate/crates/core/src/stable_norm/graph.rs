use std::collections::{HashMap, HashSet, VecDeque};
use std::io::{BufRead, Write};

use serde::Serialize;

use super::StableNormError;

/// Translation between cells; the third entry is zero when `d = 2`.
pub type Shift = [i64; 3];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub shift: Shift,
    pub weight: f64,
}

/// A Z^d-periodic graph given by one fundamental cell. An edge joins
/// `(from, cell c)` to `(to, cell c + shift)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicWeightedGraph {
    d: usize,
    vertices: Vec<String>,
    edges: Vec<Edge>,
    symmetric: bool,
    #[serde(skip)]
    out: Vec<Vec<usize>>,
}

fn neg(s: Shift) -> Shift {
    [-s[0], -s[1], -s[2]]
}

/// Hermite-style reduction of integer generators to at most `d` rows; returns
/// the absolute determinant when the rows have full rank, else 0.
fn lattice_index(mut rows: Vec<[i64; 3]>, d: usize) -> i64 {
    let mut basis = Vec::new();
    for c in 0..d {
        loop {
            rows.retain(|r| r.iter().any(|&x| x != 0));
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][c] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let pivot = *nz.iter().min_by_key(|&&i| rows[i][c].abs()).unwrap();
            let p = rows[pivot];
            for &i in &nz {
                if i != pivot {
                    let q = rows[i][c] / p[c];
                    for j in 0..3 {
                        rows[i][j] -= q * p[j];
                    }
                }
            }
        }
        match (0..rows.len()).find(|&i| rows[i][c] != 0) {
            Some(i) => basis.push(rows.swap_remove(i)[c].abs()),
            None => return 0,
        }
    }
    basis.iter().product()
}

impl PeriodicWeightedGraph {
    /// Validates weights, indices and connectivity of the lift, and records
    /// whether the edge set is closed under reversal.
    pub fn new(d: usize, vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self, StableNormError> {
        if d != 2 && d != 3 {
            return Err(StableNormError::InvalidGraph(format!("dimension must be 2 or 3, got {d}")));
        }
        if vertices.is_empty() {
            return Err(StableNormError::InvalidGraph("no cell vertices".into()));
        }
        let mut out = vec![Vec::new(); vertices.len()];
        for (k, e) in edges.iter().enumerate() {
            if e.from >= vertices.len() || e.to >= vertices.len() {
                return Err(StableNormError::InvalidGraph(format!("edge {k} references a missing vertex")));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(StableNormError::InvalidGraph(format!(
                    "edge {k} has weight {}; weights must be positive and finite",
                    e.weight
                )));
            }
            if d == 2 && e.shift[2] != 0 {
                return Err(StableNormError::InvalidGraph(format!(
                    "edge {k} has a third shift coordinate in d=2"
                )));
            }
            out[e.from].push(k);
        }
        let keys: HashSet<(usize, usize, Shift, u64)> =
            edges.iter().map(|e| (e.from, e.to, e.shift, e.weight.to_bits())).collect();
        let symmetric =
            edges.iter().all(|e| keys.contains(&(e.to, e.from, neg(e.shift), e.weight.to_bits())));
        let g = PeriodicWeightedGraph { d, vertices, edges, symmetric, out };
        g.check_connected()?;
        Ok(g)
    }

    /// The lift is strongly connected iff the quotient is strongly connected
    /// and the shifts of its cycles generate Z^d.
    fn check_connected(&self) -> Result<(), StableNormError> {
        let n = self.vertices.len();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(v) = queue.pop_front() {
                for e in &self.edges {
                    let (a, b) = if forward { (e.from, e.to) } else { (e.to, e.from) };
                    if a == v && !seen[b] {
                        seen[b] = true;
                        queue.push_back(b);
                    }
                }
            }
            seen.iter().all(|&s| s)
        };
        if !reach(true) || !reach(false) {
            return Err(StableNormError::Disconnected("the quotient graph is not strongly connected".into()));
        }
        // Potentials along an undirected spanning tree.
        let mut pot: Vec<Option<Shift>> = vec![None; n];
        pot[0] = Some([0; 3]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            let pv = pot[v].unwrap();
            for e in &self.edges {
                let (w, s) = if e.from == v {
                    (e.to, e.shift)
                } else if e.to == v {
                    (e.from, neg(e.shift))
                } else {
                    continue;
                };
                if pot[w].is_none() {
                    pot[w] = Some([pv[0] + s[0], pv[1] + s[1], pv[2] + s[2]]);
                    queue.push_back(w);
                }
            }
        }
        let cycles: Vec<Shift> = self
            .edges
            .iter()
            .map(|e| {
                let (pu, pv) = (pot[e.from].unwrap(), pot[e.to].unwrap());
                [0, 1, 2].map(|j| e.shift[j] + pu[j] - pv[j])
            })
            .collect();
        match lattice_index(cycles, self.d) {
            1 => Ok(()),
            0 => {
                Err(StableNormError::Disconnected("cycle shifts do not span every lattice direction".into()))
            }
            k => {
                Err(StableNormError::Disconnected(format!("cycle shifts generate a sublattice of index {k}")))
            }
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = &Edge> {
        self.out[v].iter().map(move |&k| &self.edges[k])
    }

    /// Same graph with every weight passed through `f`.
    pub fn map_weights(&self, f: impl Fn(usize, &Edge) -> f64) -> Result<Self, StableNormError> {
        let edges =
            self.edges.iter().enumerate().map(|(k, e)| Edge { weight: f(k, e), ..e.clone() }).collect();
        Self::new(self.d, self.vertices.clone(), edges)
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# pgraph v1 d={}", self.d)?;
        for v in &self.vertices {
            writeln!(w, "v {v}")?;
        }
        for e in &self.edges {
            write!(w, "e {} {}", self.vertices[e.from], self.vertices[e.to])?;
            for s in &e.shift[..self.d] {
                write!(w, " {s}")?;
            }
            writeln!(w, " {}", e.weight)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("graph text is utf-8")
    }

    pub fn read_from(r: impl BufRead) -> Result<Self, StableNormError> {
        let parse_err = |line: usize, message: String| StableNormError::Parse { line, message };
        let mut lines = r.lines();
        let header = lines.next().transpose()?.ok_or_else(|| parse_err(1, "missing header".into()))?;
        let d = match header.trim() {
            "# pgraph v1 d=2" => 2,
            "# pgraph v1 d=3" => 3,
            other => return Err(parse_err(1, format!("expected '# pgraph v1 d=<2|3>', found {other:?}"))),
        };
        let mut vertices = Vec::new();
        let mut ids = HashMap::new();
        let mut edges = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            let lineno = k + 2;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "v" if fields.len() == 2 => {
                    if ids.insert(fields[1].to_string(), vertices.len()).is_some() {
                        return Err(parse_err(lineno, format!("duplicate vertex {:?}", fields[1])));
                    }
                    vertices.push(fields[1].to_string());
                }
                "e" if fields.len() == 4 + d => {
                    let vertex = |name: &str| {
                        ids.get(name)
                            .copied()
                            .ok_or_else(|| parse_err(lineno, format!("unknown vertex {name:?}")))
                    };
                    let mut shift = [0i64; 3];
                    for j in 0..d {
                        shift[j] = fields[3 + j]
                            .parse()
                            .map_err(|e| parse_err(lineno, format!("shift {:?}: {e}", fields[3 + j])))?;
                    }
                    let weight = fields[3 + d]
                        .parse()
                        .map_err(|e| parse_err(lineno, format!("weight {:?}: {e}", fields[3 + d])))?;
                    edges.push(Edge { from: vertex(fields[1])?, to: vertex(fields[2])?, shift, weight });
                }
                _ => return Err(parse_err(lineno, format!("cannot parse {line:?}"))),
            }
        }
        Self::new(d, vertices, edges)
    }

    pub fn from_text(text: &str) -> Result<Self, StableNormError> {
        Self::read_from(text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stable_norm::{flat_grid, hedlund_graph};

    #[test]
    fn text_round_trip() {
        for g in [flat_grid(2).unwrap(), flat_grid(3).unwrap(), hedlund_graph(0.1).unwrap()] {
            let back = PeriodicWeightedGraph::from_text(&g.to_text()).unwrap();
            assert_eq!(back, g);
            assert!(back.is_symmetric());
        }
    }

    #[test]
    fn rejects_bad_graphs() {
        let v = vec!["0".to_string()];
        let e = |shift: Shift, weight: f64| Edge { from: 0, to: 0, shift, weight };
        assert!(matches!(
            PeriodicWeightedGraph::new(2, v.clone(), vec![e([1, 0, 0], 0.0), e([0, 1, 0], 1.0)]),
            Err(StableNormError::InvalidGraph(_))
        ));
        // Only one direction: the lift falls apart into lines.
        assert!(matches!(
            PeriodicWeightedGraph::new(2, v.clone(), vec![e([1, 0, 0], 1.0), e([-1, 0, 0], 1.0)]),
            Err(StableNormError::Disconnected(_))
        ));
        // Steps of two: a sublattice of index 2.
        assert!(matches!(
            PeriodicWeightedGraph::new(
                2,
                v.clone(),
                vec![e([2, 0, 0], 1.0), e([-2, 0, 0], 1.0), e([0, 1, 0], 1.0), e([0, -1, 0], 1.0)]
            ),
            Err(StableNormError::Disconnected(_))
        ));
        // Directed but strongly connected lift.
        let g =
            PeriodicWeightedGraph::new(2, v, vec![e([1, 0, 0], 1.0), e([0, 1, 0], 1.0), e([-1, -1, 0], 1.0)])
                .unwrap();
        assert!(!g.is_symmetric());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = PeriodicWeightedGraph::from_text("# pgraph v1 d=2\nv a\ne a b 1 0 1\n").unwrap_err();
        assert!(matches!(err, StableNormError::Parse { line: 3, .. }), "{err}");
    }
}
