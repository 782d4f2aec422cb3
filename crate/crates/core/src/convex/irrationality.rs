use std::ops::ControlFlow;

use serde::Serialize;

use super::ConvexError;

/// Largest dimension searched exhaustively.
pub const EXHAUSTIVE_MAX_DIM: usize = 4;
/// Largest dimension accepted at all.
pub const MAX_DIM: usize = 8;
/// Exhaustive enumeration is skipped above this many candidate vectors.
const EXHAUSTIVE_BUDGET: f64 = 2.5e8;

/// A real homology class, or with `dual` set a cohomology class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomologyVector {
    coords: Vec<f64>,
    dual: bool,
}

impl HomologyVector {
    pub fn new(coords: Vec<f64>) -> Result<Self, ConvexError> {
        if coords.is_empty() || coords.iter().any(|c| !c.is_finite()) {
            return Err(ConvexError::InvalidVector);
        }
        Ok(HomologyVector { coords, dual: false })
    }

    pub fn dual(coords: Vec<f64>) -> Result<Self, ConvexError> {
        Ok(HomologyVector { dual: true, ..Self::new(coords)? })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn b(&self) -> usize {
        self.coords.len()
    }

    pub fn is_dual(&self) -> bool {
        self.dual
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrrationalityReport {
    pub h: HomologyVector,
    /// Rank of the integer vectors k found with `<k,h>` an integer.
    pub relation_lattice_rank_z: usize,
    /// Rank of the integer vectors k found with `<k,h> = 0`.
    pub relation_lattice_rank_r: usize,
    pub i_z: usize,
    pub i_r: usize,
    pub search_bound: u32,
    /// False when candidates came from lattice reduction rather than enumeration.
    pub exhaustive: bool,
}

fn relation_tolerance(k: &[i64], h: &[f64]) -> f64 {
    1e-12 * (1.0 + k.iter().zip(h).map(|(&k, &x)| (k as f64 * x).abs()).sum::<f64>())
}

fn dot(k: &[i64], h: &[f64]) -> f64 {
    k.iter().zip(h).map(|(&k, &x)| k as f64 * x).sum()
}

/// Integer residual of `<k,h>`: the nearest integer and the distance to it.
fn integer_residual(k: &[i64], h: &[f64]) -> (f64, f64) {
    let r = dot(k, h);
    let m = r.round();
    (m, (r - m).abs())
}

/// Rank of a set of small integer vectors, by fraction-free elimination.
fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            for j in c + 1..cols {
                m[r][j] = (m[rank][c] * m[r][j] - m[r][c] * m[rank][j]) / prev;
            }
            m[r][c] = 0;
        }
        prev = m[rank][c];
        rank += 1;
    }
    rank
}

/// Visits every nonzero k in `[-bound, bound]^b` whose first nonzero entry is positive.
fn for_each_half_space(b: usize, bound: i64, mut f: impl FnMut(&[i64]) -> ControlFlow<()>) {
    let mut k = vec![-bound; b];
    loop {
        if let Some(first) = k.iter().find(|&&x| x != 0) {
            if *first > 0 && f(&k).is_break() {
                return;
            }
        }
        let mut i = b;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if k[i] < bound {
                k[i] += 1;
                break;
            }
            k[i] = -bound;
        }
    }
}

/// Searches `k0 + <k,h> = 0` with every `|k_i| <= bound`, `k` nonzero.
/// Returns `(k, k0)` for the first relation in enumeration order.
pub fn find_integer_relation(h: &[f64], bound: u32) -> Option<(Vec<i64>, i64)> {
    let mut found = None;
    for_each_half_space(h.len(), bound as i64, |k| {
        let (m, err) = integer_residual(k, h);
        if m.abs() <= bound as f64 && err <= relation_tolerance(k, h) {
            found = Some((k.to_vec(), -(m as i64)));
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    found
}

#[derive(Default)]
struct RelationBasis {
    rows: Vec<Vec<i64>>,
}

impl RelationBasis {
    fn offer(&mut self, k: &[i64]) {
        self.rows.push(k.to_vec());
        if integer_rank(&self.rows) < self.rows.len() {
            self.rows.pop();
        }
    }
}

/// LLL reduction with parameter 0.99 on the rows of `basis`.
fn lll(basis: &mut [Vec<f64>]) {
    let n = basis.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram_schmidt = |basis: &[Vec<f64>]| {
        let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut mu = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut v = basis[i].clone();
            for j in 0..i {
                mu[i][j] = dot(&basis[i], &star[j]) / dot(&star[j], &star[j]);
                for (x, s) in v.iter_mut().zip(&star[j]) {
                    *x -= mu[i][j] * s;
                }
            }
            star.push(v);
        }
        (star, mu)
    };
    let mut k = 1;
    let mut guard = 0;
    while k < n && guard < 100_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (_, mu) = gram_schmidt(basis);
            let q = mu[k][j].round();
            if q != 0.0 {
                let bj = basis[j].clone();
                for (x, y) in basis[k].iter_mut().zip(&bj) {
                    *x -= q * y;
                }
            }
        }
        let (star, mu) = gram_schmidt(basis);
        let lhs = dot(&star[k], &star[k]);
        let rhs = (0.99 - mu[k][k - 1].powi(2)) * dot(&star[k - 1], &star[k - 1]);
        if lhs >= rhs {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
}

/// Candidate relations for `y` from a reduced basis of `(e_i, W y_i)`.
fn reduction_candidates(y: &[f64]) -> Vec<Vec<i64>> {
    let n = y.len();
    let scale = 1.0 / (1e3 * f64::EPSILON * y.iter().map(|v| v.abs()).sum::<f64>().max(1.0));
    let mut basis: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n + 1];
            row[i] = 1.0;
            row[n] = scale * y[i];
            row
        })
        .collect();
    lll(&mut basis);
    basis.iter().map(|row| row[..n].iter().map(|&x| x as i64).collect()).collect()
}

/// Bounded integer-relation search for the two relation groups of `h`.
///
/// Exhaustive for `b <= EXHAUSTIVE_MAX_DIM` when the box has at most a few
/// hundred million vectors; otherwise candidates come from LLL reduction and
/// the ranks found are lower bounds.
pub fn irrationality(h: &HomologyVector, bound: u32) -> Result<IrrationalityReport, ConvexError> {
    if bound == 0 {
        return Err(ConvexError::InvalidBound);
    }
    let b = h.b();
    if b > MAX_DIM {
        return Err(ConvexError::DimensionTooLarge(b));
    }
    let x = h.coords();
    let mut z = RelationBasis::default();
    let mut r = RelationBasis::default();
    let exhaustive =
        b <= EXHAUSTIVE_MAX_DIM && ((2 * bound as u64 + 1) as f64).powi(b as i32) <= EXHAUSTIVE_BUDGET;

    let consider = |k: &[i64], z: &mut RelationBasis, r: &mut RelationBasis| {
        let tol = relation_tolerance(k, x);
        let (_, err) = integer_residual(k, x);
        if err <= tol && z.rows.len() < b {
            z.offer(k);
        }
        if dot(k, x).abs() <= tol && r.rows.len() < b {
            r.offer(k);
        }
    };

    if exhaustive {
        for_each_half_space(b, bound as i64, |k| {
            consider(k, &mut z, &mut r);
            if z.rows.len() == b && r.rows.len() == b {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
    } else {
        let mut affine = x.to_vec();
        affine.push(1.0);
        let mut candidates: Vec<Vec<i64>> = reduction_candidates(&affine)
            .into_iter()
            .map(|mut k| {
                k.pop();
                k
            })
            .collect();
        candidates.extend(reduction_candidates(x));
        // Unit vectors catch integer coordinates that reduction may combine away.
        for i in 0..b {
            let mut e = vec![0; b];
            e[i] = 1;
            candidates.push(e);
        }
        for k in candidates {
            if k.iter().any(|&c| c != 0) && k.iter().all(|c| c.unsigned_abs() <= bound as u64) {
                consider(&k, &mut z, &mut r);
            }
        }
    }

    let rank_z = z.rows.len();
    let rank_r = r.rows.len();
    Ok(IrrationalityReport {
        h: h.clone(),
        relation_lattice_rank_z: rank_z,
        relation_lattice_rank_r: rank_r,
        i_z: b - rank_z,
        i_r: b - rank_r,
        search_bound: bound,
        exhaustive,
    })
}
