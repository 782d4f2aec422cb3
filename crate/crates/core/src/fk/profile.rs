use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    gcd, minimize_periodic_with, FkError, GeneratingFunction, MinimizerOptions, PeriodicConfiguration,
};
use crate::convex::{legendre_transform, SampledConvexProfile, Tolerances};

/// Certificate tolerance for assembled profiles.
pub const PROFILE_CONVEX_TOL: f64 = 1e-8;

/// A reduced fraction `p/q` with `q > 0`, ordered by value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Fraction {
    pub p: i64,
    pub q: u64,
}

impl Fraction {
    pub fn new(p: i64, q: u64) -> Result<Self, FkError> {
        if q == 0 || gcd(p.unsigned_abs(), q) != 1 {
            return Err(FkError::InvalidFraction { p, q: q as usize });
        }
        Ok(Fraction { p, q })
    }

    pub fn value(self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.p as i128 * other.q as i128).cmp(&(other.p as i128 * self.q as i128))
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Reduced fractions in `[-2, 2]` with denominator at most `depth`, ascending.
pub fn farey_fractions(depth: u64) -> Vec<Fraction> {
    let mut out: Vec<Fraction> = (1..=depth)
        .flat_map(|q| {
            let q_i = q as i64;
            (-2 * q_i..=2 * q_i).filter_map(move |p| Fraction::new(p, q).ok())
        })
        .collect();
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaEntry {
    pub fraction: Fraction,
    pub value: f64,
    pub configuration: PeriodicConfiguration,
}

/// Minimal average action over the Farey fractions of a given depth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaProfile {
    pub entries: Vec<BetaEntry>,
    pub depth: u64,
    pub source: GeneratingFunction,
}

impl BetaProfile {
    pub fn get(&self, at: Fraction) -> Option<f64> {
        self.position(at).map(|i| self.entries[i].value)
    }

    fn position(&self, at: Fraction) -> Option<usize> {
        self.entries.binary_search_by(|e| e.fraction.cmp(&at)).ok()
    }

    /// The profile as sampled convex data, with `p/q` labels.
    pub fn to_profile(&self) -> SampledConvexProfile {
        SampledConvexProfile::new(
            self.entries.iter().map(|e| (e.fraction.value(), e.value)).collect(),
            self.source.describe(),
        )
        .expect("Farey abscissae are strictly increasing")
        .with_labels(self.entries.iter().map(|e| e.fraction.to_string()).collect())
    }
}

pub fn beta_profile(
    gf: &GeneratingFunction,
    depth: u64,
    restarts: usize,
    seed: u64,
) -> Result<BetaProfile, FkError> {
    beta_profile_with(gf, depth, restarts, seed, &MinimizerOptions::default())
}

/// Fractions are minimized in parallel; each one draws from its own seeded
/// stream, so the result does not depend on scheduling.
pub fn beta_profile_with(
    gf: &GeneratingFunction,
    depth: u64,
    restarts: usize,
    seed: u64,
    opts: &MinimizerOptions,
) -> Result<BetaProfile, FkError> {
    if depth < 2 {
        return Err(FkError::DepthTooSmall(depth));
    }
    let entries = farey_fractions(depth)
        .into_par_iter()
        .map(|fraction| {
            let configuration =
                minimize_periodic_with(gf, fraction.p, fraction.q as usize, restarts, seed, opts)
                    .map_err(|e| FkError::AtFraction { fraction, source: Box::new(e) })?;
            Ok(BetaEntry { fraction, value: configuration.average_action, configuration })
        })
        .collect::<Result<Vec<_>, FkError>>()?;
    let profile = BetaProfile { entries, depth, source: gf.clone() };
    profile.to_profile().certify(PROFILE_CONVEX_TOL).map_err(FkError::NotConvex)?;
    Ok(profile)
}

/// Difference quotients against the nearest and next-nearest sample on one side.
fn side_quotients(profile: &BetaProfile, i: usize, left: bool) -> Option<[(f64, f64); 2]> {
    let e = &profile.entries;
    let at = e[i].fraction.value();
    let pick = |j: usize| {
        let d = e[j].fraction.value() - at;
        (d.abs(), (e[j].value - e[i].value) / d)
    };
    if left {
        (i >= 2).then(|| [pick(i - 1), pick(i - 2)])
    } else {
        (i + 2 < e.len()).then(|| [pick(i + 1), pick(i + 2)])
    }
}

/// Right minus left difference quotient at `at` against its nearest Farey
/// neighbours, without extrapolation.
pub fn raw_corner_gap(profile: &BetaProfile, at: Fraction) -> Result<f64, FkError> {
    let i = profile.position(at).ok_or(FkError::MissingNeighbours(at))?;
    let l = side_quotients(profile, i, true).ok_or(FkError::MissingNeighbours(at))?;
    let r = side_quotients(profile, i, false).ok_or(FkError::MissingNeighbours(at))?;
    Ok(r[0].1 - l[0].1)
}

/// Jump of the one-sided derivatives of beta at `at`.
///
/// On each side the quotients against the nearest and next-nearest Farey
/// neighbours are extrapolated linearly to zero step; this removes the
/// curvature term that a raw quotient carries at smooth points. The result is
/// clamped at zero.
pub fn corner_gap(profile: &BetaProfile, at: Fraction) -> Result<f64, FkError> {
    let i = profile.position(at).ok_or(FkError::MissingNeighbours(at))?;
    let extrapolate = |[(d1, s1), (d2, s2)]: [(f64, f64); 2]| s1 - (s2 - s1) * d1 / (d2 - d1);
    let l = side_quotients(profile, i, true).ok_or(FkError::MissingNeighbours(at))?;
    let r = side_quotients(profile, i, false).ok_or(FkError::MissingNeighbours(at))?;
    Ok((extrapolate(r) - extrapolate(l)).max(0.0))
}

pub fn alpha_from_beta(profile: &BetaProfile, dual_grid: &[f64]) -> Result<SampledConvexProfile, FkError> {
    let tol = Tolerances { convex: PROFILE_CONVEX_TOL, ..Tolerances::default() };
    Ok(legendre_transform(&profile.to_profile(), dual_grid, &tol)?)
}
