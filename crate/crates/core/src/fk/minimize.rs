use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{gcd, FkError, GeneratingFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizerOptions {
    /// Cap on descent plus Newton steps for each start.
    pub max_iterations: usize,
    /// Required max-norm of the action gradient.
    pub gradient_tolerance: f64,
    /// Gradient level at which descent hands over to Newton.
    pub newton_switch: f64,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        MinimizerOptions { max_iterations: 100_000, gradient_tolerance: 1e-10, newton_switch: 1e-3 }
    }
}

/// One period `x_0 .. x_{q-1}` of a configuration with `x_{i+q} = x_i + p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicConfiguration {
    pub p: i64,
    pub q: usize,
    pub positions: Vec<f64>,
    pub average_action: f64,
    /// Gradient residual at return.
    pub residual: f64,
}

impl PeriodicConfiguration {
    fn from_positions(gf: &GeneratingFunction, p: i64, mut positions: Vec<f64>) -> Self {
        let shift = positions[0].floor();
        for x in &mut positions {
            *x -= shift;
        }
        let q = positions.len();
        PeriodicConfiguration {
            p,
            q,
            average_action: gf.action(&positions, p) / q as f64,
            residual: gf.residual(&positions, p),
            positions,
        }
    }

    pub fn recompute_action(&self, gf: &GeneratingFunction) -> f64 {
        gf.action(&self.positions, self.p) / self.q as f64
    }

    /// True when the points `x_i mod 1` sit on the circle in the cyclic
    /// order of the rigid rotation by `p/q`.
    pub fn is_cyclically_ordered(&self) -> bool {
        let q = self.q as i64;
        if q == 1 {
            return true;
        }
        let mut ranked: Vec<(f64, i64)> =
            self.positions.iter().enumerate().map(|(i, x)| (x - x.floor(), i as i64)).collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        if ranked.windows(2).any(|w| w[0].0 == w[1].0) {
            return false;
        }
        // Rigid rotation visits index r * p^{-1} at rank r.
        let inv = (1..q).find(|&t| (t * self.p).rem_euclid(q) == 1).expect("gcd(p, q) = 1");
        (0..self.q).all(|r| {
            let a = ranked[r].1;
            let b = ranked[(r + 1) % self.q].1;
            (b - a).rem_euclid(q) == inv
        })
    }
}

/// Cholesky solve of `(a + mu I) x = rhs` for a dense symmetric matrix.
fn solve_shifted(a: &[f64], n: usize, mu: f64, rhs: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(1.0, f64::max);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j] + if i == j { mu } else { 0.0 };
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 1e-14 * scale {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = rhs.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    Some(y)
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

/// Active-set descent for a table potential. Inside a product of table cells
/// the action is an exact quadratic, so each step is a Newton step on the
/// sites not pinned to a knot, cut short at the first cell boundary.
fn descend_piecewise(
    gf: &GeneratingFunction,
    p: i64,
    mut x: Vec<f64>,
    opts: &MinimizerOptions,
) -> (Vec<f64>, bool) {
    let q = x.len();
    let m = gf.table_resolution().expect("table potential") as f64;
    for _ in 0..opts.max_iterations {
        if gf.residual(&x, p) <= opts.gradient_tolerance {
            return (x, true);
        }
        let g = gf.descent_gradient(&x, p);
        let knots = gf.knot_sites(&x);
        let pinned: Vec<bool> = (0..q).map(|i| knots.contains(&i) && g[i] == 0.0).collect();
        let mut h = gf.hessian(&x);
        for i in (0..q).filter(|&i| pinned[i]) {
            for j in 0..q {
                h[i * q + j] = 0.0;
                h[j * q + i] = 0.0;
            }
            h[i * q + i] = 1.0;
        }
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        // With nothing pinned the Laplacian is singular and a unit shift keeps
        // the translation mode from swamping the step.
        let mu = if pinned.iter().any(|&b| b) { 1e-12 } else { 1.0 };
        let Some(d) = solve_shifted(&h, q, mu, &rhs) else {
            return (x, false);
        };
        // Largest step that keeps every moving site inside its current cell.
        let mut t = 1.0;
        let mut hit = None;
        for i in 0..q {
            if d[i] == 0.0 {
                continue;
            }
            let u = x[i] * m;
            let on_knot = knots.contains(&i);
            let boundary = if d[i] > 0.0 {
                if on_knot {
                    u.round() + 1.0
                } else {
                    u.floor() + 1.0
                }
            } else if on_knot {
                u.round() - 1.0
            } else {
                u.ceil() - 1.0
            } / m;
            let ti = (boundary - x[i]) / d[i];
            if ti < t {
                t = ti;
                hit = Some((i, boundary));
            }
        }
        x = axpy(&x, t, &d);
        if let Some((i, boundary)) = hit {
            x[i] = boundary;
        }
    }
    let done = gf.residual(&x, p) <= opts.gradient_tolerance;
    (x, done)
}

/// Local minimization from one start. Returns positions and whether the
/// residual reached the tolerance.
fn descend(gf: &GeneratingFunction, p: i64, mut x: Vec<f64>, opts: &MinimizerOptions) -> (Vec<f64>, bool) {
    if !gf.is_smooth() {
        return descend_piecewise(gf, p, x, opts);
    }
    let q = x.len();
    let mut iterations = 0;
    let mut f = gf.action(&x, p);

    // Armijo gradient descent until the Newton basin.
    let mut step = 0.25;
    while iterations < opts.max_iterations {
        let g = gf.gradient(&x, p);
        if gf.residual(&x, p) <= opts.gradient_tolerance {
            return (x, true);
        }
        if max_norm(&g) <= opts.newton_switch {
            break;
        }
        let g2: f64 = g.iter().map(|v| v * v).sum();
        loop {
            let trial = axpy(&x, -step, &g);
            let ft = gf.action(&trial, p);
            if ft <= f - 1e-4 * step * g2 {
                x = trial;
                f = ft;
                break;
            }
            step *= 0.5;
            if step < 1e-16 {
                break;
            }
        }
        if step < 1e-16 {
            // Descent stalled; leave the rest to Newton.
            break;
        }
        step = (step * 2.0).min(1.0);
        iterations += 1;
    }

    // Levenberg-damped Newton polishing.
    let mut mu = 0.0f64;
    while iterations < opts.max_iterations {
        iterations += 1;
        if gf.residual(&x, p) <= opts.gradient_tolerance {
            return (x, true);
        }
        let g = gf.gradient(&x, p);
        let gnorm = max_norm(&g);
        let h = gf.hessian(&x);
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let Some(d) = solve_shifted(&h, q, mu.max(1e-12), &rhs) else {
            mu = (mu * 10.0).max(1e-8);
            continue;
        };
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1e-6 {
            let trial = axpy(&x, t, &d);
            let ft = gf.action(&trial, p);
            let decreases = ft <= f + 1e-4 * t * slope.min(0.0);
            if decreases || max_norm(&gf.gradient(&trial, p)) < gnorm {
                x = trial;
                f = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if accepted {
            mu /= 10.0;
        } else {
            mu = (mu * 10.0).max(1e-8);
            if mu > 1e8 {
                // Newton is stuck; fall back to one plain descent step.
                let trial = axpy(&x, -1e-3, &g);
                f = gf.action(&trial, p);
                x = trial;
                mu = 0.0;
            }
        }
    }
    let done = gf.residual(&x, p) <= opts.gradient_tolerance;
    (x, done)
}

/// Seed for one fraction, so that profiles do not depend on evaluation order.
fn fraction_seed(seed: u64, p: i64, q: usize) -> u64 {
    let mut z = seed ^ (p as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (q as u64).rotate_left(32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn minimize_periodic(
    gf: &GeneratingFunction,
    p: i64,
    q: usize,
    restarts: usize,
    seed: u64,
) -> Result<PeriodicConfiguration, FkError> {
    minimize_periodic_with(gf, p, q, restarts, seed, &MinimizerOptions::default())
}

/// Best local minimizer over the rigid rotation start and `restarts` random
/// perturbations of it.
pub fn minimize_periodic_with(
    gf: &GeneratingFunction,
    p: i64,
    q: usize,
    restarts: usize,
    seed: u64,
    opts: &MinimizerOptions,
) -> Result<PeriodicConfiguration, FkError> {
    if q == 0 || gcd(p.unsigned_abs(), q as u64) != 1 {
        return Err(FkError::InvalidFraction { p, q });
    }
    if restarts == 0 {
        return Err(FkError::NoRestarts);
    }
    let rigid: Vec<f64> = (0..q).map(|i| (i as i64 * p) as f64 / q as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(fraction_seed(seed, p, q));
    let starts = std::iter::once(rigid.clone()).chain(
        (0..restarts).map(|_| rigid.iter().map(|x| x + rng.gen_range(-0.5..0.5)).collect::<Vec<f64>>()),
    );

    let mut best: Option<PeriodicConfiguration> = None;
    let mut best_failed: Option<PeriodicConfiguration> = None;
    for start in starts.collect::<Vec<_>>() {
        let (x, converged) = descend(gf, p, start, opts);
        let c = PeriodicConfiguration::from_positions(gf, p, x);
        let slot = if converged { &mut best } else { &mut best_failed };
        if slot.as_ref().is_none_or(|b| c.average_action < b.average_action) {
            *slot = Some(c);
        }
    }
    match (best, best_failed) {
        (Some(c), _) => Ok(c),
        (None, Some(c)) => Err(FkError::NotConverged { p, q, residual: c.residual, best: Box::new(c) }),
        (None, None) => unreachable!("at least one start"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn integrable_half_turn() {
        let gf = GeneratingFunction::standard(0.0).unwrap();
        let c = minimize_periodic(&gf, 1, 2, 4, 7).unwrap();
        assert!((c.average_action - 0.125).abs() < 1e-12);
        assert!((c.positions[1] - c.positions[0] - 0.5).abs() < 1e-9);
        assert!(c.residual <= 1e-10);
    }

    #[test]
    fn fixed_point_sits_at_potential_minimum() {
        let gf = GeneratingFunction::standard(1.0).unwrap();
        let c = minimize_periodic(&gf, 0, 1, 4, 1).unwrap();
        assert!(c.average_action.abs() < 1e-15);
        let x = c.positions[0];
        assert!((x - x.round()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let gf = GeneratingFunction::standard(1.0).unwrap();
        assert!(matches!(minimize_periodic(&gf, 2, 4, 1, 0), Err(FkError::InvalidFraction { .. })));
        assert!(matches!(minimize_periodic(&gf, 1, 2, 0, 0), Err(FkError::NoRestarts)));
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let gf = GeneratingFunction::standard(1.0).unwrap();
        let opts = MinimizerOptions { max_iterations: 2, ..Default::default() };
        match minimize_periodic_with(&gf, 3, 7, 2, 5, &opts) {
            Err(FkError::NotConverged { residual, best, .. }) => {
                assert!(residual > 1e-10);
                assert_eq!(best.q, 7);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn table_potential_matches_standard() {
        let m = 4096;
        let std = GeneratingFunction::standard(1.0).unwrap();
        let values = (0..m).map(|j| std.v(j as f64 / m as f64)).collect();
        let table = GeneratingFunction::table(values).unwrap();
        for (p, q) in [(0, 1), (1, 2), (1, 3)] {
            let a = minimize_periodic(&std, p, q, 4, 3).unwrap().average_action;
            let b = minimize_periodic(&table, p, q, 4, 3).unwrap().average_action;
            assert!((a - b).abs() < 1e-6, "{p}/{q}: {a} vs {b}");
        }
    }

    #[test]
    fn cyclic_order_check_detects_disorder() {
        let c = PeriodicConfiguration {
            p: 1,
            q: 3,
            positions: vec![0.0, 0.3, 0.7],
            average_action: 0.0,
            residual: 0.0,
        };
        assert!(c.is_cyclically_ordered());
        let c = PeriodicConfiguration { positions: vec![0.0, 0.7, 0.3], ..c };
        assert!(!c.is_cyclically_ordered());
        let c = PeriodicConfiguration { p: 2, positions: vec![0.1, 0.75, 1.4], ..c };
        assert!(c.is_cyclically_ordered());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn minimizers_are_monotone_and_stationary(k in 0.0f64..3.0, q in 1usize..9, p in -8i64..9, seed in 0u64..1000) {
            prop_assume!(gcd(p.unsigned_abs(), q as u64) == 1);
            let gf = GeneratingFunction::standard(k).unwrap();
            let c = minimize_periodic(&gf, p, q, 3, seed).unwrap();
            prop_assert!(c.residual <= 1e-10);
            prop_assert!((c.recompute_action(&gf) - c.average_action).abs() <= 1e-12);
            prop_assert!(c.is_cyclically_ordered());
        }
    }
}
