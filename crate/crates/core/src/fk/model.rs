use std::f64::consts::PI;

use serde::Serialize;

use super::FkError;

/// A 1-periodic on-site potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Potential {
    /// `K/(2 pi)^2 (1 - cos 2 pi x)`.
    Standard { k: f64 },
    /// Values at `j/m` for `j = 0..m`, linearly interpolated and periodic.
    Table { values: Vec<f64> },
}

/// Bond action `h(x, x') = (x' - x)^2 / 2 + V(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratingFunction {
    potential: Potential,
}

impl GeneratingFunction {
    pub fn standard(k: f64) -> Result<Self, FkError> {
        if !k.is_finite() {
            return Err(FkError::InvalidPotential("K must be finite".into()));
        }
        Ok(GeneratingFunction { potential: Potential::Standard { k } })
    }

    pub fn table(values: Vec<f64>) -> Result<Self, FkError> {
        if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
            return Err(FkError::InvalidPotential(
                "a potential table needs at least two finite values".into(),
            ));
        }
        Ok(GeneratingFunction { potential: Potential::Table { values } })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn describe(&self) -> String {
        match &self.potential {
            Potential::Standard { k } => format!("fk K={k}"),
            Potential::Table { values } => format!("fk table m={}", values.len()),
        }
    }

    /// Knot cell and offset for a table potential.
    fn locate(values: &[f64], x: f64) -> (usize, f64) {
        let m = values.len();
        let u = (x - x.floor()) * m as f64;
        let j = (u.floor() as usize).min(m - 1);
        (j, u - j as f64)
    }

    pub fn v(&self, x: f64) -> f64 {
        match &self.potential {
            Potential::Standard { k } => k / (4.0 * PI * PI) * (1.0 - (2.0 * PI * x).cos()),
            Potential::Table { values } => {
                let (j, t) = Self::locate(values, x);
                let next = values[(j + 1) % values.len()];
                values[j] + t * (next - values[j])
            }
        }
    }

    /// Derivative; for tables the right derivative.
    pub fn dv(&self, x: f64) -> f64 {
        match &self.potential {
            Potential::Standard { k } => k / (2.0 * PI) * (2.0 * PI * x).sin(),
            Potential::Table { values } => {
                let m = values.len();
                let (j, _) = Self::locate(values, x);
                (values[(j + 1) % m] - values[j]) * m as f64
            }
        }
    }

    pub fn d2v(&self, x: f64) -> f64 {
        match &self.potential {
            Potential::Standard { k } => k * (2.0 * PI * x).cos(),
            Potential::Table { .. } => 0.0,
        }
    }

    /// Left and right derivatives at `x`; they differ only at table knots.
    pub fn subgradient(&self, x: f64) -> (f64, f64) {
        match &self.potential {
            Potential::Standard { .. } => {
                let d = self.dv(x);
                (d, d)
            }
            Potential::Table { values } => {
                let m = values.len() as f64;
                let u = x * m;
                let knot = u.round();
                if (u - knot).abs() <= 1e-9 {
                    let at = knot / m;
                    let right = self.dv(at + 0.25 / m);
                    let left = self.dv(at - 0.25 / m);
                    (left, right)
                } else {
                    let d = self.dv(x);
                    (d, d)
                }
            }
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.potential, Potential::Standard { .. })
    }

    /// Indices of sites sitting on a table knot, where the potential has a kink.
    pub fn knot_sites(&self, x: &[f64]) -> Vec<usize> {
        match &self.potential {
            Potential::Standard { .. } => Vec::new(),
            Potential::Table { values } => {
                let m = values.len() as f64;
                (0..x.len()).filter(|&i| ((x[i] * m) - (x[i] * m).round()).abs() <= 1e-9).collect()
            }
        }
    }

    pub fn table_resolution(&self) -> Option<usize> {
        match &self.potential {
            Potential::Standard { .. } => None,
            Potential::Table { values } => Some(values.len()),
        }
    }

    pub fn is_even(&self) -> bool {
        match &self.potential {
            Potential::Standard { .. } => true,
            Potential::Table { values } => {
                let m = values.len();
                (1..m).all(|j| (values[j] - values[m - j]).abs() <= 1e-15 * (1.0 + values[j].abs()))
            }
        }
    }

    pub fn bond(&self, x: f64, x_next: f64) -> f64 {
        let d = x_next - x;
        d * d / 2.0 + self.v(x)
    }

    fn neighbours(x: &[f64], p: i64, i: usize) -> (f64, f64) {
        let q = x.len();
        let prev = if i == 0 { x[q - 1] - p as f64 } else { x[i - 1] };
        let next = if i + 1 == q { x[0] + p as f64 } else { x[i + 1] };
        (prev, next)
    }

    /// Total action of one period, `sum h(x_i, x_{i+1})` with `x_q = x_0 + p`.
    pub fn action(&self, x: &[f64], p: i64) -> f64 {
        (0..x.len()).map(|i| self.bond(x[i], Self::neighbours(x, p, i).1)).sum()
    }

    pub fn gradient(&self, x: &[f64], p: i64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let (prev, next) = Self::neighbours(x, p, i);
                (x[i] - prev) - (next - x[i]) + self.dv(x[i])
            })
            .collect()
    }

    /// Minimum-norm element of the subdifferential, sitewise; the plain
    /// gradient for smooth potentials.
    pub fn descent_gradient(&self, x: &[f64], p: i64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let (prev, next) = Self::neighbours(x, p, i);
                let elastic = (x[i] - prev) - (next - x[i]);
                let (left, right) = self.subgradient(x[i]);
                // Moving left uses the left slope and moving right the right one.
                if elastic + left > 0.0 && elastic + right >= 0.0 {
                    elastic + left
                } else if elastic + left <= 0.0 && elastic + right < 0.0 {
                    elastic + right
                } else if left <= right {
                    0.0
                } else {
                    // Concave knot: leave along the steeper side.
                    if elastic + left >= -(elastic + right) {
                        elastic + left
                    } else {
                        elastic + right
                    }
                }
            })
            .collect()
    }

    /// Max over sites of the steepest one-sided descent rate; equals the
    /// gradient max-norm for smooth potentials.
    pub fn residual(&self, x: &[f64], p: i64) -> f64 {
        (0..x.len())
            .map(|i| {
                let (prev, next) = Self::neighbours(x, p, i);
                let elastic = (x[i] - prev) - (next - x[i]);
                let (left, right) = self.subgradient(x[i]);
                (elastic + left).max(-(elastic + right)).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// Dense cyclic tridiagonal Hessian, row major.
    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let q = x.len();
        let mut h = vec![0.0; q * q];
        for i in 0..q {
            h[i * q + i] += 2.0 + self.d2v(x[i]);
            h[i * q + (i + 1) % q] -= 1.0;
            h[i * q + (i + q - 1) % q] -= 1.0;
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn standard_potential_values() {
        let gf = GeneratingFunction::standard(1.0).unwrap();
        assert_eq!(gf.v(0.0), 0.0);
        assert!((gf.v(0.5) - 2.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!((gf.v(1.3) - gf.v(0.3)).abs() < 1e-15);
    }

    #[test]
    fn table_interpolates_and_wraps() {
        let gf = GeneratingFunction::table(vec![0.0, 1.0, 0.5, 0.25]).unwrap();
        assert!((gf.v(0.125) - 0.5).abs() < 1e-15);
        assert!((gf.v(0.875) - 0.125).abs() < 1e-15);
        assert!((gf.v(-0.125) - 0.125).abs() < 1e-15);
        assert_eq!(gf.subgradient(0.0), (-1.0, 4.0));
    }

    #[test]
    fn periodicity_of_bonds() {
        let gf = GeneratingFunction::standard(0.7).unwrap();
        let (x, y) = (0.31, 1.72);
        assert!((gf.bond(x + 1.0, y + 1.0) - gf.bond(x, y)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(
            k in 0.0f64..3.0,
            p in -3i64..4,
            xs in prop::collection::vec(-2.0f64..2.0, 1..9),
        ) {
            let gf = GeneratingFunction::standard(k).unwrap();
            let g = gf.gradient(&xs, p);
            let eps = 1e-6;
            for i in 0..xs.len() {
                let mut a = xs.clone();
                let mut b = xs.clone();
                a[i] += eps;
                b[i] -= eps;
                let fd = (gf.action(&a, p) - gf.action(&b, p)) / (2.0 * eps);
                prop_assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()));
            }
        }

        #[test]
        fn hessian_matches_gradient_differences(
            k in 0.0f64..3.0,
            p in -3i64..4,
            xs in prop::collection::vec(-2.0f64..2.0, 1..7),
        ) {
            let gf = GeneratingFunction::standard(k).unwrap();
            let q = xs.len();
            let h = gf.hessian(&xs);
            let eps = 1e-6;
            for j in 0..q {
                let mut a = xs.clone();
                let mut b = xs.clone();
                a[j] += eps;
                b[j] -= eps;
                let (ga, gb) = (gf.gradient(&a, p), gf.gradient(&b, p));
                for i in 0..q {
                    let fd = (ga[i] - gb[i]) / (2.0 * eps);
                    prop_assert!((fd - h[i * q + j]).abs() <= 1e-5 * (1.0 + fd.abs()));
                }
            }
        }
    }
}
