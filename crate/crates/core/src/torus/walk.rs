use serde::{Serialize, Serializer};

use super::IrrationalPair;

/// A unit lattice step; `Right` adds `alpha` to the height and `Up` adds `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Right,
    Up,
    Left,
    Down,
}

impl Step {
    pub fn delta(self) -> (i64, i64) {
        match self {
            Step::Right => (1, 0),
            Step::Up => (0, 1),
            Step::Left => (-1, 0),
            Step::Down => (0, -1),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Step::Right => 'R',
            Step::Up => 'U',
            Step::Left => 'L',
            Step::Down => 'D',
        }
    }
}

impl Serialize for Step {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_char(self.letter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepSequence {
    pub origin: (i64, i64),
    pub steps: Vec<Step>,
}

impl StepSequence {
    pub fn new(steps: Vec<Step>) -> Self {
        StepSequence { origin: (0, 0), steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The `len() + 1` visited lattice points, origin first.
    pub fn positions(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        std::iter::once(self.origin).chain(self.steps.iter().scan(self.origin, |p, s| {
            let (dx, dy) = s.delta();
            *p = (p.0 + dx, p.1 + dy);
            Some(*p)
        }))
    }

    pub fn letters(&self) -> String {
        self.steps.iter().map(|s| s.letter()).collect()
    }
}

/// Fractional part of `a k` as `(frac, err)`: `a k = n + frac + err` with
/// `n` an integer, `frac` in `[0, 1)` and `err` the exact rounding error of
/// the product.
fn split_product(a: f64, k: i64) -> (f64, f64, f64) {
    let kf = k as f64;
    let p = a * kf;
    let err = a.mul_add(kf, -p);
    let n = p.floor();
    (n, p - n, err)
}

/// `alpha x + beta y` as an integer part and a fraction in `[0, 1)`.
///
/// The products are split exactly with fused multiply-adds, so the result is
/// within a few ulps of 1 for any `|x|, |y| < 2^53`, however far the walk has
/// gone. Summing step increments instead would drift linearly in the length.
pub fn split_height(alpha: f64, beta: f64, x: i64, y: i64) -> (i64, f64) {
    let (na, fa, ea) = split_product(alpha, x);
    let (nb, fb, eb) = split_product(beta, y);
    let s = (fa + fb) + (ea + eb);
    let ns = s.floor();
    let mut frac = s - ns;
    let mut int = na + nb + ns;
    if frac >= 1.0 {
        frac = 0.0;
        int += 1.0;
    }
    (int as i64, frac)
}

/// `(alpha x + beta y) mod 1`.
pub fn linear_height(alpha: f64, beta: f64, x: i64, y: i64) -> f64 {
    split_height(alpha, beta, x, y).1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightTrace {
    pub alpha: f64,
    pub beta: f64,
    /// One value per visited point, origin included.
    pub values: Vec<f64>,
}

pub fn heights(seq: &StepSequence, pair: &IrrationalPair) -> HeightTrace {
    let values = seq.positions().map(|(x, y)| linear_height(pair.alpha, pair.beta, x, y)).collect();
    HeightTrace { alpha: pair.alpha, beta: pair.beta, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn arithmetic_progression() {
        let pair = IrrationalPair::unchecked(0.3, 0.123).unwrap();
        let t = heights(&StepSequence::new(vec![Step::Right; 5]), &pair);
        let want = [0.0, 0.3, 0.6, 0.9, 0.2, 0.5];
        for (v, w) in t.values.iter().zip(want) {
            assert!((v - w).abs() < 1e-15, "{v} vs {w}");
        }
    }

    #[test]
    fn empty_sequence_is_the_origin() {
        let pair = IrrationalPair::new(2f64.sqrt(), 3f64.sqrt()).unwrap();
        assert_eq!(heights(&StepSequence::new(vec![]), &pair).values, vec![0.0]);
    }

    #[test]
    fn far_heights_stay_accurate() {
        // (sqrt2 - 1) 10^7 = 4142135.62373095048801688...; the float slope
        // itself is off by ~1e-17, which the product magnifies to ~1e-10.
        let h = linear_height(2f64.sqrt() - 1.0, 0.0, 10_000_000, 0);
        assert!((h - 0.623_730_950_488_016_9).abs() < 1e-9, "{h}");
        let (n, f) = split_height(0.5, 0.25, 3, 2);
        assert_eq!((n, f), (2, 0.0));
        assert_eq!(split_height(0.3, 0.0, -1, 0).0, -1);
    }

    proptest! {
        #[test]
        fn steps_are_unit_and_heights_recur(
            raw in prop::collection::vec(0u8..4, 0..200),
            a in 0.0f64..1.0,
            b in 0.0f64..1.0,
        ) {
            let steps: Vec<Step> = raw.iter().map(|&r| [Step::Right, Step::Up, Step::Left, Step::Down][r as usize]).collect();
            let seq = StepSequence::new(steps);
            let pos: Vec<_> = seq.positions().collect();
            prop_assert_eq!(pos.len(), seq.len() + 1);
            for w in pos.windows(2) {
                prop_assert_eq!((w[1].0 - w[0].0).abs() + (w[1].1 - w[0].1).abs(), 1);
            }
            let pair = IrrationalPair::unchecked(a, b).unwrap();
            let t = heights(&seq, &pair);
            for (k, w) in t.values.windows(2).enumerate() {
                let d = (w[1] - w[0]).rem_euclid(1.0);
                let want = match seq.steps[k] {
                    Step::Right => a,
                    Step::Up => b,
                    Step::Left => 1.0 - a,
                    Step::Down => 1.0 - b,
                };
                let err = (d - want).rem_euclid(1.0);
                prop_assert!(err.min(1.0 - err) <= 1e-12);
            }
        }
    }
}
