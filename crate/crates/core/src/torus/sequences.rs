use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{linear_height, IrrationalPair, Step, StepSequence, TorusError};

/// Walk whose heights avoid `]0, A[` with `A = min(alpha, beta - alpha)`,
/// for `0 < alpha < beta < 0.1`.
///
/// Step up until the height lands in `]-beta, 0[`. From `]-beta, -alpha[`
/// play right, up, up, left, which passes through `]-beta + alpha, 0[`,
/// `]alpha, beta[` and `]alpha + beta, 2 beta[` and returns `x` to 0. From
/// `]-alpha, 0[` a single up step lands in `]beta - alpha, beta[`. Every
/// position has `x` in `{0, 1}`.
pub fn avoid_interval_sequence(pair: &IrrationalPair, n: usize) -> Result<StepSequence, TorusError> {
    let (a, b) = (pair.alpha, pair.beta);
    if !(0.0 < a && a < b && b < 0.1) {
        return Err(TorusError::Precondition(format!(
            "the avoiding walk needs 0 < alpha < beta < 0.1, got ({a}, {b})"
        )));
    }
    if n == 0 {
        return Err(TorusError::Precondition("n must be at least 1".into()));
    }
    let mut steps = Vec::with_capacity(n);
    let mut script: VecDeque<Step> = VecDeque::new();
    let (mut x, mut y) = (0i64, 0i64);
    while steps.len() < n {
        let step = match script.pop_front() {
            Some(s) => s,
            None => {
                let h = linear_height(a, b, x, y);
                if h > 1.0 - b {
                    // Adding alpha wraps exactly when the height is in ]-alpha, 0[.
                    if linear_height(a, b, x + 1, y) > h {
                        script.extend([Step::Up, Step::Up, Step::Left]);
                        Step::Right
                    } else {
                        Step::Up
                    }
                } else {
                    Step::Up
                }
            }
        };
        let (dx, dy) = step.delta();
        x += dx;
        y += dy;
        steps.push(step);
    }
    Ok(StepSequence::new(steps))
}

/// Independent steps: right with probability `p_right`, else up.
pub fn random_sequence(p_right: f64, n: usize, seed: u64) -> Result<StepSequence, TorusError> {
    if !(0.0..=1.0).contains(&p_right) {
        return Err(TorusError::InvalidProbability(p_right));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (0..n).map(|_| if rng.gen::<f64>() < p_right { Step::Right } else { Step::Up }).collect();
    Ok(StepSequence::new(steps))
}

/// How binary letters become steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LetterMap {
    /// `0 -> +(1,0)`, `1 -> +(0,1)`.
    ZeroRight,
    /// `0 -> +(0,1)`, `1 -> +(1,0)`.
    ZeroUp,
}

impl LetterMap {
    pub fn step(self, letter: u8) -> Step {
        match (self, letter) {
            (LetterMap::ZeroRight, 0) | (LetterMap::ZeroUp, 1) => Step::Right,
            _ => Step::Up,
        }
    }

    pub fn apply(self, word: &[u8]) -> StepSequence {
        StepSequence::new(word.iter().map(|&l| self.step(l)).collect())
    }
}

impl fmt::Display for LetterMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LetterMap::ZeroRight => "zero-right",
            LetterMap::ZeroUp => "zero-up",
        })
    }
}

impl FromStr for LetterMap {
    type Err = TorusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero-right" => Ok(LetterMap::ZeroRight),
            "zero-up" => Ok(LetterMap::ZeroUp),
            other => {
                Err(TorusError::Parse(format!("letter map must be zero-right or zero-up, got {other:?}")))
            }
        }
    }
}

/// A substitution on the letters `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Substitution {
    images: [Vec<u8>; 2],
}

impl Substitution {
    pub fn new(zero: Vec<u8>, one: Vec<u8>) -> Result<Self, TorusError> {
        let images = [zero, one];
        for img in &images {
            if img.is_empty() || img.iter().any(|&l| l > 1) {
                return Err(TorusError::InvalidSubstitution(
                    "images must be nonempty words over {0, 1}".into(),
                ));
            }
        }
        let s = Substitution { images };
        if !s.is_primitive() {
            return Err(TorusError::InvalidSubstitution("substitution is not primitive".into()));
        }
        Ok(s)
    }

    /// `0 -> 1`, `1 -> 01`.
    pub fn fibonacci() -> Self {
        Substitution { images: [vec![1], vec![0, 1]] }
    }

    /// Some power of the 2x2 incidence matrix is positive; for two letters
    /// the square already decides it.
    fn is_primitive(&self) -> bool {
        let count = |j: usize, i: u8| self.images[j].iter().filter(|&&l| l == i).count() as u64;
        let m = [[count(0, 0), count(1, 0)], [count(0, 1), count(1, 1)]];
        let sq = |i: usize, j: usize| m[i][0] * m[0][j] + m[i][1] * m[1][j];
        (0..2).all(|i| (0..2).all(|j| m[i][j] > 0)) || (0..2).all(|i| (0..2).all(|j| sq(i, j) > 0))
    }

    pub fn apply(&self, word: &[u8]) -> Vec<u8> {
        word.iter().flat_map(|&l| self.images[l as usize].iter().copied()).collect()
    }

    /// Iterates until the word has at least `n` letters and truncates. The
    /// smallest power whose image of the seed extends the seed is iterated, so
    /// successive words are prefixes of one another.
    pub fn word(&self, seed: &[u8], n: usize) -> Result<Vec<u8>, TorusError> {
        if seed.is_empty() || seed.iter().any(|&l| l > 1) {
            return Err(TorusError::InvalidSubstitution("seed must be a nonempty binary word".into()));
        }
        let power = (1..=4)
            .find(|&p| {
                let mut w = seed.to_vec();
                for _ in 0..p {
                    w = self.apply(&w);
                }
                w.len() > seed.len() && w.starts_with(seed)
            })
            .unwrap_or(1);
        let mut w = seed.to_vec();
        while w.len() < n {
            let before = w.len();
            for _ in 0..power {
                w = self.apply(&w);
            }
            if w.len() <= before {
                return Err(TorusError::NotExpanding);
            }
        }
        w.truncate(n);
        Ok(w)
    }
}

pub fn substitution_sequence(
    rules: &Substitution,
    seed: &[u8],
    n: usize,
    map: LetterMap,
) -> Result<StepSequence, TorusError> {
    if n == 0 {
        return Err(TorusError::Precondition("n must be at least 1".into()));
    }
    Ok(map.apply(&rules.word(seed, n)?))
}

/// Prefix of the fixed point of the Fibonacci substitution that begins with 0.
pub fn fibonacci_word(n: usize) -> Vec<u8> {
    Substitution::fibonacci().word(&[0], n).expect("the Fibonacci substitution expands")
}

/// All binary words by length, then lexicographically, laid end to end:
/// `0 1 00 01 10 11 000 ...`.
pub fn all_words(n: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(n);
    let mut len = 1u32;
    while out.len() < n {
        for w in 0u64..1 << len {
            for bit in (0..len).rev() {
                out.push(((w >> bit) & 1) as u8);
            }
            if out.len() >= n {
                break;
            }
        }
        len += 1;
    }
    out.truncate(n);
    out
}

pub fn all_words_sequence(n: usize, map: LetterMap) -> StepSequence {
    map.apply(&all_words(n))
}
