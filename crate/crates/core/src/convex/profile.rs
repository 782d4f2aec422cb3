use std::fmt;
use std::io::{BufRead, Write};

use serde::Serialize;

use super::ConvexError;

/// Tolerances shared by the convex-analysis routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub convex: f64,
    pub face: f64,
    pub corner: f64,
    pub dual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { convex: 1e-9, face: 1e-7, corner: 1e-4, dual: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub abscissa: f64,
    pub value: f64,
}

/// The worst interior sample lying above the chord of its two neighbours.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityViolation {
    pub indices: [usize; 3],
    pub points: [(f64, f64); 3],
    pub excess: f64,
}

impl fmt::Display for ConvexityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.points;
        write!(
            f,
            "convexity certificate fails at samples {:?}: ({}, {}) ({}, {}) ({}, {}) exceeds the chord by {:e}",
            self.indices, a.0, a.1, b.0, b.1, c.0, c.1, self.excess
        )
    }
}

/// A convex function of one variable known at finitely many abscissae.
///
/// Construction checks ordering and finiteness only; convexity is checked by
/// [`SampledConvexProfile::certify`] so that callers can choose the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledConvexProfile {
    samples: Vec<Sample>,
    labels: Option<Vec<String>>,
    provenance: String,
}

impl SampledConvexProfile {
    pub fn new(samples: Vec<(f64, f64)>, provenance: impl Into<String>) -> Result<Self, ConvexError> {
        if samples.is_empty() {
            return Err(ConvexError::Empty);
        }
        for (i, &(x, v)) in samples.iter().enumerate() {
            if !x.is_finite() || !v.is_finite() {
                return Err(ConvexError::NonFinite(i));
            }
            if i > 0 && x <= samples[i - 1].0 {
                return Err(ConvexError::NotIncreasing(i));
            }
        }
        Ok(SampledConvexProfile {
            samples: samples.into_iter().map(|(abscissa, value)| Sample { abscissa, value }).collect(),
            labels: None,
            provenance: provenance.into(),
        })
    }

    /// Samples `f` at the given abscissae.
    pub fn from_fn(
        abscissae: &[f64],
        f: impl Fn(f64) -> f64,
        provenance: impl Into<String>,
    ) -> Result<Self, ConvexError> {
        Self::new(abscissae.iter().map(|&x| (x, f(x))).collect(), provenance)
    }

    /// Attaches one free-text label per sample, written as a trailing comment column.
    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.samples.len(), "one label per sample");
        self.labels = Some(labels);
        self
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn abscissae(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.abscissa)
    }

    /// Index of the sample at `x`, allowing a relative slack of 1e-12.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let slack = 1e-12 * x.abs().max(1.0);
        let i = self.samples.partition_point(|s| s.abscissa < x - slack);
        (i < self.samples.len() && (self.samples[i].abscissa - x).abs() <= slack).then_some(i)
    }

    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.index_of(x).map(|i| self.samples[i].value)
    }

    /// Excess of each interior sample over the chord of its neighbours.
    pub fn chord_excess(&self) -> Vec<f64> {
        self.samples
            .windows(3)
            .map(|w| {
                let (a, b, c) = (w[0], w[1], w[2]);
                let t = (b.abscissa - a.abscissa) / (c.abscissa - a.abscissa);
                b.value - (a.value + t * (c.value - a.value))
            })
            .collect()
    }

    /// Discrete convexity certificate: no interior sample exceeds the chord of
    /// its neighbours by more than `tol`. Reports the worst offender.
    pub fn certify(&self, tol: f64) -> Result<(), ConvexityViolation> {
        let worst = self.chord_excess().into_iter().enumerate().max_by(|a, b| a.1.total_cmp(&b.1));
        match worst {
            Some((i, excess)) if excess > tol => {
                let s = &self.samples[i..i + 3];
                Err(ConvexityViolation {
                    indices: [i, i + 1, i + 2],
                    points: [
                        (s[0].abscissa, s[0].value),
                        (s[1].abscissa, s[1].value),
                        (s[2].abscissa, s[2].value),
                    ],
                    excess,
                })
            }
            _ => Ok(()),
        }
    }

    /// Smallest sampled value and its abscissa.
    pub fn min(&self) -> Sample {
        *self.samples.iter().min_by(|a, b| a.value.total_cmp(&b.value)).expect("profiles are never empty")
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# profile v1 dim=1 provenance={}", self.provenance)?;
        for (i, s) in self.samples.iter().enumerate() {
            write!(w, "{:.17e}\t{:.17e}", s.abscissa, s.value)?;
            if let Some(labels) = &self.labels {
                write!(w, "\t# {}", labels[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("profile text is utf-8")
    }

    pub fn read_from(r: impl BufRead) -> Result<Self, ConvexError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or(ConvexError::Parse { line: 1, message: "missing header".into() })?;
        let rest = header.strip_prefix("# profile v1").ok_or_else(|| ConvexError::Parse {
            line: 1,
            message: format!("expected '# profile v1' header, found {header:?}"),
        })?;
        let mut provenance = String::new();
        let mut fields = rest.trim();
        while !fields.is_empty() {
            if let Some(p) = fields.strip_prefix("provenance=") {
                provenance = p.to_string();
                break;
            }
            let (field, tail) = fields.split_once(char::is_whitespace).unwrap_or((fields, ""));
            if field != "dim=1" {
                return Err(ConvexError::Parse {
                    line: 1,
                    message: format!("unsupported header field {field:?}"),
                });
            }
            fields = tail.trim_start();
        }

        let mut samples = Vec::new();
        let mut labels = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            let lineno = k + 2;
            let (data, comment) = match line.split_once('#') {
                Some((d, c)) => (d, Some(c.trim().to_string())),
                None => (line.as_str(), None),
            };
            let mut cols = data.split_whitespace();
            let (Some(x), Some(v)) = (cols.next(), cols.next()) else {
                if data.trim().is_empty() {
                    continue;
                }
                return Err(ConvexError::Parse { line: lineno, message: "expected two columns".into() });
            };
            if cols.next().is_some() {
                return Err(ConvexError::Parse { line: lineno, message: "too many columns".into() });
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| ConvexError::Parse { line: lineno, message: format!("{s:?}: {e}") })
            };
            samples.push((parse(x)?, parse(v)?));
            labels.push(comment);
        }
        let profile = Self::new(samples, provenance)?;
        if labels.iter().all(Option::is_some) {
            Ok(profile.with_labels(labels.into_iter().flatten().collect()))
        } else {
            Ok(profile)
        }
    }

    pub fn from_text(text: &str) -> Result<Self, ConvexError> {
        Self::read_from(text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unordered_abscissae() {
        let err = SampledConvexProfile::new(vec![(0.0, 0.0), (0.0, 1.0)], "t").unwrap_err();
        assert!(matches!(err, ConvexError::NotIncreasing(1)));
    }

    #[test]
    fn certificate_reports_worst_triple() {
        let p =
            SampledConvexProfile::new(vec![(0.0, 0.0), (1.0, 0.2), (2.0, 0.0), (3.0, 5.0), (4.0, 0.0)], "t")
                .unwrap();
        let v = p.certify(1e-9).unwrap_err();
        assert_eq!(v.indices, [2, 3, 4]);
        assert!((v.excess - 5.0).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let xs: Vec<f64> = (0..7).map(|i| -1.0 + i as f64 / 3.0).collect();
        let p = SampledConvexProfile::from_fn(&xs, |x| (x * 1.1f64).exp(), "exp test")
            .unwrap()
            .with_labels((0..7).map(|i| format!("{i}/3")).collect());
        let back = SampledConvexProfile::from_text(&p.to_text()).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.provenance(), "exp test");
    }

    #[test]
    fn parse_rejects_bad_header() {
        assert!(SampledConvexProfile::from_text("0\t1\n").is_err());
        assert!(SampledConvexProfile::from_text("# profile v1 dim=2 provenance=x\n").is_err());
    }
}
