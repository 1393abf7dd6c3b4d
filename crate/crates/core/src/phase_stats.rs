//! Statistics of the total phase applied by a chain of noisy phase shifters.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Averages of unit phasors below this modulus have no meaningful argument.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

/// Default histogram bin width.
pub const DEFAULT_BIN_WIDTH: f64 = PI / 50.0;

/// A phase in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PhaseSample(f64);

impl PhaseSample {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn wrap(theta: f64) -> PhaseSample {
    let w = theta - 2.0 * PI * (theta / (2.0 * PI)).round();
    PhaseSample(if w <= -PI { w + 2.0 * PI } else { w.min(PI) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseScheme {
    NoAvg,
    Whole,
    Each,
}

/// `deltas` is `M` rows (chain position) by `N` columns (copy), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDeltas<'a> {
    pub elements: usize,
    pub copies: usize,
    pub values: &'a [f64],
}

impl<'a> ChainDeltas<'a> {
    pub fn new(elements: usize, copies: usize, values: &'a [f64]) -> Result<Self> {
        if copies == 0 {
            return invalid("at least one copy is required");
        }
        if values.len() != elements * copies {
            return invalid(format!(
                "expected {}x{} deltas, got {}",
                elements,
                copies,
                values.len()
            ));
        }
        Ok(Self { elements, copies, values })
    }

    fn get(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.copies + j]
    }
}

fn argument(z: Complex64) -> Result<PhaseSample> {
    if z.norm() < AMPLITUDE_FLOOR {
        return Err(Error::UndefinedPhase);
    }
    Ok(wrap(z.arg()))
}

pub fn total_phase(deltas: &ChainDeltas<'_>, scheme: PhaseScheme) -> Result<PhaseSample> {
    let n = deltas.copies;
    match scheme {
        PhaseScheme::NoAvg => {
            if n != 1 {
                return invalid("the unaveraged chain has exactly one copy");
            }
            Ok(wrap(deltas.values.iter().sum()))
        }
        PhaseScheme::Whole => {
            let amp: Complex64 = (0..n)
                .map(|j| {
                    let total: f64 = (0..deltas.elements).map(|k| deltas.get(k, j)).sum();
                    Complex64::from_polar(1.0, total)
                })
                .sum();
            argument(amp / n as f64)
        }
        PhaseScheme::Each => {
            let amp = (0..deltas.elements).fold(Complex64::new(1.0, 0.0), |acc, k| {
                let avg: Complex64 =
                    (0..n).map(|j| Complex64::from_polar(1.0, deltas.get(k, j))).sum();
                acc * avg / n as f64
            });
            argument(amp)
        }
    }
}

/// Ordinary (not circular) sample variance with `n - 1` in the denominator.
pub fn sample_variance(samples: &[PhaseSample]) -> Result<f64> {
    if samples.len() < 2 {
        return invalid("need at least two samples");
    }
    // shifted by the first sample so constant data gives exactly zero
    let n = samples.len() as f64;
    let shift = samples[0].0;
    let (sum, sum_sq) = samples.iter().fold((0.0, 0.0), |(a, b), s| {
        let d = s.0 - shift;
        (a + d, b + d * d)
    });
    Ok(((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` edges spanning `[-pi, pi]`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(samples: &[PhaseSample], bin_width: f64) -> Result<Self> {
        if bin_width.is_nan() || bin_width <= 0.0 || bin_width > 2.0 * PI {
            return invalid("bin width must lie in (0, 2pi]");
        }
        let bins = (2.0 * PI / bin_width - 1e-9).ceil() as usize;
        let edges: Vec<f64> = (0..=bins)
            .map(|i| (-PI + i as f64 * bin_width).min(PI))
            .collect();
        let mut counts = vec![0u64; bins];
        for s in samples {
            let idx = (((s.0 + PI) / bin_width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{:.12e},{:.12e},{}", self.edges[i], self.edges[i + 1], c);
        }
        out
    }
}

pub fn samples_to_csv(samples: &[PhaseSample]) -> String {
    let mut out = String::from("index,phase\n");
    for (i, s) in samples.iter().enumerate() {
        let _ = writeln!(out, "{i},{:.12e}", s.0);
    }
    out
}
