//! Sampling the total applied phase of a chain of noisy phase shifters.

use ea_core::montecarlo::trial_rng;
use ea_core::phase_stats::{sample_variance, total_phase, ChainDeltas, PhaseSample, PhaseScheme};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Result;

pub const SCHEMES: [PhaseScheme; 3] = [PhaseScheme::NoAvg, PhaseScheme::Whole, PhaseScheme::Each];

pub fn scheme_name(s: PhaseScheme) -> &'static str {
    match s {
        PhaseScheme::NoAvg => "noavg",
        PhaseScheme::Whole => "whole",
        PhaseScheme::Each => "each",
    }
}

/// Copies used by a scheme: one without averaging.
pub fn copies(scheme: PhaseScheme, n: usize) -> usize {
    if scheme == PhaseScheme::NoAvg { 1 } else { n }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRun {
    pub variance: f64,
    pub elements: usize,
    pub redundancy: usize,
    pub runs: u64,
    pub seed: u64,
}

/// Run `r` draws standard normals from stream `(seed, r)` and scales them by
/// `sqrt(v)`, so sweeps over `v` share their randomness.
pub fn total_phases(run: &ChainRun, scheme: PhaseScheme) -> Result<Vec<PhaseSample>> {
    let n = copies(scheme, run.redundancy);
    let count = run.elements * n;
    let sd = run.variance.sqrt();
    let samples = (0..run.runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = trial_rng(run.seed, r);
            let deltas: Vec<f64> = (0..count).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
            total_phase(&ChainDeltas::new(run.elements, n, &deltas)?, scheme)
        })
        .collect::<ea_core::Result<Vec<_>>>()?;
    Ok(samples)
}

pub fn phase_variance(run: &ChainRun, scheme: PhaseScheme) -> Result<f64> {
    Ok(sample_variance(&total_phases(run, scheme)?)?)
}
