//! Exact few-photon evolution through a network matrix.
//!
//! Transition amplitudes come from permanents of row/column-repeated
//! sub-blocks. Output states are enumerated in ascending lexicographic order of
//! their occupation vectors.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::ModeColumns;
use crate::error::{invalid, Error, Result};
use crate::linalg::{ryser, NetworkMatrix, PERMANENT_CAP};

/// Default cap on the photon number of simulated states.
pub const DEFAULT_PHOTON_CAP: usize = 4;

/// Probability sums are checked against this tolerance.
pub const NORMALISATION_TOL: f64 = 1e-9;

/// Occupation-number vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockState(Vec<u32>);

impl FockState {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    /// `|0, .., 1, .., 0>` with the photon in `mode`.
    pub fn single(mode_count: usize, mode: usize) -> Self {
        let mut occ = vec![0; mode_count];
        occ[mode] = 1;
        Self(occ)
    }

    pub fn vacuum(mode_count: usize) -> Self {
        Self(vec![0; mode_count])
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn mode_count(&self) -> usize {
        self.0.len()
    }

    pub fn photons(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }

    /// Mode index of every photon, repeated by occupation.
    pub fn photon_modes(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(m, &n)| std::iter::repeat_n(m, n as usize))
            .collect()
    }

    /// Embeds this state into a larger mode set, placing mode `i` at `positions[i]`.
    pub fn embed(&self, mode_count: usize, positions: &[usize]) -> Result<Self> {
        if positions.len() != self.0.len() || positions.iter().any(|&p| p >= mode_count) {
            return invalid("embedding positions do not fit the state");
        }
        let mut occ = vec![0; mode_count];
        for (i, &p) in positions.iter().enumerate() {
            occ[p] += self.0[i];
        }
        Ok(Self(occ))
    }

    fn factorial_product(&self) -> f64 {
        self.0
            .iter()
            .map(|&n| (1..=n).map(f64::from).product::<f64>())
            .product()
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Anything that can hand out network entries `U[output][input]`.
pub trait Transfer {
    fn mode_count(&self) -> usize;
    fn entry(&self, output: usize, input: usize) -> Complex64;
}

impl Transfer for NetworkMatrix {
    fn mode_count(&self) -> usize {
        self.dim()
    }

    fn entry(&self, output: usize, input: usize) -> Complex64 {
        self.get(output, input)
    }
}

impl Transfer for ModeColumns {
    fn mode_count(&self) -> usize {
        ModeColumns::mode_count(self)
    }

    fn entry(&self, output: usize, input: usize) -> Complex64 {
        self.get(output, input)
    }
}

/// All `n`-photon occupation vectors on `modes` modes, ascending lexicographic.
pub fn enumerate_states(modes: usize, photons: usize) -> Vec<FockState> {
    fn fill(prefix: &mut Vec<u32>, modes_left: usize, photons_left: usize, out: &mut Vec<FockState>) {
        if modes_left == 1 {
            prefix.push(photons_left as u32);
            out.push(FockState(prefix.clone()));
            prefix.pop();
            return;
        }
        for n in 0..=photons_left {
            prefix.push(n as u32);
            fill(prefix, modes_left - 1, photons_left - n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if modes == 0 {
        if photons == 0 {
            out.push(FockState(Vec::new()));
        }
        return out;
    }
    fill(&mut Vec::with_capacity(modes), modes, photons, &mut out);
    out
}

fn check_input<U: Transfer + ?Sized>(u: &U, input: &FockState, cap: usize) -> Result<()> {
    if input.mode_count() != u.mode_count() {
        return invalid(format!(
            "state has {} modes but the network has {}",
            input.mode_count(),
            u.mode_count()
        ));
    }
    let n = input.photons();
    if n > cap || n > PERMANENT_CAP {
        return Err(Error::ResourceLimit(format!(
            "{n} photons exceed the cap of {}",
            cap.min(PERMANENT_CAP)
        )));
    }
    Ok(())
}

fn amplitude_from_modes<U: Transfer + ?Sized>(
    u: &U,
    in_modes: &[usize],
    out_modes: &[usize],
    norm: f64,
) -> Complex64 {
    ryser(in_modes.len(), |r, c| u.entry(out_modes[r], in_modes[c])) / norm
}

/// `<out| U |in>`: permanent of the repeated sub-block over `sqrt(prod in! prod out!)`.
pub fn transition_amplitude<U: Transfer + ?Sized>(u: &U, input: &FockState, output: &FockState) -> Result<Complex64> {
    check_input(u, input, PERMANENT_CAP)?;
    if output.mode_count() != u.mode_count() {
        return invalid("output state does not match the network's mode count");
    }
    if input.photons() != output.photons() {
        return invalid(format!(
            "photon number mismatch: {} in, {} out",
            input.photons(),
            output.photons()
        ));
    }
    let norm = (input.factorial_product() * output.factorial_product()).sqrt();
    Ok(amplitude_from_modes(u, &input.photon_modes(), &output.photon_modes(), norm))
}

/// Probabilities over a fixed set of Fock states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDistribution {
    pub mode_count: usize,
    pub total_photons: usize,
    pub entries: Vec<(FockState, f64)>,
}

impl OutputDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn probability(&self, state: &FockState) -> f64 {
        self.entries
            .iter()
            .find(|(s, _)| s == state)
            .map_or(0.0, |(_, p)| *p)
    }

    /// Header `m0,m1,..,probability`, then one row per state.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for m in 0..self.mode_count {
            out.push_str(&format!("m{m},"));
        }
        out.push_str("probability\n");
        for (s, p) in &self.entries {
            for n in s.occupations() {
                out.push_str(&format!("{n},"));
            }
            out.push_str(&format!("{p:.12e}\n"));
        }
        out
    }
}

pub fn output_distribution<U: Transfer + ?Sized>(u: &U, input: &FockState) -> Result<OutputDistribution> {
    output_distribution_with_cap(u, input, DEFAULT_PHOTON_CAP)
}

/// `|<out|U|in>|^2` for every output state with the input's photon number.
pub fn output_distribution_with_cap<U: Transfer + ?Sized>(
    u: &U,
    input: &FockState,
    cap: usize,
) -> Result<OutputDistribution> {
    check_input(u, input, cap)?;
    let n = input.photons();
    let in_modes = input.photon_modes();
    let in_norm = input.factorial_product();
    let entries = enumerate_states(u.mode_count(), n)
        .into_iter()
        .map(|s| {
            let norm = (in_norm * s.factorial_product()).sqrt();
            let p = amplitude_from_modes(u, &in_modes, &s.photon_modes(), norm).norm_sqr();
            (s, p)
        })
        .collect();
    Ok(OutputDistribution {
        mode_count: u.mode_count(),
        total_photons: n,
        entries,
    })
}

/// Outcome of conditioning on vacuum outside the kept modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostselectionResult {
    pub p_success: f64,
    /// Renormalised distribution over the kept modes (in the order given);
    /// `None` when `p_success` is zero.
    pub conditional: Option<OutputDistribution>,
}

fn check_kept(mode_count: usize, kept: &[usize]) -> Result<()> {
    if kept.is_empty() {
        return invalid("at least one mode must be kept");
    }
    if kept.iter().any(|&m| m >= mode_count) {
        return invalid("kept mode out of range");
    }
    let mut sorted = kept.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != kept.len() {
        return invalid("kept modes must be distinct");
    }
    Ok(())
}

fn finish_postselection(
    kept_len: usize,
    photons: usize,
    restricted: Vec<(FockState, f64)>,
) -> PostselectionResult {
    let p_success: f64 = restricted.iter().map(|(_, p)| p).sum();
    let conditional = (p_success > 0.0).then(|| OutputDistribution {
        mode_count: kept_len,
        total_photons: photons,
        entries: restricted
            .into_iter()
            .map(|(s, p)| (s, p / p_success))
            .collect(),
    });
    PostselectionResult {
        p_success,
        conditional,
    }
}

/// Restricts a full distribution to outcomes with no photons outside `kept`.
pub fn postselect(d: &OutputDistribution, kept: &[usize]) -> Result<PostselectionResult> {
    check_kept(d.mode_count, kept)?;
    let restricted = d
        .entries
        .iter()
        .filter(|(s, _)| {
            s.occupations()
                .iter()
                .enumerate()
                .all(|(m, &n)| n == 0 || kept.contains(&m))
        })
        .map(|(s, p)| {
            let occ = kept.iter().map(|&m| s.occupations()[m]).collect();
            (FockState(occ), *p)
        })
        .collect();
    Ok(finish_postselection(kept.len(), d.total_photons, restricted))
}

/// Precomputed kept-mode outcomes for repeated evaluation against many networks.
#[derive(Debug, Clone)]
pub struct KeptOutcomes {
    kept: Vec<usize>,
    photons: usize,
    states: Vec<FockState>,
    rows: Vec<Vec<usize>>,
    norms: Vec<f64>,
}

impl KeptOutcomes {
    pub fn new(kept: &[usize], photons: usize) -> Self {
        let states = enumerate_states(kept.len(), photons);
        let rows = states
            .iter()
            .map(|s| s.photon_modes().into_iter().map(|i| kept[i]).collect())
            .collect();
        let norms = states.iter().map(FockState::factorial_product).collect();
        Self {
            kept: kept.to_vec(),
            photons,
            states,
            rows,
            norms,
        }
    }

    /// States over the kept modes, in kept-mode order.
    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    /// Unnormalised (joint) probability of every kept outcome.
    pub fn probabilities<U: Transfer + ?Sized>(&self, u: &U, input: &FockState) -> Result<Vec<f64>> {
        check_input(u, input, PERMANENT_CAP)?;
        check_kept(u.mode_count(), &self.kept)?;
        if input.photons() != self.photons {
            return invalid("input photon number differs from the prepared outcomes");
        }
        let in_modes = input.photon_modes();
        let in_norm = input.factorial_product();
        Ok(self
            .rows
            .iter()
            .zip(&self.norms)
            .map(|(rows, &n)| amplitude_from_modes(u, &in_modes, rows, (in_norm * n).sqrt()).norm_sqr())
            .collect())
    }
}

/// Post-selection computed directly from kept-mode amplitudes, without
/// enumerating outcomes that leak into the error modes.
pub fn postselected_distribution<U: Transfer + ?Sized>(
    u: &U,
    input: &FockState,
    kept: &[usize],
) -> Result<PostselectionResult> {
    check_kept(u.mode_count(), kept)?;
    let outcomes = KeptOutcomes::new(kept, input.photons());
    let probs = outcomes.probabilities(u, input)?;
    Ok(finish_postselection(
        kept.len(),
        input.photons(),
        outcomes.states.into_iter().zip(probs).collect(),
    ))
}

/// Norm of the input state propagated and projected onto the kept modes,
/// `perm(G) / prod in!` with the Gram matrix
/// `G[j][k] = sum_{i in kept} conj(U[i][j]) U[i][k]` over input photons.
pub fn projected_norm<U: Transfer + ?Sized>(u: &U, input: &FockState, kept: &[usize]) -> Result<f64> {
    check_input(u, input, PERMANENT_CAP)?;
    check_kept(u.mode_count(), kept)?;
    let in_modes = input.photon_modes();
    let n = in_modes.len();
    let mut gram = vec![Complex64::new(0.0, 0.0); n * n];
    for (a, &j) in in_modes.iter().enumerate() {
        for (b, &k) in in_modes.iter().enumerate() {
            gram[a * n + b] = kept.iter().map(|&i| u.entry(i, j).conj() * u.entry(i, k)).sum();
        }
    }
    Ok(ryser(n, |r, c| gram[r * n + c]).re / input.factorial_product())
}

/// `sum_s n_mode(s) p(s)`.
pub fn mode_expectation(d: &OutputDistribution, mode: usize) -> f64 {
    d.entries
        .iter()
        .map(|(s, p)| s.occupations().get(mode).copied().unwrap_or(0) as f64 * p)
        .sum()
}

/// `<n_a n_b>` over the distribution.
pub fn coincidence(d: &OutputDistribution, a: usize, b: usize) -> f64 {
    d.entries
        .iter()
        .map(|(s, p)| {
            let occ = s.occupations();
            occ.get(a).copied().unwrap_or(0) as f64 * occ.get(b).copied().unwrap_or(0) as f64 * p
        })
        .sum()
}
