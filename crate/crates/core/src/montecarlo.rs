//! Reproducible noise-ensemble averages.
//!
//! Trial `t` draws from its own ChaCha8 stream `(master_seed, t)`. Trials are
//! grouped into fixed-size chunks; chunks may run on any thread but their
//! accumulators are merged in chunk order, so results do not depend on the
//! worker count.

use std::fmt;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{compile, compile_columns, sample_into, sample_realization, Circuit};
use crate::encoding::{encode, EncodedCircuit, EncoderKind, EncodingScheme, Strategy};
use crate::error::{invalid, Error, Result};
use crate::fock::{output_distribution, FockState, KeptOutcomes};

/// Trials per work unit.
pub const CHUNK: u64 = 1024;

pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Running first and second moments of a pair `(x, y)`; merge-stable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub m2_x: f64,
    pub m2_y: f64,
    pub c_xy: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        let n = self.n as f64;
        let dx = x - self.mean_x;
        let dy = y - self.mean_y;
        self.mean_x += dx / n;
        self.mean_y += dy / n;
        self.m2_x += dx * (x - self.mean_x);
        self.m2_y += dy * (y - self.mean_y);
        self.c_xy += dx * (y - self.mean_y);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let dx = other.mean_x - self.mean_x;
        let dy = other.mean_y - self.mean_y;
        let w = na * nb / n;
        self.mean_x += dx * nb / n;
        self.mean_y += dy * nb / n;
        self.m2_x += other.m2_x + dx * dx * w;
        self.m2_y += other.m2_y + dy * dy * w;
        self.c_xy += other.c_xy + dx * dy * w;
        self.n += other.n;
    }

    fn sample_var(m2: f64, n: u64) -> f64 {
        if n < 2 {
            0.0
        } else {
            (m2 / (n - 1) as f64).max(0.0)
        }
    }

    /// Mean of `x` with its standard error.
    pub fn estimate(&self) -> MCEstimate {
        MCEstimate {
            mean: self.mean_x,
            stderr: (Self::sample_var(self.m2_x, self.n) / self.n.max(1) as f64).sqrt(),
            trials: self.n,
        }
    }

    /// `E[x] / E[y]` with a delta-method standard error.
    pub fn ratio_estimate(&self) -> Result<MCEstimate> {
        if self.mean_y.is_nan() || self.mean_y <= 0.0 {
            return invalid("ratio denominator has zero mean");
        }
        let r = self.mean_x / self.mean_y;
        let vx = Self::sample_var(self.m2_x, self.n);
        let vy = Self::sample_var(self.m2_y, self.n);
        let cxy = if self.n < 2 { 0.0 } else { self.c_xy / (self.n - 1) as f64 };
        let var = ((vx - 2.0 * r * cxy + r * r * vy) / (self.mean_y * self.mean_y)).max(0.0);
        Ok(MCEstimate {
            mean: r,
            stderr: (var / self.n as f64).sqrt(),
            trials: self.n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Runs `trials` trials, each writing `width` pairs into its output slice.
/// `init` builds per-chunk scratch state.
pub fn run_trials<S, I, F>(trials: u64, master_seed: u64, width: usize, init: I, trial: F) -> Result<Vec<Moments>>
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut ChaCha8Rng, &mut [(f64, f64)]) -> Result<()> + Sync,
{
    if trials == 0 {
        return invalid("at least one trial is required");
    }
    let chunks = trials.div_ceil(CHUNK);
    let partials: Vec<Result<Vec<Moments>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut scratch = init();
            let mut acc = vec![Moments::default(); width];
            let mut out = vec![(0.0, 0.0); width];
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = trial_rng(master_seed, t);
                trial(&mut scratch, &mut rng, &mut out)?;
                for (a, &(x, y)) in acc.iter_mut().zip(&out) {
                    a.push(x, y);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![Moments::default(); width];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part?) {
            t.merge(&p);
        }
    }
    Ok(total)
}

/// Quantities evaluated on each realization. Mode indices and states refer to
/// the kept (logical) modes, in kept order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Probability that no photon reaches an error mode.
    PSuccess,
    /// Joint probability of a kept-mode outcome (error modes empty).
    Outcome(FockState),
    /// Outcome probability conditioned on success.
    ConditionalOutcome(FockState),
    /// `<n_a>` over all outcomes.
    ModeExpectation(usize),
    /// `<n_a>` conditioned on success.
    ConditionalModeExpectation(usize),
    /// `<n_a n_b>` over all outcomes.
    Coincidence(usize, usize),
    /// `<n_a n_b>` conditioned on success.
    ConditionalCoincidence(usize, usize),
}

impl Observable {
    fn is_conditional(&self) -> bool {
        matches!(
            self,
            Observable::ConditionalOutcome(_)
                | Observable::ConditionalModeExpectation(_)
                | Observable::ConditionalCoincidence(..)
        )
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::PSuccess => write!(f, "p_success"),
            Observable::Outcome(s) => write!(f, "outcome{s}"),
            Observable::ConditionalOutcome(s) => write!(f, "conditional_outcome{s}"),
            Observable::ModeExpectation(a) => write!(f, "mode_expectation[{a}]"),
            Observable::ConditionalModeExpectation(a) => write!(f, "conditional_mode_expectation[{a}]"),
            Observable::Coincidence(a, b) => write!(f, "coincidence[{a},{b}]"),
            Observable::ConditionalCoincidence(a, b) => write!(f, "conditional_coincidence[{a},{b}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCConfig {
    pub trials: u64,
    pub master_seed: u64,
    pub circuit: EncodedCircuit,
    /// Input over the kept modes.
    pub input: FockState,
    pub observables: Vec<Observable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCResults {
    pub master_seed: u64,
    pub trials: u64,
    pub estimates: Vec<(Observable, MCEstimate)>,
}

impl MCResults {
    pub fn get(&self, observable: &Observable) -> Option<MCEstimate> {
        self.estimates
            .iter()
            .find(|(o, _)| o == observable)
            .map(|(_, e)| *e)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("observable,mean,stderr,trials,seed\n");
        for (o, e) in &self.estimates {
            let _ = writeln!(
                out,
                "\"{o}\",{:.12e},{:.12e},{},{}",
                e.mean, e.stderr, e.trials, self.master_seed
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }
}

struct Plan {
    physical_input: FockState,
    input_modes: Vec<usize>,
    kept: Vec<usize>,
    outcomes: KeptOutcomes,
    needs_full: bool,
}

fn plan(config: &MCConfig) -> Result<Plan> {
    let kept = &config.circuit.kept_modes;
    let m = config.circuit.circuit.mode_count();
    if config.input.mode_count() != kept.len() {
        return invalid("input must be given over the kept modes");
    }
    let check_mode = |a: usize| {
        if a >= kept.len() {
            invalid(format!("observable mode {a} is not a kept mode"))
        } else {
            Ok(())
        }
    };
    for o in &config.observables {
        match o {
            Observable::Outcome(s) | Observable::ConditionalOutcome(s) => {
                if s.mode_count() != kept.len() || s.photons() != config.input.photons() {
                    return invalid(format!("outcome {s} does not match the input"));
                }
            }
            Observable::ModeExpectation(a) | Observable::ConditionalModeExpectation(a) => check_mode(*a)?,
            Observable::Coincidence(a, b) | Observable::ConditionalCoincidence(a, b) => {
                check_mode(*a)?;
                check_mode(*b)?;
            }
            Observable::PSuccess => {}
        }
    }
    let physical_input = config.input.embed(m, kept)?;
    let mut input_modes = physical_input.photon_modes();
    input_modes.dedup();
    Ok(Plan {
        outcomes: KeptOutcomes::new(kept, config.input.photons()),
        input_modes,
        kept: kept.clone(),
        physical_input,
        needs_full: config
            .observables
            .iter()
            .any(|o| matches!(o, Observable::Coincidence(..))),
    })
}

/// Estimates every observable; conditional ones are ratios of ensemble means
/// `E[joint] / E[p_success]`.
pub fn run(config: &MCConfig) -> Result<MCResults> {
    let plan = plan(config)?;
    let circuit = &config.circuit.circuit;
    let obs = &config.observables;
    let moments = run_trials(
        config.trials,
        config.master_seed,
        obs.len(),
        Vec::new,
        |deltas: &mut Vec<f64>, rng, out| {
            sample_into(circuit, rng, deltas);
            let cols = compile_columns(circuit, deltas, &plan.input_modes)?;
            let probs = plan.outcomes.probabilities(&cols, &plan.physical_input)?;
            let success: f64 = probs.iter().sum();
            let full = if plan.needs_full {
                Some(output_distribution(&cols, &plan.physical_input)?)
            } else {
                None
            };
            let kept_weighted = |w: &dyn Fn(&[u32]) -> f64| -> f64 {
                plan.outcomes
                    .states()
                    .iter()
                    .zip(&probs)
                    .map(|(s, p)| w(s.occupations()) * p)
                    .sum()
            };
            for (slot, o) in out.iter_mut().zip(obs) {
                let x = match o {
                    Observable::PSuccess => success,
                    Observable::Outcome(s) | Observable::ConditionalOutcome(s) => {
                        let idx = plan
                            .outcomes
                            .states()
                            .binary_search(s)
                            .expect("validated outcome");
                        probs[idx]
                    }
                    Observable::ModeExpectation(a) => {
                        let row = plan.kept[*a];
                        plan.physical_input
                            .occupations()
                            .iter()
                            .enumerate()
                            .filter(|(_, &n)| n > 0)
                            .map(|(j, &n)| n as f64 * cols.get(row, j).norm_sqr())
                            .sum()
                    }
                    Observable::ConditionalModeExpectation(a) => kept_weighted(&|occ| occ[*a] as f64),
                    Observable::Coincidence(a, b) => {
                        let (pa, pb) = (plan.kept[*a], plan.kept[*b]);
                        full.as_ref()
                            .expect("full distribution requested")
                            .entries
                            .iter()
                            .map(|(s, p)| {
                                let occ = s.occupations();
                                (occ[pa] * occ[pb]) as f64 * p
                            })
                            .sum()
                    }
                    Observable::ConditionalCoincidence(a, b) => {
                        kept_weighted(&|occ| (occ[*a] * occ[*b]) as f64)
                    }
                };
                *slot = (x, success);
            }
            Ok(())
        },
    )?;
    let estimates = obs
        .iter()
        .zip(moments)
        .map(|(o, m)| {
            let e = if o.is_conditional() { m.ratio_estimate()? } else { m.estimate() };
            Ok((o.clone(), e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MCResults {
        master_seed: config.master_seed,
        trials: config.trials,
        estimates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub target: Circuit,
    pub variance: f64,
    pub redundancies: Vec<usize>,
    pub seeds: u64,
    pub master_seed: u64,
    pub encoder: EncoderKind,
    pub strategy: Strategy,
}

/// Variance across seeds of one kept-block entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub redundancy: usize,
    pub row: usize,
    pub col: usize,
    pub var_re: f64,
    pub var_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    /// Sum of real and imaginary variances over the kept block for one `N`.
    pub fn total_variance(&self, redundancy: usize) -> Option<f64> {
        let mut seen = false;
        let total = self
            .rows
            .iter()
            .filter(|r| r.redundancy == redundancy)
            .inspect(|_| seen = true)
            .map(|r| r.var_re + r.var_im)
            .sum();
        seen.then_some(total)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,row,col,var_re,var_im\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{:.12e},{:.12e}", r.redundancy, r.row, r.col, r.var_re, r.var_im);
        }
        out
    }
}

/// Seed `s` at redundancy `N` uses stream `(N << 32) | s`.
pub fn variance_scan(config: &ScanConfig) -> Result<ScanResult> {
    if config.seeds < 2 {
        return invalid("variance needs at least two seeds");
    }
    if config.seeds > u32::MAX as u64 {
        return Err(Error::ResourceLimit("too many seeds".into()));
    }
    let target = config.target.with_variance(config.variance)?;
    let m = target.mode_count();
    let mut rows = Vec::new();
    for &n in &config.redundancies {
        let scheme = EncodingScheme::new(n, config.encoder, config.strategy)?;
        let encoded = encode(&target, &scheme)?;
        let blocks = (0..config.seeds)
            .into_par_iter()
            .map(|s| {
                let mut rng = trial_rng(config.master_seed, ((n as u64) << 32) | s);
                let r = sample_realization(&encoded.circuit, &mut rng);
                let full = compile(&encoded.circuit, &r)?;
                full.select(&encoded.kept_modes, &encoded.kept_modes)
            })
            .collect::<Result<Vec<_>>>()?;
        for row in 0..m {
            for col in 0..m {
                let mut acc = Moments::default();
                for b in &blocks {
                    let z = b.get(row, col);
                    acc.push(z.re, z.im);
                }
                let k = (acc.n - 1) as f64;
                rows.push(ScanRow {
                    redundancy: n,
                    row,
                    col,
                    var_re: acc.m2_x / k,
                    var_im: acc.m2_y / k,
                });
            }
        }
    }
    Ok(ScanResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::sp_success_exact;
    use crate::encoding::Strategy;
    use proptest::prelude::*;
    use rand::Rng;

    fn mz_config(v: f64, n: usize, strategy: Strategy, trials: u64, seed: u64) -> MCConfig {
        let mut c = Circuit::new(2).unwrap();
        c.push_mz(0, 1, 0.0, v).unwrap();
        let scheme = EncodingScheme::new(n, EncoderKind::Tree, strategy).unwrap();
        MCConfig {
            trials,
            master_seed: seed,
            circuit: encode(&c, &scheme).unwrap(),
            input: FockState::single(2, 0),
            observables: vec![
                Observable::PSuccess,
                Observable::ConditionalOutcome(FockState::new(vec![1, 0])),
                Observable::Outcome(FockState::new(vec![1, 0])),
                Observable::ModeExpectation(0),
                Observable::ConditionalModeExpectation(0),
            ],
        }
    }

    #[test]
    fn noiseless_estimates_are_exact() {
        let r = run(&mz_config(0.0, 4, Strategy::Whole, 3000, 1)).unwrap();
        for (_, e) in &r.estimates {
            assert_eq!(e.stderr, 0.0);
            assert!((e.mean - 1.0).abs() < 1e-12);
            assert_eq!(e.trials, 3000);
        }
    }

    #[test]
    fn single_photon_success_matches_exact() {
        let r = run(&mz_config(0.1, 8, Strategy::Whole, 100_000, 7)).unwrap();
        let e = r.get(&Observable::PSuccess).unwrap();
        assert!((e.mean - sp_success_exact(0.1, 8)).abs() < 3.0 * e.stderr, "{e:?}");
        assert!(e.stderr > 0.0);
        // one photon: the full-mode and kept-mode expectations coincide with the outcome
        let a = r.get(&Observable::Outcome(FockState::new(vec![1, 0]))).unwrap();
        let b = r.get(&Observable::ModeExpectation(0)).unwrap();
        assert!((a.mean - b.mean).abs() < 1e-12);
    }

    #[test]
    fn identical_configs_give_identical_bytes() {
        let c = mz_config(0.2, 4, Strategy::Each, 5000, 99);
        assert_eq!(run(&c).unwrap().to_csv(), run(&c).unwrap().to_csv());
        let other = MCConfig { master_seed: 100, ..c.clone() };
        assert_ne!(run(&c).unwrap().to_csv(), run(&other).unwrap().to_csv());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let c = mz_config(0.2, 2, Strategy::Whole, 4 * CHUNK + 17, 5);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run(&c).unwrap());
        let b = four.install(|| run(&c).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn trial_streams_are_distinct() {
        let a: u64 = trial_rng(1, 0).random();
        let b: u64 = trial_rng(1, 1).random();
        let c: u64 = trial_rng(2, 0).random();
        assert!(a != b && a != c);
        assert_eq!(a, trial_rng(1, 0).random::<u64>());
    }

    #[test]
    fn two_photon_observables() {
        let mut c = Circuit::new(2).unwrap();
        c.push_mz(0, 1, 0.0, 0.0).unwrap();
        let config = MCConfig {
            trials: 10,
            master_seed: 0,
            circuit: EncodedCircuit::unencoded(c),
            input: FockState::new(vec![1, 1]),
            observables: vec![
                Observable::Coincidence(0, 1),
                Observable::ConditionalCoincidence(0, 1),
                Observable::ModeExpectation(1),
            ],
        };
        let r = run(&config).unwrap();
        for (_, e) in &r.estimates {
            assert!((e.mean - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = mz_config(0.1, 2, Strategy::Whole, 10, 0);
        c.trials = 0;
        assert!(run(&c).is_err());
        let mut c = mz_config(0.1, 2, Strategy::Whole, 10, 0);
        c.observables = vec![Observable::ModeExpectation(5)];
        assert!(run(&c).is_err());
        let mut c = mz_config(0.1, 2, Strategy::Whole, 10, 0);
        c.input = FockState::single(4, 0);
        assert!(run(&c).is_err());
        let mut c = mz_config(0.1, 2, Strategy::Whole, 10, 0);
        c.observables = vec![Observable::Outcome(FockState::new(vec![2, 0]))];
        assert!(run(&c).is_err());
    }

    #[test]
    fn results_export() {
        let r = run(&mz_config(0.1, 2, Strategy::Whole, 100, 3)).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("observable,mean,stderr,trials,seed\n"));
        assert_eq!(csv.lines().count(), 6);
        let back: MCResults = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn ratio_of_constant_pairs() {
        let mut m = Moments::default();
        for _ in 0..10 {
            m.push(0.5, 0.25);
        }
        let e = m.ratio_estimate().unwrap();
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.stderr, 0.0);
        assert!(Moments::default().ratio_estimate().is_err());
    }

    proptest! {
        #[test]
        fn merge_is_order_independent(
            xs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..60),
            cut1 in 0usize..60,
            cut2 in 0usize..60,
        ) {
            let n = xs.len();
            let (a, b) = (cut1.min(cut2) % n, cut1.max(cut2) % n);
            let (a, b) = (a.min(b), a.max(b));
            let part = |r: &[(f64, f64)]| {
                let mut m = Moments::default();
                for &(x, y) in r { m.push(x, y); }
                m
            };
            let (p, q, r) = (part(&xs[..a]), part(&xs[a..b]), part(&xs[b..]));
            let mut left = p; left.merge(&q); left.merge(&r);
            let mut right = r; right.merge(&q); right.merge(&p);
            let whole = part(&xs);
            for m in [left, right] {
                prop_assert_eq!(m.n, whole.n);
                prop_assert!((m.mean_x - whole.mean_x).abs() < 1e-12);
                prop_assert!((m.mean_y - whole.mean_y).abs() < 1e-12);
                prop_assert!((m.m2_x - whole.m2_x).abs() < 1e-9);
                prop_assert!((m.c_xy - whole.c_xy).abs() < 1e-9);
            }
            // two-pass oracle for the variance
            let mean = xs.iter().map(|p| p.0).sum::<f64>() / n as f64;
            let ss: f64 = xs.iter().map(|p| (p.0 - mean).powi(2)).sum();
            prop_assert!((whole.m2_x - ss).abs() < 1e-9 * (1.0 + ss));
        }
    }

    fn one_phase() -> Circuit {
        let mut c = Circuit::new(1).unwrap();
        c.push(crate::circuit::Element::phase(0, 0.0, 0.0)).unwrap();
        c
    }

    #[test]
    fn scan_without_noise_is_zero() {
        let r = variance_scan(&ScanConfig {
            target: one_phase(),
            variance: 0.0,
            redundancies: vec![1, 2],
            seeds: 20,
            master_seed: 0,
            encoder: EncoderKind::Tree,
            strategy: Strategy::Whole,
        })
        .unwrap();
        assert!(r.rows.iter().all(|x| x.var_re == 0.0 && x.var_im == 0.0));
        assert_eq!(r.total_variance(2), Some(0.0));
        assert_eq!(r.total_variance(3), None);
    }

    #[test]
    fn scan_of_single_phase_matches_complex_average() {
        // Var Re(e^{i d}) = (1 - e^{-v})^2 / 2, Var Im = (1 - e^{-2v}) / 2, divided by N
        let v: f64 = 0.5;
        let r = variance_scan(&ScanConfig {
            target: one_phase(),
            variance: v,
            redundancies: vec![1, 4],
            seeds: 20_000,
            master_seed: 11,
            encoder: EncoderKind::Tree,
            strategy: Strategy::Whole,
        })
        .unwrap();
        let exact = ((1.0 - (-v).exp()).powi(2) + 1.0 - (-2.0 * v).exp()) / 2.0;
        for n in [1usize, 4] {
            let t = r.total_variance(n).unwrap();
            assert!((t * n as f64 / exact - 1.0).abs() < 0.05, "N={n} {t}");
        }
    }
}
