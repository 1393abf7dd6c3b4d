//! Acceptance criteria, each reported with measured and expected values.
//!
//! Closed-form predictions are taken from [`Formulas`] so tests can swap one
//! out and check that the right criterion fails.

use std::fmt;

use ea_core::analytics::{self, ChainParams, RecurrenceCoefficients, RecurrenceParams};
use ea_core::circuit::{compile, sample_realization, Element};
use ea_core::encoding::effective_matrix;
use ea_core::fock::{output_distribution, postselected_distribution};
use ea_core::montecarlo::{trial_rng, Observable};
use ea_core::phase_stats::{sample_variance, wrap, PhaseScheme};
use ea_core::{encode, Circuit, EncodedCircuit, EncoderKind, EncodingScheme, FockState, NoiseRealization, Strategy};
use rand::Rng;
use serde::Serialize;

use crate::config::Params;
use crate::error::Result;
use crate::experiments::{averaged, check_tables, coefficient_matches, fig11_grid, fig4, mz_chain, mz_run, run_scan};
use crate::four_mode::{four_mode_circuit, SlopeConfig, Topology};
use crate::output::{Report, Table};
use crate::phase_runs::{phase_variance, ChainRun};
use crate::tables::entries;

pub const CRITERIA: u8 = 12;

/// Closed-form predictions checked by the suite.
#[derive(Clone, Copy)]
pub struct Formulas {
    pub sp_success_exact: fn(f64, usize) -> f64,
    pub sp_correct_post: fn(f64, usize) -> f64,
    pub tp_coincidence_post: fn(f64, usize) -> f64,
    pub variance_predicted: fn(f64, usize, usize) -> f64,
    pub variance_max: fn() -> f64,
    pub recurrence: fn(&RecurrenceParams, u32) -> ea_core::Result<RecurrenceCoefficients>,
    pub chain_success_avg_whole: fn(&ChainParams) -> f64,
    pub chain_success_avg_each: fn(&ChainParams) -> f64,
}

impl Default for Formulas {
    fn default() -> Self {
        Formulas {
            sp_success_exact: analytics::sp_success_exact,
            sp_correct_post: analytics::sp_correct_post,
            tp_coincidence_post: analytics::tp_coincidence_post,
            variance_predicted: analytics::variance_predicted,
            variance_max: analytics::variance_max,
            recurrence: analytics::recurrence_coefficients,
            chain_success_avg_whole: analytics::chain_success_avg_whole,
            chain_success_avg_each: analytics::chain_success_avg_each,
        }
    }
}

#[derive(Clone, Copy)]
pub struct ValidationOptions {
    pub seed: u64,
    /// Replaces every Monte Carlo sample count; below the nominal count a
    /// failing statistical criterion is reported as underpowered.
    pub trials: Option<u64>,
    pub formulas: Formulas,
}

impl ValidationOptions {
    pub fn new(seed: u64) -> Self {
        Self { seed, trials: None, formulas: Formulas::default() }
    }

    fn budget(&self, nominal: u64) -> (u64, bool) {
        let t = self.trials.unwrap_or(nominal);
        (t, t < nominal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    Underpowered,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Underpowered => "UNDERPOWERED",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub status: Status,
    pub measured: String,
    pub expected: String,
    pub details: Vec<String>,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {}: {} | measured {} | expected {}",
            self.id, self.status, self.title, self.measured, self.expected
        )
    }
}

struct Outcome {
    ok: bool,
    underpowered: bool,
    measured: String,
    expected: String,
    details: Vec<String>,
}

fn report(id: u8, title: &'static str, o: Outcome) -> CriterionReport {
    let status = match (o.ok, o.underpowered) {
        (true, _) => Status::Pass,
        (false, true) => Status::Underpowered,
        (false, false) => Status::Fail,
    };
    CriterionReport { id, title, status, measured: o.measured, expected: o.expected, details: o.details }
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "single-photon success asymptote",
        2 => "post-selected correctness",
        3 => "two-photon interference baseline",
        4 => "1/N variance scaling of averaged entries",
        5 => "kept block equals the average of copies",
        6 => "zero-noise exactness",
        7 => "phase-chain variance laws",
        8 => "averaging threshold in the variance sweep",
        9 => "four-mode first-order tables",
        10 => "recurrence reproduces post-selected rows",
        11 => "first-order equivalence of strategies",
        12 => "byte-identical reruns",
        _ => "unknown",
    }
}

pub fn criterion(id: u8, opts: &ValidationOptions) -> Result<CriterionReport> {
    let o = match id {
        1 => c1(opts)?,
        2 => c2(opts)?,
        3 => c3(opts)?,
        4 => c4(opts)?,
        5 => c5(opts)?,
        6 => c6()?,
        7 => c7(opts)?,
        8 => c8(opts)?,
        9 => c9(opts)?,
        10 => c10(opts)?,
        11 => c11(opts),
        12 => c12(opts)?,
        _ => return Err(crate::EaError::Usage(format!("no criterion {id}"))),
    };
    Ok(report(id, title(id), o))
}

pub fn run_all(opts: &ValidationOptions) -> Result<Vec<CriterionReport>> {
    (1..=CRITERIA).map(|id| criterion(id, opts)).collect()
}

/// Runs the suite for the CLI; the flag is true when any criterion failed.
pub fn validate_report(p: &Params) -> Result<(Report, bool)> {
    let opts = ValidationOptions { seed: p.seed, trials: p.trials, formulas: Formulas::default() };
    let reports = run_all(&opts)?;
    let mut r = Report::default();
    r.param("seed", p.seed);
    r.param("trials", p.trials);
    let mut t = Table::new("validate.csv", &["criterion", "status", "title", "measured", "expected", "seed"]);
    for c in &reports {
        t.push(vec![c.id.into(), c.status.to_string().into(), c.title.into(), c.measured.clone().into(), c.expected.clone().into(), p.seed.into()]);
        r.summary.push(c.line());
        r.summary.extend(c.details.iter().map(|d| format!("    {d}")));
    }
    r.tables.push(t);
    let failed = reports.iter().any(|c| c.status == Status::Fail);
    Ok((r, failed))
}

fn within(mean: f64, stderr: f64, expected: f64, abs: f64, sigmas: f64) -> bool {
    (mean - expected).abs() <= abs + sigmas * stderr
}

fn c1(opts: &ValidationOptions) -> Result<Outcome> {
    let v = 0.1;
    let (trials, low) = opts.budget(100_000);
    let mut ok = true;
    let mut details = Vec::new();
    let mut last = f64::NAN;
    for n in [1, 2, 4, 8, 16, 32] {
        let enc = averaged(&mz_chain(1, v)?, n, Strategy::Whole)?;
        let e = mz_run(enc, FockState::single(2, 0), vec![Observable::PSuccess], trials, opts.seed)?
            .get(&Observable::PSuccess)
            .expect("success");
        let exact = (opts.formulas.sp_success_exact)(v, n);
        let good = within(e.mean, e.stderr, exact, 1e-12, 3.0);
        ok &= good;
        details.push(format!("N={n}: {:.6} +- {:.6} vs {exact:.6} [{}]", e.mean, e.stderr, if good { "ok" } else { "off" }));
        last = e.mean;
    }
    let near = (last - 0.95).abs() <= 0.01;
    ok &= near;
    Ok(Outcome {
        ok,
        underpowered: low,
        measured: format!("N=32 success {last:.5}"),
        expected: "all N within 3 stderr of the exact value; N=32 within 0.01 of 0.95".into(),
        details,
    })
}

fn c2(opts: &ValidationOptions) -> Result<Outcome> {
    let v = 0.01;
    let (trials, low) = opts.budget(100_000);
    let correct = Observable::ConditionalOutcome(FockState::single(2, 0));
    let mut ok = true;
    let mut details = Vec::new();
    for n in [2, 4, 8] {
        let enc = averaged(&mz_chain(1, v)?, n, Strategy::Whole)?;
        let e = mz_run(enc, FockState::single(2, 0), vec![correct.clone()], trials, opts.seed)?
            .get(&correct)
            .expect("correct");
        let expected = (opts.formulas.sp_correct_post)(v, n);
        let good = within(e.mean, e.stderr, expected, 5e-4, 3.0);
        ok &= good;
        details.push(format!("N={n}: {:.6} +- {:.6} vs {expected:.6}", e.mean, e.stderr));
    }
    Ok(Outcome {
        ok,
        underpowered: low,
        measured: details.join("; "),
        expected: "1 - v/4N within 5e-4 + 3 stderr".into(),
        details: Vec::new(),
    })
}

fn c3(opts: &ValidationOptions) -> Result<Outcome> {
    let mut bs = Circuit::new(2)?;
    bs.push(Element::beam_splitter(0, 1))?;
    let u = compile(&bs, &NoiseRealization::zeros(&bs))?;
    let pair = FockState::new(vec![1, 1]);
    let hom = output_distribution(&u, &pair)?.probability(&pair);

    let (v, n) = (0.01, 4);
    let (trials, low) = opts.budget(100_000);
    let coinc = Observable::ConditionalCoincidence(0, 1);
    let enc = averaged(&mz_chain(1, v)?, n, Strategy::Whole)?;
    let e = mz_run(enc, pair, vec![coinc.clone()], trials, opts.seed)?.get(&coinc).expect("coincidence");
    let expected = (opts.formulas.tp_coincidence_post)(v, n);
    let mc_ok = within(e.mean, e.stderr, expected, 5e-4, 3.0);
    Ok(Outcome {
        ok: hom == 0.0 && mc_ok,
        // the interference dip is exact, so only the sampled half can lack power
        underpowered: low && hom == 0.0,
        measured: format!("P(|1,1>) = {hom:e}; post-selected coincidence {:.6} +- {:.6}", e.mean, e.stderr),
        expected: format!("0 exactly; {expected:.6} within 5e-4 + 3 stderr"),
        details: vec![format!(
            "first order from the |1,1> amplitude (1 + S^2)/2 gives 1 - v/N = {:.6}",
            1.0 - v / n as f64
        )],
    })
}

fn c4(opts: &ValidationOptions) -> Result<Outcome> {
    let (seeds, low) = opts.budget(500);
    let ns = [1, 2, 4, 8, 16];
    let scan = run_scan(0.1, &ns, seeds.max(2), opts.seed)?;
    let mut ok = true;
    let mut ratios = Vec::new();
    for n in [1, 2, 4, 8] {
        let r = scan.total_variance(n).expect("scanned") / scan.total_variance(2 * n).expect("scanned");
        ok &= (1.5..=2.5).contains(&r);
        ratios.push(format!("{n}->{}: {r:.3}", 2 * n));
    }
    Ok(Outcome {
        ok,
        underpowered: low,
        measured: ratios.join(", "),
        expected: "every var(N)/var(2N) in [1.5, 2.5]".into(),
        details: Vec::new(),
    })
}

fn c5(opts: &ValidationOptions) -> Result<Outcome> {
    let target = four_mode_circuit(0.1)?;
    let p = target.phase_count();
    let mut worst = 0.0f64;
    for n in [2, 4, 8] {
        for encoder in [EncoderKind::Tree, EncoderKind::Dft] {
            let enc = encode(&target, &EncodingScheme::new(n, encoder, Strategy::Whole)?)?;
            for s in 0..100u64 {
                let r = sample_realization(&enc.circuit, &mut trial_rng(opts.seed, s));
                let kept = enc.kept_block(&r)?;
                let copies = r
                    .deltas
                    .chunks(p)
                    .map(|d| compile(&target, &NoiseRealization { deltas: d.to_vec() }))
                    .collect::<ea_core::Result<Vec<_>>>()?;
                worst = worst.max(kept.max_abs_diff(&effective_matrix(&copies)?));
            }
        }
    }
    Ok(Outcome {
        ok: worst <= 1e-12,
        underpowered: false,
        measured: format!("max deviation {worst:.3e}"),
        expected: "<= 1e-12".into(),
        details: Vec::new(),
    })
}

fn zero_noise_targets() -> Result<Vec<Circuit>> {
    let mut a = Circuit::new(4)?;
    for (i, j, theta) in [(0, 1, 0.7), (2, 3, -1.3), (1, 2, 2.1), (0, 3, 0.4)] {
        a.push_mz(i, j, theta, 0.0)?;
    }
    a.push(Element::phase(1, 0.9, 0.0))?;
    Ok(vec![four_mode_circuit(0.0)?, a, mz_chain(3, 0.0)?])
}

fn c6() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for target in zero_noise_targets()? {
        let m = target.mode_count();
        let u = compile(&target, &NoiseRealization::zeros(&target))?;
        let mut inputs = vec![FockState::single(m, 0), FockState::single(m, m - 1)];
        let mut two = vec![0; m];
        two[0] = 1;
        two[m - 1] += 1;
        inputs.push(FockState::new(two));
        let mut bunched = vec![0; m];
        bunched[0] = 2;
        inputs.push(FockState::new(bunched));
        for n in [1usize, 2, 3, 4, 8] {
            for encoder in [EncoderKind::Tree, EncoderKind::Dft] {
                if encoder == EncoderKind::Tree && !n.is_power_of_two() {
                    continue;
                }
                for strategy in [Strategy::Whole, Strategy::Each] {
                    let enc: EncodedCircuit = encode(&target, &EncodingScheme::new(n, encoder, strategy)?)?;
                    let full = compile(&enc.circuit, &NoiseRealization::zeros(&enc.circuit))?;
                    for input in &inputs {
                        let reference = output_distribution(&u, input)?;
                        let physical = input.embed(enc.circuit.mode_count(), &enc.kept_modes)?;
                        let post = postselected_distribution(&full, &physical, &enc.kept_modes)?;
                        worst = worst.max((post.p_success - 1.0).abs());
                        let cond = post.conditional.expect("noiseless success");
                        for (s, p) in &reference.entries {
                            worst = worst.max((cond.probability(s) - p).abs());
                        }
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(Outcome {
        ok: worst <= 1e-10,
        underpowered: false,
        measured: format!("{count} cases, max deviation {worst:.3e}"),
        expected: "P(success) = 1 and target distribution to 1e-10".into(),
        details: Vec::new(),
    })
}

fn rel_dev(measured: f64, predicted: f64) -> f64 {
    (measured / predicted - 1.0).abs()
}

fn c7(opts: &ValidationOptions) -> Result<Outcome> {
    let (v, n) = (0.1, 4);
    let (runs, low) = opts.budget(50_000);
    let f = &opts.formulas;
    let chain = |m| ChainRun { variance: v, elements: m, redundancy: n, runs, seed: opts.seed };
    let mut details = Vec::new();
    let mut linear_ok = true;
    for m in 1..=5 {
        let no = rel_dev(phase_variance(&chain(m), PhaseScheme::NoAvg)?, (f.variance_predicted)(v, m, 1));
        let wh = rel_dev(phase_variance(&chain(m), PhaseScheme::Whole)?, (f.variance_predicted)(v, m, n));
        let ea = rel_dev(phase_variance(&chain(m), PhaseScheme::Each)?, (f.variance_predicted)(v, m, n));
        linear_ok &= no <= 0.1 && wh <= 0.1 && ea <= 0.1;
        details.push(format!("M={m}: deviations noavg {no:.3}, whole {wh:.3}, each {ea:.3}"));
    }
    let mut whole_departs = None;
    let mut each_worst = 0.0f64;
    for m in 6..=15 {
        let wh = rel_dev(phase_variance(&chain(m), PhaseScheme::Whole)?, (f.variance_predicted)(v, m, n));
        let ea = rel_dev(phase_variance(&chain(m), PhaseScheme::Each)?, (f.variance_predicted)(v, m, n));
        if wh > 0.2 && whole_departs.is_none() {
            whole_departs = Some(m);
        }
        each_worst = each_worst.max(ea);
        details.push(format!("M={m}: deviations whole {wh:.3}, each {ea:.3}"));
    }
    let (samples, low_u) = opts.budget(1_000_000);
    let mut rng = trial_rng(opts.seed, u64::MAX);
    let uniform: Vec<_> = (0..samples.max(2))
        .map(|_| wrap(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)))
        .collect();
    let uni = rel_dev(sample_variance(&uniform)?, (f.variance_max)());
    let ok = linear_ok && whole_departs.is_some() && each_worst <= 0.2 && uni <= 0.01;
    Ok(Outcome {
        ok,
        underpowered: low || low_u,
        measured: format!(
            "linear regime {}; whole first departs at M={}; each worst {each_worst:.3}; uniform deviation {uni:.4}",
            if linear_ok { "ok" } else { "off" },
            whole_departs.map_or("none".into(), |m| m.to_string())
        ),
        expected: "M<=5 within 10%; whole > 20% for some M in 6..15; each never; uniform within 1% of pi^2/3".into(),
        details,
    })
}

fn c8(opts: &ValidationOptions) -> Result<Outcome> {
    let (m, n) = (4, 4);
    let (runs, low) = opts.budget(50_000);
    let f = &opts.formulas;
    let predicted_slope = (f.variance_predicted)(1.0, m, n);
    let mut prev: Option<(f64, f64)> = None;
    let mut slope_cross = None;
    let mut ratio_cross = None;
    let mut details = Vec::new();
    for v in fig11_grid(0.5) {
        let var = phase_variance(&ChainRun { variance: v, elements: m, redundancy: n, runs, seed: opts.seed }, PhaseScheme::Whole)?;
        if ratio_cross.is_none() && rel_dev(var, (f.variance_predicted)(v, m, n)) > 0.2 {
            ratio_cross = Some(m as f64 * v);
        }
        if let Some((pv, pvar)) = prev {
            let s = (var - pvar) / (v - pv) / predicted_slope;
            if slope_cross.is_none() && (s - 1.0).abs() > 0.2 {
                slope_cross = Some(m as f64 * (v + pv) / 2.0);
            }
            details.push(format!("Mv={:.3}: variance {var:.4}, secant slope ratio {s:.3}", m as f64 * v));
        }
        prev = Some((v, var));
    }
    let ok = slope_cross.is_some_and(|x| (0.3..=0.8).contains(&x));
    Ok(Outcome {
        ok,
        underpowered: low,
        measured: format!(
            "local slope departs > 20% at Mv={}; variance itself departs > 20% at Mv={}",
            slope_cross.map_or("none".into(), |x| format!("{x:.3}")),
            ratio_cross.map_or("none".into(), |x| format!("{x:.3}"))
        ),
        expected: "slope departure at Mv in [0.3, 0.8]".into(),
        details,
    })
}

fn c9(opts: &ValidationOptions) -> Result<Outcome> {
    let (trials, low) = opts.budget(200_000);
    let checks = check_tables(&Topology::DEFAULT, &SlopeConfig { trials, seed: opts.seed, step: 0.004 }, None)?;
    let bad: Vec<_> = checks.iter().filter(|c| !c.mc_matches()).collect();
    let details = bad
        .iter()
        .map(|c| {
            format!(
                "{}: printed {} measured {:.4} +- {:.4} (exact {:.4}, exact matches printed: {})",
                c.entry.label(),
                c.printed,
                c.mc_mean,
                c.mc_stderr,
                c.exact,
                coefficient_matches(c.printed, c.exact)
            )
        })
        .collect();
    Ok(Outcome {
        ok: bad.is_empty(),
        underpowered: low,
        measured: format!("{}/{} entries reproduced", checks.len() - bad.len(), checks.len()),
        expected: "all non-zero within 15%, all zero below 0.1 v".into(),
        details,
    })
}

fn recurrence_inputs(input: &FockState) -> Option<RecurrenceParams> {
    match input.occupations() {
        [1, 0, 0, 0] => Some(RecurrenceParams { a1: 1, b1: 2 }),
        [2, 0, 0, 0] => Some(RecurrenceParams { a1: 2, b1: 2 }),
        [1, 1, 0, 0] => Some(RecurrenceParams { a1: 3, b1: 2 }),
        _ => None,
    }
}

fn c10(opts: &ValidationOptions) -> Result<Outcome> {
    let mut checked = 0;
    let mut details = Vec::new();
    let mut notes = Vec::new();
    for e in entries() {
        let params = recurrence_inputs(&e.input).expect("tabulated input");
        let rounds = e.redundancy.trailing_zeros() + 1;
        let coeffs = (opts.formulas.recurrence)(&params, rounds)?;
        if e.conditional {
            checked += 1;
            if -e.coefficient != coeffs.correct_post {
                details.push(format!("{}: printed {} recurrence {}", e.label(), e.coefficient, -coeffs.correct_post));
            }
        } else if e.output == e.input && -e.coefficient != coeffs.correct {
            notes.push(format!(
                "note (not gated): {} printed {} unconditional recurrence {}",
                e.label(),
                e.coefficient,
                -coeffs.correct
            ));
        }
    }
    let ok = details.is_empty() && checked > 0;
    details.extend(notes);
    Ok(Outcome {
        ok,
        underpowered: false,
        measured: format!("{} of {checked} post-selected rows equal", checked - details.iter().filter(|d| !d.starts_with("note")).count()),
        expected: "exact rational equality".into(),
        details,
    })
}

fn c11(opts: &ValidationOptions) -> Outcome {
    let f = &opts.formulas;
    let mut ok = true;
    let mut measured = Vec::new();
    for m in [2, 4, 8] {
        for n in [2, 4, 16] {
            let d = |v: f64| {
                let p = ChainParams { m, v, n };
                ((f.chain_success_avg_whole)(&p) - (f.chain_success_avg_each)(&p)).abs()
            };
            let ratio = d(1e-3) / d(1e-4);
            ok &= (80.0..=120.0).contains(&ratio);
            measured.push(format!("M={m},N={n}: {ratio:.2}"));
        }
    }
    Outcome {
        ok,
        underpowered: false,
        measured: measured.join(", "),
        expected: "difference ratio 100 +- 20%".into(),
        details: Vec::new(),
    }
}

fn c12(opts: &ValidationOptions) -> Result<Outcome> {
    let p = Params { v: None, n: None, m: None, trials: opts.trials, seed: 42 };
    let render = || -> Result<Vec<String>> { fig4(&p)?.tables.iter().map(|t| t.render()).collect() };
    let (a, b) = (render()?, render()?);
    let same = a == b;
    let bytes: usize = a.iter().map(String::len).sum();
    Ok(Outcome {
        ok: same,
        underpowered: false,
        measured: format!("{bytes} bytes, identical: {same}"),
        expected: "identical output for seed 42".into(),
        details: Vec::new(),
    })
}
