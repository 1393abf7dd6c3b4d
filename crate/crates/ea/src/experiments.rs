//! One function per reproduced figure or table.

use std::collections::BTreeMap;

use ea_core::analytics::{
    chain_correct_avg_each, chain_correct_avg_each_exact, chain_correct_avg_whole, chain_correct_avg_whole_exact,
    chain_correct_noavg, chain_correct_noavg_exact, chain_success_avg_each, chain_success_avg_each_exact,
    chain_success_avg_each_first_order, chain_success_avg_whole, chain_success_avg_whole_exact,
    chain_success_avg_whole_first_order, sp_correct_post, sp_correct_post_exact, sp_success, sp_success_exact,
    variance_max, variance_predicted, ChainParams,
};
use ea_core::circuit::Element;
use ea_core::montecarlo::{run, variance_scan, MCConfig, MCResults, Observable, ScanConfig};
use ea_core::phase_stats::{Histogram, DEFAULT_BIN_WIDTH};
use ea_core::{encode, Circuit, EncodedCircuit, EncoderKind, EncodingScheme, FockState, Strategy};
use serde::Serialize;

use crate::config::Params;
use crate::error::Result;
use crate::four_mode::{four_mode_circuit, laplacian_coefficients, slope_coefficients, SlopeConfig, Target, Topology};
use crate::output::{Report, Table};
use crate::phase_runs::{copies, phase_variance, scheme_name, total_phases, ChainRun, SCHEMES};
use crate::tables::{entries, TableEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Fig1,
    Fig4,
    Fig6,
    Fig7,
    Fig8,
    Fig10,
    Fig11,
    Tables4,
    Scan,
    Validate,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1 => "fig1",
            Experiment::Fig4 => "fig4",
            Experiment::Fig6 => "fig6",
            Experiment::Fig7 => "fig7",
            Experiment::Fig8 => "fig8",
            Experiment::Fig10 => "fig10",
            Experiment::Fig11 => "fig11",
            Experiment::Tables4 => "tables4",
            Experiment::Scan => "scan",
            Experiment::Validate => "validate",
        }
    }
}

/// Tree for powers of two, DFT otherwise.
pub fn default_encoder(n: usize) -> EncoderKind {
    if n.is_power_of_two() { EncoderKind::Tree } else { EncoderKind::Dft }
}

/// Beam splitter, `m` phase shifters on mode 0, beam splitter: the identity when noiseless.
pub fn mz_chain(m: usize, v: f64) -> Result<Circuit> {
    let mut c = Circuit::new(2)?;
    c.push(Element::beam_splitter(0, 1))?;
    for _ in 0..m {
        c.push(Element::phase(0, 0.0, v))?;
    }
    c.push(Element::beam_splitter(0, 1))?;
    Ok(c)
}

pub fn averaged(circuit: &Circuit, n: usize, strategy: Strategy) -> Result<EncodedCircuit> {
    let scheme = EncodingScheme::new(n, default_encoder(n), strategy)?;
    Ok(encode(circuit, &scheme)?)
}

fn single(mode: usize) -> FockState {
    FockState::single(2, mode)
}

pub fn mz_run(
    circuit: EncodedCircuit,
    input: FockState,
    observables: Vec<Observable>,
    trials: u64,
    seed: u64,
) -> Result<MCResults> {
    Ok(run(&MCConfig { trials, master_seed: seed, circuit, input, observables })?)
}

pub fn run_experiment(exp: Experiment, p: &Params) -> Result<Report> {
    match exp {
        Experiment::Fig1 => fig1(p),
        Experiment::Fig4 => fig4(p),
        Experiment::Fig6 => fig6(p),
        Experiment::Fig7 => fig7(p),
        Experiment::Fig8 => fig8(p),
        Experiment::Fig10 => fig10(p),
        Experiment::Fig11 => fig11(p),
        Experiment::Tables4 => tables4(p),
        Experiment::Scan => scan(p),
        Experiment::Validate => crate::validation::validate_report(p).map(|(r, _)| r),
    }
}

fn base_params(report: &mut Report, p: &Params, pairs: &[(&str, serde_json::Value)]) {
    report.param("seed", p.seed);
    for (k, v) in pairs {
        report.parameters.insert((*k).to_string(), v.clone());
    }
}

fn json(x: impl Serialize) -> serde_json::Value {
    serde_json::to_value(x).expect("serializable")
}

/// Output mass of one photon in an averaged interferometer: correct port,
/// wrong port and error modes, with and without post-selection.
pub fn fig1(p: &Params) -> Result<Report> {
    let v = p.v_or(0.5);
    let ns = p.n_list(&[1, 2, 4, 8, 16]);
    let trials = p.trials_or(100_000);
    let mut r = Report::default();
    base_params(&mut r, p, &[("v", json(v)), ("N", json(&ns)), ("trials", json(trials))]);
    let mut t = Table::new(
        "fig1.csv",
        &["N", "v", "trials", "seed", "postselected", "correct", "correct_stderr", "wrong", "wrong_stderr", "error_modes", "error_modes_stderr"],
    );
    let (right, wrong) = (single(0), single(1));
    for &n in &ns {
        let enc = averaged(&mz_chain(1, v)?, n, Strategy::Whole)?;
        let res = mz_run(
            enc,
            single(0),
            vec![
                Observable::Outcome(right.clone()),
                Observable::Outcome(wrong.clone()),
                Observable::PSuccess,
                Observable::ConditionalOutcome(right.clone()),
                Observable::ConditionalOutcome(wrong.clone()),
            ],
            trials,
            p.seed,
        )?;
        let e = |o: Observable| res.get(&o).expect("requested observable");
        let (c, w, s) = (e(Observable::Outcome(right.clone())), e(Observable::Outcome(wrong.clone())), e(Observable::PSuccess));
        // success can round to just above one
        let lost = (1.0 - s.mean).max(0.0);
        t.push(vec![n.into(), v.into(), trials.into(), p.seed.into(), false.into(), c.mean.into(), c.stderr.into(), w.mean.into(), w.stderr.into(), lost.into(), s.stderr.into()]);
        let (c, w) = (e(Observable::ConditionalOutcome(right.clone())), e(Observable::ConditionalOutcome(wrong.clone())));
        t.push(vec![n.into(), v.into(), trials.into(), p.seed.into(), true.into(), c.mean.into(), c.stderr.into(), w.mean.into(), w.stderr.into(), 0.0.into(), 0.0.into()]);
        r.summary.push(format!(
            "N={n}: correct {:.4}, wrong {:.4}, error modes {:.4}; post-selected correct {:.4}",
            e(Observable::Outcome(right.clone())).mean,
            e(Observable::Outcome(wrong.clone())).mean,
            lost,
            c.mean
        ));
    }
    r.tables.push(t);
    r.plot = Some(
        "set datafile separator ','\nset style data histograms\nset style histogram rowstacked\nset style fill solid\nset key outside\n\
         plot 'fig1.csv' using 6:xtic(1) title 'correct', '' using 8 title 'wrong', '' using 10 title 'error modes'\n"
            .into(),
    );
    Ok(r)
}

/// Success and post-selected correctness of one photon against `N`.
pub fn fig4(p: &Params) -> Result<Report> {
    let v = p.v_or(0.1);
    let ns = p.n_list(&[1, 2, 4, 8, 16, 32]);
    let trials = p.trials_or(100_000);
    let mut r = Report::default();
    base_params(&mut r, p, &[("v", json(v)), ("N", json(&ns)), ("trials", json(trials))]);
    let mut t = Table::new(
        "fig4.csv",
        &["N", "v", "trials", "seed", "quantity", "mc_mean", "mc_stderr", "exact", "first_order"],
    );
    let correct = Observable::ConditionalOutcome(single(0));
    for &n in &ns {
        let enc = averaged(&mz_chain(1, v)?, n, Strategy::Whole)?;
        let res = mz_run(enc, single(0), vec![Observable::PSuccess, correct.clone()], trials, p.seed)?;
        let s = res.get(&Observable::PSuccess).expect("success");
        let c = res.get(&correct).expect("correct");
        t.push(vec![n.into(), v.into(), trials.into(), p.seed.into(), "success".into(), s.mean.into(), s.stderr.into(), sp_success_exact(v, n).into(), sp_success(v, n).into()]);
        t.push(vec![n.into(), v.into(), trials.into(), p.seed.into(), "correct_postselected".into(), c.mean.into(), c.stderr.into(), sp_correct_post_exact(v, n).into(), sp_correct_post(v, n).into()]);
        r.summary.push(format!("N={n}: success {:.5} +- {:.5}, post-selected correct {:.5} +- {:.5}", s.mean, s.stderr, c.mean, c.stderr));
    }
    r.summary.push(format!("first-order asymptotes: success {:.4}, post-selected correct 1", 1.0 - v / 2.0));
    r.tables.push(t);
    r.plot = Some(
        "set datafile separator ','\nset logscale x 2\nset xlabel 'N'\n\
         plot 'fig4.csv' using 1:($5 eq 'success' ? $6 : 1/0):7 with yerrorbars title 'success', \
         '' using 1:($5 eq 'correct_postselected' ? $6 : 1/0):7 with yerrorbars title 'post-selected correct'\n"
            .into(),
    );
    Ok(r)
}

/// Post-selected correctness of a chain of `M` phase shifters in an interferometer.
pub fn fig6(p: &Params) -> Result<Report> {
    let v = p.v_or(0.005);
    let ns = p.n_list(&[2, 4, 16]);
    let m_max = p.m_or(15);
    let trials = p.trials_or(20_000);
    let mut r = Report::default();
    base_params(&mut r, p, &[("v", json(v)), ("N", json(&ns)), ("M_max", json(m_max)), ("trials", json(trials))]);
    let mut t = Table::new(
        "fig6.csv",
        &["M", "N", "v", "trials", "seed", "scheme", "second_order", "exact", "mc_mean", "mc_stderr"],
    );
    let correct = Observable::ConditionalOutcome(single(0));
    for &n in &ns {
        for m in 1..=m_max {
            let cp = ChainParams::new(m, v, n)?;
            let chain = mz_chain(m, v)?;
            let rows: [(&str, f64, f64, EncodedCircuit); 3] = [
                ("noavg", chain_correct_noavg(&cp), chain_correct_noavg_exact(&cp), EncodedCircuit::unencoded(chain.clone())),
                ("whole", chain_correct_avg_whole(&cp), chain_correct_avg_whole_exact(&cp), averaged(&chain, n, Strategy::Whole)?),
                ("each", chain_correct_avg_each(&cp), chain_correct_avg_each_exact(&cp), averaged(&chain, n, Strategy::Each)?),
            ];
            for (name, second, exact, enc) in rows {
                let e = mz_run(enc, single(0), vec![correct.clone()], trials, p.seed)?.get(&correct).expect("correct");
                t.push(vec![m.into(), n.into(), v.into(), trials.into(), p.seed.into(), name.into(), second.into(), exact.into(), e.mean.into(), e.stderr.into()]);
            }
        }
    }
    r.summary.push(format!("{} rows over M = 1..{m_max}", t.rows.len()));
    r.tables.push(t);
    r.plot = Some(
        "set datafile separator ','\nset xlabel 'M'\n\
         plot 'fig6.csv' using 1:($6 eq 'noavg' ? $7 : 1/0) title 'no averaging', \
         '' using 1:($6 eq 'whole' ? $7 : 1/0) title 'whole', '' using 1:($6 eq 'each' ? $7 : 1/0) title 'each'\n"
            .into(),
    );
    Ok(r)
}

/// First- and second-order success of a phase chain against `M`.
pub fn fig7(p: &Params) -> Result<Report> {
    let panels: Vec<(f64, usize)> = if p.v.is_some() || p.n.is_some() {
        vec![(p.v_or(0.005), p.n_or(16))]
    } else {
        vec![(0.005, 4), (0.005, 16), (0.1, 16)]
    };
    let m_max = p.m_or(15);
    let mut r = Report::default();
    base_params(&mut r, p, &[("panels", json(&panels)), ("M_max", json(m_max))]);
    let mut t = Table::new("fig7.csv", &["v", "N", "M", "scheme", "first_order", "second_order", "exact"]);
    for &(v, n) in &panels {
        for m in 1..=m_max {
            let cp = ChainParams::new(m, v, n)?;
            t.push(vec![v.into(), n.into(), m.into(), "whole".into(), chain_success_avg_whole_first_order(&cp).into(), chain_success_avg_whole(&cp).into(), chain_success_avg_whole_exact(&cp).into()]);
            t.push(vec![v.into(), n.into(), m.into(), "each".into(), chain_success_avg_each_first_order(&cp).into(), chain_success_avg_each(&cp).into(), chain_success_avg_each_exact(&cp).into()]);
        }
    }
    r.summary.push(format!("{} panels, M = 1..{m_max}", panels.len()));
    r.tables.push(t);
    r.plot = Some(
        "set datafile separator ','\nset xlabel 'M'\n\
         plot 'fig7.csv' using 3:($4 eq 'whole' ? $5 : 1/0) title 'whole, first order', \
         '' using 3:($4 eq 'whole' ? $6 : 1/0) title 'whole, second order', \
         '' using 3:($4 eq 'each' ? $5 : 1/0) title 'each, first order', \
         '' using 3:($4 eq 'each' ? $6 : 1/0) title 'each, second order'\n"
            .into(),
    );
    Ok(r)
}

/// Total applied phase samples and their histograms.
pub fn fig8(p: &Params) -> Result<Report> {
    let v = p.v_or(0.1);
    let m = p.m_or(15);
    let n = p.n_or(4);
    let runs = p.trials_or(5000);
    let mut r = Report::default();
    base_params(&mut r, p, &[("v", json(v)), ("M", json(m)), ("N", json(n)), ("runs", json(runs)), ("bin_width", json(DEFAULT_BIN_WIDTH))]);
    let mut samples = Table::new("fig8_samples.csv", &["run", "scheme", "v", "M", "N", "seed", "phase"]);
    let mut hist = Table::new("fig8_histogram.csv", &["scheme", "v", "M", "N", "seed", "bin_lo", "bin_hi", "count"]);
    for scheme in SCHEMES {
        let n_used = copies(scheme, n);
        let run = ChainRun { variance: v, elements: m, redundancy: n, runs, seed: p.seed };
        let phases = total_phases(&run, scheme)?;
        let name = scheme_name(scheme);
        for (i, s) in phases.iter().enumerate() {
            samples.push(vec![i.into(), name.into(), v.into(), m.into(), n_used.into(), p.seed.into(), s.value().into()]);
        }
        let h = Histogram::new(&phases, DEFAULT_BIN_WIDTH)?;
        for (k, &count) in h.counts.iter().enumerate() {
            hist.push(vec![name.into(), v.into(), m.into(), n_used.into(), p.seed.into(), h.edges[k].into(), h.edges[k + 1].into(), count.into()]);
        }
        let var = ea_core::phase_stats::sample_variance(&phases)?;
        r.summary.push(format!("{name}: variance {var:.4} (linear prediction {:.4})", variance_predicted(v, m, n_used)));
    }
    r.tables.push(samples);
    r.tables.push(hist);
    r.plot = Some(
        "set datafile separator ','\nset multiplot layout 2,1\n\
         plot 'fig8_samples.csv' using 1:($2 eq 'noavg' ? $7 : 1/0) title 'no averaging', \
         '' using 1:($2 eq 'whole' ? $7 : 1/0) title 'whole', '' using 1:($2 eq 'each' ? $7 : 1/0) title 'each'\n\
         plot 'fig8_histogram.csv' using 6:($1 eq 'noavg' ? $8 : 1/0) with steps title 'no averaging', \
         '' using 6:($1 eq 'whole' ? $8 : 1/0) with steps title 'whole', '' using 6:($1 eq 'each' ? $8 : 1/0) with steps title 'each'\n\
         unset multiplot\n"
            .into(),
    );
    Ok(r)
}

/// Total-phase variance against chain length.
pub fn fig10(p: &Params) -> Result<Report> {
    let v = p.v_or(0.1);
    let n = p.n_or(4);
    let m_max = p.m_or(15);
    let runs = p.trials_or(50_000);
    let mut r = Report::default();
    base_params(&mut r, p, &[("v", json(v)), ("N", json(n)), ("M_max", json(m_max)), ("runs", json(runs))]);
    let mut t = Table::new("fig10.csv", &["M", "v", "N", "runs", "seed", "scheme", "variance", "predicted", "maximum"]);
    for m in 1..=m_max {
        for scheme in SCHEMES {
            let run = ChainRun { variance: v, elements: m, redundancy: n, runs, seed: p.seed };
            let var = phase_variance(&run, scheme)?;
            let n_used = copies(scheme, n);
            t.push(vec![m.into(), v.into(), n_used.into(), runs.into(), p.seed.into(), scheme_name(scheme).into(), var.into(), variance_predicted(v, m, n_used).into(), variance_max().into()]);
        }
    }
    r.summary.push(format!("{} rows over M = 1..{m_max}", t.rows.len()));
    r.tables.push(t);
    r.plot = Some(
        "set datafile separator ','\nset xlabel 'M'\n\
         plot 'fig10.csv' using 1:($6 eq 'noavg' ? $7 : 1/0) title 'no averaging', \
         '' using 1:($6 eq 'whole' ? $7 : 1/0) title 'whole', '' using 1:($6 eq 'each' ? $7 : 1/0) title 'each', \
         '' using 1:($6 eq 'whole' ? $8 : 1/0) with lines title 'vM/N', '' using 1:9 with lines title 'maximum'\n"
            .into(),
    );
    Ok(r)
}

/// Variance grid used by the per-element variance sweep.
pub fn fig11_grid(v_max: f64) -> Vec<f64> {
    (1..=40).map(|k| v_max * k as f64 / 40.0).collect()
}

/// Total-phase variance against per-element variance at fixed `M`, `N`.
pub fn fig11(p: &Params) -> Result<Report> {
    let v_max = p.v_or(0.5);
    let m = p.m_or(4);
    let n = p.n_or(4);
    let runs = p.trials_or(50_000);
    let grid = fig11_grid(v_max);
    let mut r = Report::default();
    base_params(&mut r, p, &[("v_max", json(v_max)), ("M", json(m)), ("N", json(n)), ("runs", json(runs))]);
    let mut t = Table::new(
        "fig11.csv",
        &["v", "M", "N", "runs", "seed", "scheme", "variance", "predicted", "maximum", "secant_slope_ratio"],
    );
    for scheme in SCHEMES {
        let n_used = copies(scheme, n);
        let mut prev: Option<(f64, f64)> = None;
        for &v in &grid {
            let run = ChainRun { variance: v, elements: m, redundancy: n, runs, seed: p.seed };
            let var = phase_variance(&run, scheme)?;
            let slope = prev.map_or(f64::NAN, |(pv, pvar)| (var - pvar) / (v - pv) / (m as f64 / n_used as f64));
            prev = Some((v, var));
            t.push(vec![v.into(), m.into(), n_used.into(), runs.into(), p.seed.into(), scheme_name(scheme).into(), var.into(), variance_predicted(v, m, n_used).into(), variance_max().into(), slope.into()]);
        }
    }
    r.summary.push(format!("{} rows over v up to {v_max}", t.rows.len()));
    r.tables.push(t);
    r.plot = Some(
        "set datafile separator ','\nset xlabel 'v'\n\
         plot 'fig11.csv' using 1:($6 eq 'noavg' ? $7 : 1/0) title 'no averaging', \
         '' using 1:($6 eq 'whole' ? $7 : 1/0) title 'whole', '' using 1:($6 eq 'each' ? $7 : 1/0) title 'each', \
         '' using 1:($6 eq 'whole' ? $8 : 1/0) with lines title 'vM/N', '' using 1:9 with lines title 'maximum'\n"
            .into(),
    );
    Ok(r)
}

/// Coefficient comparison for one printed entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryCheck {
    pub entry: TableEntry,
    pub printed: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub exact: f64,
}

impl EntryCheck {
    /// Non-zero entries within 15 %, zero entries below `0.1 v`.
    pub fn mc_matches(&self) -> bool {
        coefficient_matches(self.printed, self.mc_mean)
    }
}

pub fn coefficient_matches(printed: f64, measured: f64) -> bool {
    if printed == 0.0 {
        measured.abs() < 0.1
    } else {
        (measured - printed).abs() <= 0.15 * printed.abs()
    }
}

fn ratio_f64(r: num_rational::Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Entries grouped into (table, N) columns.
fn columns(filter: Option<usize>) -> BTreeMap<(u8, usize), Vec<TableEntry>> {
    let mut out: BTreeMap<(u8, usize), Vec<TableEntry>> = BTreeMap::new();
    for e in entries() {
        if filter.is_none_or(|n| n == e.redundancy) {
            out.entry((e.table, e.redundancy)).or_default().push(e);
        }
    }
    out
}

fn scheme_for(e: &TableEntry) -> Result<EncodingScheme> {
    Ok(EncodingScheme::new(e.redundancy, EncoderKind::Tree, e.strategy)?)
}

fn targets(col: &[TableEntry]) -> Vec<Target> {
    col.iter().map(|e| Target { output: e.output.clone(), conditional: e.conditional }).collect()
}

/// Monte Carlo slopes and exact coefficients for every printed entry.
pub fn check_tables(topology: &Topology, config: &SlopeConfig, n_filter: Option<usize>) -> Result<Vec<EntryCheck>> {
    let mut out = Vec::new();
    for ((table, n), col) in columns(n_filter) {
        let scheme = scheme_for(&col[0])?;
        let tg = targets(&col);
        let input = &col[0].input;
        let exact = laplacian_coefficients(topology, &scheme, input, &tg)?;
        let seed = config.seed ^ ((table as u64) << 40) ^ ((n as u64) << 32);
        let mc = slope_coefficients(topology, &scheme, input, &tg, &SlopeConfig { seed, ..*config })?;
        for ((e, x), m) in col.into_iter().zip(exact).zip(mc) {
            out.push(EntryCheck { printed: ratio_f64(e.coefficient), mc_mean: m.mean, mc_stderr: m.stderr, exact: x, entry: e });
        }
    }
    Ok(out)
}

/// Exact-coefficient agreement of one candidate topology with the tables.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyScore {
    pub topology: Topology,
    pub matched: usize,
    pub total: usize,
    pub max_abs_deviation: f64,
}

pub fn topology_search() -> Result<Vec<TopologyScore>> {
    let cols = columns(None);
    let mut out = Vec::new();
    for topology in Topology::candidates() {
        let (mut matched, mut total, mut worst) = (0, 0, 0.0f64);
        for col in cols.values() {
            let exact = laplacian_coefficients(&topology, &scheme_for(&col[0])?, &col[0].input, &targets(col))?;
            for (e, x) in col.iter().zip(exact) {
                let printed = ratio_f64(e.coefficient);
                total += 1;
                if (x - printed).abs() < 1e-4 {
                    matched += 1;
                }
                worst = worst.max((x - printed).abs());
            }
        }
        out.push(TopologyScore { topology, matched, total, max_abs_deviation: worst });
    }
    Ok(out)
}

pub fn tables4(p: &Params) -> Result<Report> {
    let step = p.v_or(0.004);
    let trials = p.trials_or(200_000);
    let config = SlopeConfig { trials, seed: p.seed, step };
    let mut r = Report::default();
    base_params(&mut r, p, &[("step", json(step)), ("trials", json(trials)), ("N", json(p.n)), ("topology", json(Topology::DEFAULT.to_string()))]);
    let checks = check_tables(&Topology::DEFAULT, &config, p.n)?;
    let mut t = Table::new(
        "tables4.csv",
        &["table", "input", "strategy", "N", "output", "postselected", "printed", "mc_coefficient", "mc_stderr", "exact_coefficient", "step", "trials", "seed", "mc_matches", "exact_matches"],
    );
    for c in &checks {
        let e = &c.entry;
        let strategy = match e.strategy {
            Strategy::Whole => "whole",
            Strategy::Each => "each",
        };
        t.push(vec![
            e.table.into(), e.input.to_string().into(), strategy.into(), e.redundancy.into(), e.output.to_string().into(),
            e.conditional.into(), c.printed.into(), c.mc_mean.into(), c.mc_stderr.into(), c.exact.into(),
            step.into(), trials.into(), p.seed.into(), c.mc_matches().into(), ((c.exact - c.printed).abs() < 1e-4).into(),
        ]);
        if !c.mc_matches() {
            r.summary.push(format!("mismatch: {} printed {} measured {:.4} +- {:.4} exact {:.4}", e.label(), c.printed, c.mc_mean, c.mc_stderr, c.exact));
        }
    }
    let ok = checks.iter().filter(|c| c.mc_matches()).count();
    r.summary.push(format!("{ok}/{} printed coefficients reproduced", checks.len()));
    r.tables.push(t);

    let scores = topology_search()?;
    let mut s = Table::new("tables4_topology.csv", &["candidate", "topology", "is_default", "matched", "total", "max_abs_deviation"]);
    for (i, sc) in scores.iter().enumerate() {
        s.push(vec![i.into(), sc.topology.to_string().into(), (sc.topology == Topology::DEFAULT).into(), sc.matched.into(), sc.total.into(), sc.max_abs_deviation.into()]);
    }
    let best = scores.iter().map(|s| s.matched).max().unwrap_or(0);
    let default = scores.iter().find(|s| s.topology == Topology::DEFAULT).expect("default is a candidate");
    r.summary.push(format!(
        "topology search: default matches {}/{} exactly; best of {} candidates matches {best}; full matches: {}",
        default.matched,
        default.total,
        scores.len(),
        scores.iter().filter(|s| s.matched == s.total).count()
    ));
    r.tables.push(s);
    Ok(r)
}

/// Per-entry variance of the averaged four-mode network against `N`.
pub fn scan(p: &Params) -> Result<Report> {
    let v = p.v_or(0.1);
    let ns = p.n_list(&[1, 2, 4, 8, 16]);
    let seeds = p.trials_or(500);
    let mut r = Report::default();
    base_params(&mut r, p, &[("v", json(v)), ("N", json(&ns)), ("seeds", json(seeds)), ("target", json("four-mode identity"))]);
    let result = run_scan(v, &ns, seeds, p.seed)?;
    let mut t = Table::new("scan.csv", &["N", "row", "col", "v", "seeds", "seed", "var_re", "var_im"]);
    for row in &result.rows {
        t.push(vec![row.redundancy.into(), row.row.into(), row.col.into(), v.into(), seeds.into(), p.seed.into(), row.var_re.into(), row.var_im.into()]);
    }
    let mut totals = Table::new("scan_totals.csv", &["N", "v", "seeds", "seed", "total_variance", "ratio_to_double_N"]);
    for &n in &ns {
        let total = result.total_variance(n).expect("scanned");
        let ratio = result.total_variance(2 * n).map_or(f64::NAN, |next| total / next);
        totals.push(vec![n.into(), v.into(), seeds.into(), p.seed.into(), total.into(), ratio.into()]);
        r.summary.push(format!("N={n}: total variance {total:.5}, ratio to 2N {ratio:.3}"));
    }
    r.tables.push(t);
    r.tables.push(totals);
    r.plot = Some(
        "set datafile separator ','\nset logscale xy\nset xlabel 'N'\nplot 'scan_totals.csv' using 1:5 with linespoints title 'total variance'\n"
            .into(),
    );
    Ok(r)
}

pub fn run_scan(v: f64, ns: &[usize], seeds: u64, seed: u64) -> Result<ea_core::montecarlo::ScanResult> {
    let ns_enc: Vec<usize> = ns.to_vec();
    let encoder = if ns_enc.iter().all(|n| n.is_power_of_two()) { EncoderKind::Tree } else { EncoderKind::Dft };
    Ok(variance_scan(&ScanConfig {
        target: four_mode_circuit(v)?,
        variance: v,
        redundancies: ns_enc,
        seeds,
        master_seed: seed,
        encoder,
        strategy: Strategy::Whole,
    })?)
}
