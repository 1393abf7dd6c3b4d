//! The four-mode identity network built from tunable beam splitters, and
//! first-order coefficient extraction for its output statistics.

use std::fmt;

use ea_core::circuit::{compile_columns, sample_realization};
use ea_core::encoding::{encode, EncodedCircuit, EncodingScheme};
use ea_core::fock::KeptOutcomes;
use ea_core::montecarlo::{run_trials, MCEstimate};
use ea_core::{Circuit, FockState};

use crate::error::Result;

/// Two columns of two interferometers each; the phase shifter of `MZ(i, j)` sits on mode `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub columns: [[(usize, usize); 2]; 2],
}

impl Topology {
    pub const DEFAULT: Topology = Topology {
        columns: [[(0, 1), (2, 3)], [(1, 2), (0, 3)]],
    };

    pub fn circuit(&self, variance: f64) -> Result<Circuit> {
        let mut c = Circuit::new(4)?;
        for column in &self.columns {
            for &(i, j) in column {
                c.push_mz(i, j, 0.0, variance)?;
            }
        }
        Ok(c)
    }

    /// Every pairing of the two columns with every orientation of each interferometer.
    pub fn candidates() -> Vec<Topology> {
        const MATCHINGS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(1, 2), (0, 3)]];
        let orient = |p: [(usize, usize); 2], bits: u8| -> [(usize, usize); 2] {
            let mut out = p;
            for (k, pair) in out.iter_mut().enumerate() {
                if bits >> k & 1 == 1 {
                    *pair = (pair.1, pair.0);
                }
            }
            out
        };
        let mut out = Vec::new();
        for first in MATCHINGS {
            for second in MATCHINGS {
                for bits in 0..16u8 {
                    out.push(Topology {
                        columns: [orient(first, bits & 3), orient(second, bits >> 2)],
                    });
                }
            }
        }
        out
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.columns;
        write!(
            f,
            "MZ({},{}) MZ({},{}) | MZ({},{}) MZ({},{})",
            a.0, a.1, b.0, b.1, c.0, c.1, d.0, d.1
        )
    }
}

/// Default topology with every phase error of variance `v`.
pub fn four_mode_circuit(v: f64) -> Result<Circuit> {
    Topology::DEFAULT.circuit(v)
}

/// An outcome over the kept modes, unconditional or post-selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub output: FockState,
    pub conditional: bool,
}

struct Evaluator {
    encoded: EncodedCircuit,
    outcomes: KeptOutcomes,
    physical: FockState,
    columns: Vec<usize>,
    indices: Vec<usize>,
}

impl Evaluator {
    fn new(topology: &Topology, scheme: &EncodingScheme, input: &FockState, targets: &[Target]) -> Result<Self> {
        let encoded = encode(&topology.circuit(1.0)?, scheme)?;
        let outcomes = KeptOutcomes::new(&encoded.kept_modes, input.photons());
        let physical = input.embed(encoded.circuit.mode_count(), &encoded.kept_modes)?;
        let mut columns = physical.photon_modes();
        columns.dedup();
        let indices = targets
            .iter()
            .map(|t| {
                outcomes
                    .states()
                    .binary_search(&t.output)
                    .map_err(|_| ea_core::Error::InvalidArgument(format!("{} is not a kept outcome", t.output)).into())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { encoded, outcomes, physical, columns, indices })
    }

    fn phase_count(&self) -> usize {
        self.encoded.circuit.phase_count()
    }

    /// Joint probability of each target followed by the success probability.
    fn eval(&self, deltas: &[f64]) -> ea_core::Result<Vec<f64>> {
        let cols = compile_columns(&self.encoded.circuit, deltas, &self.columns)?;
        let probs = self.outcomes.probabilities(&cols, &self.physical)?;
        let mut out: Vec<f64> = self.indices.iter().map(|&i| probs[i]).collect();
        out.push(probs.iter().sum());
        Ok(out)
    }
}

/// Combines finite-difference values of joint and success probabilities into
/// target coefficients; conditional targets use `d(J/S) = dJ - J0 dS` at `S0 = 1`.
fn combine(targets: &[Target], base: &[f64], diff: &[f64]) -> Vec<f64> {
    let ds = *diff.last().expect("success slot");
    targets
        .iter()
        .enumerate()
        .map(|(i, t)| if t.conditional { diff[i] - base[i] * ds } else { diff[i] })
        .collect()
}

/// Exact first-order coefficients `(1/2) sum_i d^2 f / d delta_i^2` by central differences.
pub fn laplacian_coefficients(
    topology: &Topology,
    scheme: &EncodingScheme,
    input: &FockState,
    targets: &[Target],
) -> Result<Vec<f64>> {
    const H: f64 = 1e-3;
    let ev = Evaluator::new(topology, scheme, input, targets)?;
    let p = ev.phase_count();
    let mut deltas = vec![0.0; p];
    let base = ev.eval(&deltas)?;
    let mut lap = vec![0.0; base.len()];
    for i in 0..p {
        deltas[i] = H;
        let plus = ev.eval(&deltas)?;
        deltas[i] = -H;
        let minus = ev.eval(&deltas)?;
        deltas[i] = 0.0;
        for (k, l) in lap.iter_mut().enumerate() {
            *l += 0.5 * (plus[k] - 2.0 * base[k] + minus[k]) / (H * H);
        }
    }
    Ok(combine(targets, &base, &lap))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeConfig {
    pub trials: u64,
    pub seed: u64,
    /// Variances sampled are `h` and `2h`.
    pub step: f64,
}

/// Monte Carlo first-order coefficients from the second-order one-sided
/// difference `(-3 P(0) + 4 P(h) - P(2h)) / 2h`. Both variances reuse the same
/// standard-normal draws, so the difference is taken trial by trial.
pub fn slope_coefficients(
    topology: &Topology,
    scheme: &EncodingScheme,
    input: &FockState,
    targets: &[Target],
    config: &SlopeConfig,
) -> Result<Vec<MCEstimate>> {
    let ev = Evaluator::new(topology, scheme, input, targets)?;
    let base = ev.eval(&vec![0.0; ev.phase_count()])?;
    let h = config.step;
    let (s1, s2) = (h.sqrt(), (2.0 * h).sqrt());
    let moments = run_trials(
        config.trials,
        config.seed,
        targets.len(),
        || (),
        |_, rng, out| {
            let z = sample_realization(&ev.encoded.circuit, rng).deltas;
            let d1: Vec<f64> = z.iter().map(|x| x * s1).collect();
            let d2: Vec<f64> = z.iter().map(|x| x * s2).collect();
            let (f1, f2) = (ev.eval(&d1)?, ev.eval(&d2)?);
            let diff: Vec<f64> = (0..base.len())
                .map(|k| (-3.0 * base[k] + 4.0 * f1[k] - f2[k]) / (2.0 * h))
                .collect();
            for (slot, c) in out.iter_mut().zip(combine(targets, &base, &diff)) {
                *slot = (c, 0.0);
            }
            Ok(())
        },
    )?;
    Ok(moments.iter().map(|m| m.estimate()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ea_core::circuit::compile;
    use ea_core::linalg::NetworkMatrix;
    use ea_core::{EncoderKind, NoiseRealization, Strategy};

    #[test]
    fn noiseless_network_is_identity() {
        let c = four_mode_circuit(0.0).unwrap();
        let u = compile(&c, &NoiseRealization::zeros(&c)).unwrap();
        assert!(u.max_abs_diff(&NetworkMatrix::identity(4)) < 1e-12);
        assert_eq!(c.phase_count(), 4);
    }

    #[test]
    fn candidate_list() {
        let all = Topology::candidates();
        assert_eq!(all.len(), 144);
        assert!(all.contains(&Topology::DEFAULT));
        for t in &all {
            let c = t.circuit(0.0).unwrap();
            let u = compile(&c, &NoiseRealization::zeros(&c)).unwrap();
            assert!(u.max_abs_diff(&NetworkMatrix::identity(4)) < 1e-12);
        }
    }

    #[test]
    fn single_photon_leakage_pattern() {
        let scheme = EncodingScheme::new(1, EncoderKind::Tree, Strategy::Whole).unwrap();
        let targets: Vec<Target> = (0..4)
            .map(|m| Target { output: FockState::single(4, m), conditional: false })
            .collect();
        let c = laplacian_coefficients(&Topology::DEFAULT, &scheme, &FockState::single(4, 0), &targets).unwrap();
        let expected = [-0.5, 0.25, 0.0, 0.25];
        for (a, b) in c.iter().zip(expected) {
            assert!((a - b).abs() < 1e-6, "{c:?}");
        }
    }

    #[test]
    fn slopes_agree_with_laplacian() {
        let input = FockState::new(vec![1, 1, 0, 0]);
        let targets = vec![
            Target { output: input.clone(), conditional: false },
            Target { output: input.clone(), conditional: true },
            Target { output: FockState::new(vec![2, 0, 0, 0]), conditional: false },
        ];
        let scheme = EncodingScheme::new(2, EncoderKind::Tree, Strategy::Each).unwrap();
        let exact = laplacian_coefficients(&Topology::DEFAULT, &scheme, &input, &targets).unwrap();
        let cfg = SlopeConfig { trials: 20_000, seed: 3, step: 0.004 };
        let mc = slope_coefficients(&Topology::DEFAULT, &scheme, &input, &targets, &cfg).unwrap();
        for (e, m) in exact.iter().zip(&mc) {
            assert!((m.mean - e).abs() < 4.0 * m.stderr + 2e-3, "{e} vs {m:?}");
        }
    }
}
