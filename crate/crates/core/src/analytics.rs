//! Closed-form predictions for averaged networks under Gaussian phase noise.
//!
//! Low-order expansions are implemented exactly as printed, term by term.
//! Where an exact expectation is available in closed form (via the Gaussian
//! characteristic function) it is provided alongside as an `_exact` variant.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `E[e^{i delta}]` for `delta ~ Normal(0, v)`, i.e. `e^{-v/2}`.
pub fn mean_phase_factor(v: f64) -> Result<f64> {
    if v.is_nan() || v < 0.0 {
        return invalid(format!("variance must be non-negative, got {v}"));
    }
    Ok((-v / 2.0).exp())
}

/// Per-generator noise for a multi-parameter error `U exp(i sum_l alpha_l T_l)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorNoise {
    /// Standard deviation of each `alpha_l`.
    pub sigmas: Vec<f64>,
    /// Whether every generator squares to the identity.
    pub involutory: bool,
}

/// Attenuation `c` in `M ~ c U` for approximately commuting errors,
/// `prod_l e^{-sigma_l^2 / 2}`.
pub fn commuting_mean_scale(noise: &GeneratorNoise) -> Result<f64> {
    if !noise.involutory {
        return Err(Error::Unsupported(
            "non-involutory generators give a state-dependent decay".into(),
        ));
    }
    if noise.sigmas.iter().any(|s| s.is_nan() || *s < 0.0) {
        return invalid("generator standard deviations must be non-negative");
    }
    Ok(noise.sigmas.iter().map(|s| (-s * s / 2.0).exp()).product())
}

// Single photon through an averaged MZ, first order in v.

pub fn sp_success(v: f64, n: usize) -> f64 {
    1.0 + v / (2.0 * n as f64) - v / 2.0
}

pub fn sp_correct_nopost(v: f64, n: usize) -> f64 {
    let n = n as f64;
    1.0 - (2.0 * n - 1.0) * v / (4.0 * n)
}

pub fn sp_correct_post(v: f64, n: usize) -> f64 {
    1.0 - v / (4.0 * n as f64)
}

/// `E[(|S|^2 + 1) / 2]` with `S = (1/N) sum_j e^{i delta_j}`:
/// `(1 + 1/N + (1 - 1/N) e^{-v}) / 2`.
pub fn sp_success_exact(v: f64, n: usize) -> f64 {
    let inv = 1.0 / n as f64;
    (1.0 + inv + (1.0 - inv) * (-v).exp()) / 2.0
}

/// `E|S + 1|^2 / 4 / sp_success_exact`, the post-selected correct-port probability.
pub fn sp_correct_post_exact(v: f64, n: usize) -> f64 {
    let q = averaged_norm_sq(v, n);
    (q + 2.0 * (-v / 2.0).exp() + 1.0) / (2.0 * (q + 1.0))
}

/// `E|S|^2 = 1/N + (1 - 1/N) e^{-v}` for an average of `N` unit phasors.
fn averaged_norm_sq(v: f64, n: usize) -> f64 {
    let inv = 1.0 / n as f64;
    inv + (1.0 - inv) * (-v).exp()
}

// Two photons |1,1> through an averaged MZ, first order in v.

pub fn tp_expect_coinc(v: f64) -> f64 {
    1.0 - v
}

pub fn tp_coincidence_post(v: f64, n: usize) -> f64 {
    1.0 - v / (2.0 * n as f64)
}

pub fn tp_success(v: f64, n: usize) -> f64 {
    1.0 - v + v / (2.0 * n as f64)
}

/// `M` phase shifters in series, each with variance `v`, averaged `N` times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub m: usize,
    pub v: f64,
    pub n: usize,
}

impl ChainParams {
    pub fn new(m: usize, v: f64, n: usize) -> Result<Self> {
        if v.is_nan() || v < 0.0 {
            return invalid("variance must be non-negative");
        }
        if n == 0 {
            return invalid("redundancy must be at least 1");
        }
        Ok(Self { m, v, n })
    }

    fn parts(&self) -> (f64, f64, f64) {
        (self.m as f64, self.v, 1.0 - 1.0 / self.n as f64)
    }
}

/// `1 - Mv/4 + M^2 v^2 / 16`.
pub fn chain_correct_noavg(p: &ChainParams) -> f64 {
    let (m, v, _) = p.parts();
    1.0 - m * v / 4.0 + m * m * v * v / 16.0
}

/// `(1 + e^{-Mv/2}) / 2`.
pub fn chain_correct_noavg_exact(p: &ChainParams) -> f64 {
    let (m, v, _) = p.parts();
    (1.0 + (-m * v / 2.0).exp()) / 2.0
}

/// `1 - (1 - 1/N)(Mv - M^2 v^2 / 2)`.
pub fn chain_success_avg_whole(p: &ChainParams) -> f64 {
    let (m, v, k) = p.parts();
    1.0 - k * (m * v - m * m * v * v / 2.0)
}

/// First-order truncation `1 - (1 - 1/N) M v`.
pub fn chain_success_avg_whole_first_order(p: &ChainParams) -> f64 {
    let (m, v, k) = p.parts();
    1.0 - k * m * v
}

/// `1/N + (1 - 1/N) e^{-Mv}`.
pub fn chain_success_avg_whole_exact(p: &ChainParams) -> f64 {
    averaged_norm_sq(p.m as f64 * p.v, p.n)
}

/// Post-selected correct-port probability when the whole chain is averaged.
pub fn chain_correct_avg_whole(p: &ChainParams) -> f64 {
    let (m, v, k) = p.parts();
    let numerator = 1.0 - 0.25 * (m * v - m * m * v * v / 4.0 + k * (m * v - m * m * v * v / 2.0));
    let denominator = 1.0 - k * (m * v / 2.0 - m * m * v * v / 4.0);
    numerator / denominator
}

pub fn chain_correct_avg_whole_exact(p: &ChainParams) -> f64 {
    let q = chain_success_avg_whole_exact(p);
    let mean = (-(p.m as f64) * p.v / 2.0).exp();
    (q + 2.0 * mean + 1.0) / (2.0 * (q + 1.0))
}

fn each_factor(p: &ChainParams) -> f64 {
    let (_, v, k) = p.parts();
    1.0 - (v - v * v / 2.0) * k
}

/// `(1 - (v - v^2/2)(1 - 1/N))^M`.
pub fn chain_success_avg_each(p: &ChainParams) -> f64 {
    each_factor(p).powi(p.m as i32)
}

/// First-order truncation `(1 - v (1 - 1/N))^M`.
pub fn chain_success_avg_each_first_order(p: &ChainParams) -> f64 {
    let (_, v, k) = p.parts();
    (1.0 - v * k).powi(p.m as i32)
}

/// `(1/N + (1 - 1/N) e^{-v})^M`.
pub fn chain_success_avg_each_exact(p: &ChainParams) -> f64 {
    averaged_norm_sq(p.v, p.n).powi(p.m as i32)
}

/// Post-selected correct-port probability when every element is averaged.
pub fn chain_correct_avg_each(p: &ChainParams) -> f64 {
    let (m, v, _) = p.parts();
    let s = chain_success_avg_each(p);
    let numerator = 0.75 - m * v / 4.0 + m * m * v * v / 16.0 + 0.25 * s;
    let denominator = 0.5 + 0.5 * s;
    numerator / denominator
}

pub fn chain_correct_avg_each_exact(p: &ChainParams) -> f64 {
    let q = chain_success_avg_each_exact(p);
    let mean = (-(p.m as f64) * p.v / 2.0).exp();
    (q + 2.0 * mean + 1.0) / (2.0 * (q + 1.0))
}

/// Linear prediction `v M / N` for the variance of the total applied phase.
pub fn variance_predicted(v: f64, m: usize, n: usize) -> f64 {
    v * m as f64 / n as f64
}

/// Variance of a uniform phase on `(-pi, pi]`: `pi^2 / 3`.
pub fn variance_max() -> f64 {
    std::f64::consts::PI.powi(2) / 3.0
}

/// Unaveraged first-order error `P_1(correct) = 1 - (a1 / b1) v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrenceParams {
    pub a1: i64,
    pub b1: i64,
}

impl RecurrenceParams {
    pub fn new(a1: i64, b1: i64) -> Result<Self> {
        if a1 < 1 || b1 < 1 {
            return invalid("recurrence parameters must be positive");
        }
        Ok(Self { a1, b1 })
    }
}

/// First-order coefficients after `n` averaging rounds (`N = 2^{n-1}`).
/// Probabilities read `1 - correct v`, `wrong v`, `1 - success v` and
/// `1 - correct_post v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecurrenceCoefficients {
    pub correct: Ratio<i64>,
    pub wrong: Ratio<i64>,
    pub success: Ratio<i64>,
    pub correct_post: Ratio<i64>,
}

pub fn recurrence_coefficients(r: &RecurrenceParams, rounds: u32) -> Result<RecurrenceCoefficients> {
    if rounds == 0 {
        return invalid("rounds are counted from 1");
    }
    if rounds > 40 {
        return Err(Error::ResourceLimit("too many rounds for exact rationals".into()));
    }
    let scale = 1i64 << (rounds - 1);
    let denom = scale * r.b1;
    Ok(RecurrenceCoefficients {
        correct: Ratio::new(scale * r.a1 + scale - 1, denom),
        wrong: Ratio::new(r.a1, denom),
        success: Ratio::new((scale - 1) * (r.a1 + 1), denom),
        correct_post: Ratio::new(r.a1, denom),
    })
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn recurrence_correct(r: &RecurrenceParams, rounds: u32, v: f64) -> Result<f64> {
    Ok(1.0 - ratio_f64(recurrence_coefficients(r, rounds)?.correct) * v)
}

pub fn recurrence_wrong(r: &RecurrenceParams, rounds: u32, v: f64) -> Result<f64> {
    Ok(ratio_f64(recurrence_coefficients(r, rounds)?.wrong) * v)
}

pub fn recurrence_success(r: &RecurrenceParams, rounds: u32, v: f64) -> Result<f64> {
    Ok(1.0 - ratio_f64(recurrence_coefficients(r, rounds)?.success) * v)
}

pub fn recurrence_correct_post(r: &RecurrenceParams, rounds: u32, v: f64) -> Result<f64> {
    Ok(1.0 - ratio_f64(recurrence_coefficients(r, rounds)?.correct_post) * v)
}

/// `lim P_n(success) = 1 - (a1 + 1) v / b1`.
pub fn recurrence_asymptote_success(r: &RecurrenceParams, v: f64) -> f64 {
    1.0 - (r.a1 + 1) as f64 * v / r.b1 as f64
}

/// Amplitude decay `e^{-k n^2 sigma^2 / 2}` for `k` photons through an
/// `n`-mode network averaged over all `n^2` generators.
pub fn multiphoton_success(photons: u32, modes: u32, sigma: f64) -> f64 {
    let n = modes as f64;
    (-(photons as f64) * n * n * sigma * sigma / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn phase_factor() {
        assert_eq!(mean_phase_factor(0.0).unwrap(), 1.0);
        assert!(close(mean_phase_factor(0.1).unwrap(), 0.951229, 5e-7));
        assert!(mean_phase_factor(-0.1).is_err());
    }

    #[test]
    fn commuting_scale() {
        let none = GeneratorNoise { sigmas: vec![0.0; 4], involutory: true };
        assert_eq!(commuting_mean_scale(&none).unwrap(), 1.0);
        let one = GeneratorNoise { sigmas: vec![0.1f64.sqrt()], involutory: true };
        assert!(close(commuting_mean_scale(&one).unwrap(), mean_phase_factor(0.1).unwrap(), 1e-15));
        let four = GeneratorNoise { sigmas: vec![0.1; 4], involutory: true };
        assert!(close(commuting_mean_scale(&four).unwrap(), (-0.02f64).exp(), 1e-15));
        let bad = GeneratorNoise { sigmas: vec![0.1], involutory: false };
        assert!(matches!(commuting_mean_scale(&bad), Err(Error::Unsupported(_))));
    }

    #[test]
    fn single_photon_forms() {
        assert!(close(sp_success(0.1, 1 << 30), 0.95, 1e-9));
        assert!(close(sp_correct_post(0.1, 8), 0.996875, 1e-15));
        // at N = 1 the unconditional and conditional forms agree to first order
        for v in [1e-3, 1e-4] {
            let lhs = sp_correct_nopost(v, 1);
            let rhs = sp_correct_post(v, 1) * sp_success(v, 1);
            assert!(close(lhs, rhs, 1e-15 + v * v));
        }
        assert_eq!(sp_success_exact(0.0, 5), 1.0);
        assert!(close(sp_success_exact(0.1, 8), 0.958366, 5e-7));
    }

    #[test]
    fn first_order_matches_exact_expansion() {
        // d/dv at v=0 by central differences, compared with the linear coefficient
        let h = 1e-5;
        for n in [1, 2, 4, 8, 32] {
            let slope = (sp_success_exact(h, n) - sp_success_exact(-h, n)) / (2.0 * h);
            let linear = sp_success(1.0, n) - sp_success(0.0, n);
            assert!(close(slope, linear, 1e-9), "N={n}");
            assert_eq!(sp_success(0.0, n), sp_success_exact(0.0, n));
        }
    }

    #[test]
    fn two_photon_forms() {
        assert_eq!(tp_expect_coinc(0.0), 1.0);
        assert_eq!(tp_coincidence_post(0.0, 4), 1.0);
        assert_eq!(tp_success(0.0, 4), 1.0);
        assert!(close(tp_coincidence_post(0.1, 4), 0.9875, 1e-15));
        let v = 1e-4;
        let prod = tp_success(v, 4) * tp_coincidence_post(v, 4);
        assert!(close(prod, tp_expect_coinc(v), 2.0 * v * v));
    }

    #[test]
    fn chain_forms() {
        let p = ChainParams::new(0, 0.1, 1).unwrap();
        assert_eq!(chain_correct_noavg(&p), 1.0);
        let p = ChainParams::new(4, 0.005, 1).unwrap();
        assert!(close(chain_correct_noavg(&p), 0.995025, 1e-12));
        assert!(close(chain_correct_noavg(&p), chain_correct_noavg_exact(&p), 1e-6));

        let p = ChainParams::new(3, 0.1, 1).unwrap();
        assert_eq!(chain_success_avg_whole(&p), 1.0);
        let p = ChainParams::new(5, 0.0, 8).unwrap();
        assert_eq!(chain_success_avg_each(&p), 1.0);

        for n in [1, 2, 4, 16] {
            let p = ChainParams::new(1, 0.02, n).unwrap();
            assert!(close(chain_success_avg_each(&p), chain_success_avg_whole(&p), 1e-15));
        }

        assert!(ChainParams::new(1, -0.1, 1).is_err());
        assert!(ChainParams::new(1, 0.1, 0).is_err());
    }

    #[test]
    fn chain_single_element_matches_single_photon_first_order() {
        let v = 1e-5;
        for n in [1, 2, 4, 8] {
            let p = ChainParams::new(1, v, n).unwrap();
            let mz_success = (1.0 + chain_success_avg_whole(&p)) / 2.0;
            assert!(close(mz_success, sp_success(v, n), 3.0 * v * v));
            assert!(close(chain_correct_avg_whole(&p), sp_correct_post(v, n), 3.0 * v * v));
            assert!(close(chain_correct_avg_each(&p), sp_correct_post(v, n), 3.0 * v * v));
        }
    }

    #[test]
    fn second_order_forms_track_exact_values() {
        // truncation error is third order in the per-copy variance M v
        for (m, v, n) in [(3, 0.005, 4), (1, 0.01, 2), (8, 0.002, 16)] {
            let p = ChainParams::new(m, v, n).unwrap();
            let x = m as f64 * v;
            let tol = 2.0 * x.powi(3);
            assert!(close(chain_success_avg_whole(&p), chain_success_avg_whole_exact(&p), tol));
            assert!(close(chain_correct_avg_whole(&p), chain_correct_avg_whole_exact(&p), tol));
            assert!(close(chain_success_avg_each(&p), chain_success_avg_each_exact(&p), tol));
            assert!(close(chain_correct_avg_each(&p), chain_correct_avg_each_exact(&p), tol));
        }
    }

    #[test]
    fn strategies_agree_to_first_order() {
        for m in 1..=12 {
            for n in [1, 2, 4, 16] {
                for v in [1e-3, 1e-4] {
                    let p = ChainParams::new(m, v, n).unwrap();
                    let d = (chain_success_avg_whole(&p) - chain_success_avg_each(&p)).abs();
                    assert!(d <= (m * m) as f64 * v * v, "M={m} N={n} v={v}");
                }
            }
        }
    }

    #[test]
    fn variance_laws() {
        assert!(close(variance_predicted(0.1, 4, 4), 0.1, 1e-15));
        assert!(close(variance_max(), 3.289868, 5e-7));
        assert_eq!(variance_predicted(0.3, 1, 1), 0.3);
    }

    #[test]
    fn recurrence_rows() {
        let single = RecurrenceParams::new(1, 2).unwrap();
        let c = recurrence_coefficients(&single, 2).unwrap();
        assert_eq!(c.correct, Ratio::new(3, 4));
        assert_eq!(c.wrong, Ratio::new(1, 4));

        let pair = RecurrenceParams::new(3, 2).unwrap();
        let c = recurrence_coefficients(&pair, 2).unwrap();
        assert_eq!(c.correct, Ratio::new(7, 4));
        assert_eq!(c.correct_post, Ratio::new(3, 4));

        // round 1 reproduces the inputs and errors halve each round
        for r in [single, pair, RecurrenceParams::new(2, 2).unwrap()] {
            let first = recurrence_coefficients(&r, 1).unwrap();
            assert_eq!(first.correct, Ratio::new(r.a1, r.b1));
            assert_eq!(first.wrong, Ratio::new(r.a1, r.b1));
            assert_eq!(first.success, Ratio::new(0, 1));
            for n in 1..10 {
                let a = recurrence_coefficients(&r, n).unwrap();
                let b = recurrence_coefficients(&r, n + 1).unwrap();
                assert_eq!(b.wrong / a.wrong, Ratio::new(1, 2));
                // correct + wrong = success
                assert_eq!(a.correct - a.wrong, a.success);
            }
        }
        assert!(recurrence_coefficients(&single, 0).is_err());
        assert!(RecurrenceParams::new(0, 2).is_err());
    }

    #[test]
    fn recurrence_limits() {
        let r = RecurrenceParams::new(3, 2).unwrap();
        let v = 0.01;
        assert!(close(recurrence_correct_post(&r, 40, v).unwrap(), 1.0, 1e-12));
        assert!(close(
            recurrence_success(&r, 40, v).unwrap(),
            recurrence_asymptote_success(&r, v),
            1e-12
        ));
        assert!(close(recurrence_correct(&r, 2, v).unwrap(), 1.0 - 7.0 * v / 4.0, 1e-15));
        assert!(close(recurrence_wrong(&r, 3, v).unwrap(), 3.0 * v / 8.0, 1e-15));
    }

    #[test]
    fn multiphoton_decay() {
        assert_eq!(multiphoton_success(0, 5, 0.3), 1.0);
        assert!(close(multiphoton_success(1, 1, 0.1f64.sqrt()), mean_phase_factor(0.1).unwrap(), 1e-15));
        let c = 0.2;
        let base = multiphoton_success(2, 4, c / 4.0);
        for n in [8u32, 16, 64, 1024] {
            assert!(close(multiphoton_success(2, n, c / n as f64), base, 1e-14));
        }
    }
}
