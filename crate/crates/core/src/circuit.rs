//! Noisy photonic circuits built from fixed 50:50 beam splitters and
//! Gaussian-noise phase shifters.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::NetworkMatrix;

/// Symmetric 50:50 splitter `(1/sqrt 2) [[1, 1], [1, -1]]`.
pub const HADAMARD: [[Complex64; 2]; 2] = [
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)],
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(-FRAC_1_SQRT_2, 0.0)],
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseShifter {
    pub mode: usize,
    /// Intended shift in radians.
    pub theta: f64,
    /// Variance of the Gaussian error, rad^2.
    pub variance: f64,
}

/// 50:50 splitter acting as [`HADAMARD`] on `(first, second)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedBeamSplitter {
    pub first: usize,
    pub second: usize,
}

/// A noiseless multi-mode transformation, used for DFT encoders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedUnitary {
    pub modes: Vec<usize>,
    pub matrix: NetworkMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    BeamSplitter(FixedBeamSplitter),
    Phase(PhaseShifter),
    Fixed(FixedUnitary),
}

impl Element {
    pub fn beam_splitter(first: usize, second: usize) -> Self {
        Element::BeamSplitter(FixedBeamSplitter { first, second })
    }

    pub fn phase(mode: usize, theta: f64, variance: f64) -> Self {
        Element::Phase(PhaseShifter {
            mode,
            theta,
            variance,
        })
    }

    pub fn modes(&self) -> Vec<usize> {
        match self {
            Element::BeamSplitter(b) => vec![b.first, b.second],
            Element::Phase(p) => vec![p.mode],
            Element::Fixed(f) => f.modes.clone(),
        }
    }

    /// Same element with every mode index passed through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Self {
        match self {
            Element::BeamSplitter(b) => Element::beam_splitter(map(b.first), map(b.second)),
            Element::Phase(p) => Element::phase(map(p.mode), p.theta, p.variance),
            Element::Fixed(f) => Element::Fixed(FixedUnitary {
                modes: f.modes.iter().map(|&m| map(m)).collect(),
                matrix: f.matrix.clone(),
            }),
        }
    }

    fn validate(&self, mode_count: usize) -> Result<()> {
        let modes = self.modes();
        if let Some(&m) = modes.iter().find(|&&m| m >= mode_count) {
            return invalid(format!("mode {m} out of range for {mode_count} modes"));
        }
        match self {
            Element::BeamSplitter(b) if b.first == b.second => {
                invalid("beam splitter needs two distinct modes")
            }
            Element::Phase(p) if p.variance.is_nan() || p.variance < 0.0 || !p.theta.is_finite() => {
                invalid(format!("bad phase shifter (theta {}, variance {})", p.theta, p.variance))
            }
            Element::Fixed(f) => {
                let mut sorted = f.modes.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != f.modes.len() || f.matrix.dim() != f.modes.len() {
                    return invalid("fixed block needs distinct modes matching its size");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Ordered list of optical elements on `mode_count` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    mode_count: usize,
    elements: Vec<Element>,
}

impl Circuit {
    pub fn new(mode_count: usize) -> Result<Self> {
        if mode_count == 0 {
            return invalid("a circuit needs at least one mode");
        }
        Ok(Self {
            mode_count,
            elements: Vec::new(),
        })
    }

    pub fn with_elements(mode_count: usize, elements: Vec<Element>) -> Result<Self> {
        let mut c = Self::new(mode_count)?;
        for e in elements {
            c.push(e)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, element: Element) -> Result<&mut Self> {
        element.validate(self.mode_count)?;
        self.elements.push(element);
        Ok(self)
    }

    pub fn extend(&mut self, elements: impl IntoIterator<Item = Element>) -> Result<&mut Self> {
        for e in elements {
            self.push(e)?;
        }
        Ok(self)
    }

    /// Appends a Mach-Zehnder tunable beam splitter, see [`mz_tunable_bs`].
    pub fn push_mz(&mut self, i: usize, j: usize, theta: f64, variance: f64) -> Result<&mut Self> {
        let fragment = mz_tunable_bs(i, j, theta, variance)?;
        self.extend(fragment)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn phase_count(&self) -> usize {
        self.phase_shifters().count()
    }

    pub fn phase_shifters(&self) -> impl Iterator<Item = &PhaseShifter> {
        self.elements.iter().filter_map(|e| match e {
            Element::Phase(p) => Some(p),
            _ => None,
        })
    }

    /// Copy of the circuit with every phase shifter's variance set to `variance`.
    pub fn with_variance(&self, variance: f64) -> Result<Self> {
        if variance.is_nan() || variance < 0.0 {
            return invalid("variance must be non-negative");
        }
        let elements = self
            .elements
            .iter()
            .map(|e| match e {
                Element::Phase(p) => Element::phase(p.mode, p.theta, variance),
                other => other.clone(),
            })
            .collect();
        Ok(Self {
            mode_count: self.mode_count,
            elements,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&Netlist::from_circuit(self, None))
            .expect("netlist serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let netlist: Netlist = serde_json::from_str(text)
            .or_else(|e| invalid(format!("malformed netlist: {e}")))?;
        netlist.into_circuit()
    }
}

/// `[BS(i,j), Phase(i, theta, variance), BS(i,j)]`. With no noise the block on
/// `(i, j)` is `(1/2) [[e^{i theta} + 1, e^{i theta} - 1], [e^{i theta} - 1, e^{i theta} + 1]]`.
pub fn mz_tunable_bs(i: usize, j: usize, theta: f64, variance: f64) -> Result<Vec<Element>> {
    if i == j {
        return invalid("MZ interferometer needs two distinct modes");
    }
    Ok(vec![
        Element::beam_splitter(i, j),
        Element::phase(i, theta, variance),
        Element::beam_splitter(i, j),
    ])
}

/// Sampled phase errors, one per phase shifter in element order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRealization {
    pub deltas: Vec<f64>,
}

impl NoiseRealization {
    pub fn zeros(circuit: &Circuit) -> Self {
        Self {
            deltas: vec![0.0; circuit.phase_count()],
        }
    }
}

/// Draws each error independently from `Normal(0, variance)`; values are not wrapped.
pub fn sample_realization<R: Rng + ?Sized>(circuit: &Circuit, rng: &mut R) -> NoiseRealization {
    let mut deltas = Vec::with_capacity(circuit.phase_count());
    sample_into(circuit, rng, &mut deltas);
    NoiseRealization { deltas }
}

pub(crate) fn sample_into<R: Rng + ?Sized>(circuit: &Circuit, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    for p in circuit.phase_shifters() {
        let delta = if p.variance > 0.0 {
            Normal::new(0.0, p.variance.sqrt())
                .expect("validated variance")
                .sample(rng)
        } else {
            0.0
        };
        out.push(delta);
    }
}

fn check_realization(circuit: &Circuit, deltas: &[f64]) -> Result<()> {
    if deltas.len() != circuit.phase_count() {
        return invalid(format!(
            "realization has {} errors but the circuit has {} phase shifters",
            deltas.len(),
            circuit.phase_count()
        ));
    }
    Ok(())
}

/// Network matrix of one noise realization: the product of element matrices in order.
pub fn compile(circuit: &Circuit, realization: &NoiseRealization) -> Result<NetworkMatrix> {
    check_realization(circuit, &realization.deltas)?;
    let mut k = 0;
    Ok(compile_with(circuit, |p| {
        let z = Complex64::from_polar(1.0, p.theta + realization.deltas[k]);
        k += 1;
        z
    }))
}

/// Expected network matrix `E[compile(c, .)]`: each phase factor becomes
/// `e^{i theta} e^{-v/2}`. Exact because every phase factor enters the
/// product linearly and the errors are independent.
pub fn mean_matrix(circuit: &Circuit) -> NetworkMatrix {
    compile_with(circuit, |p| Complex64::from_polar((-p.variance / 2.0).exp(), p.theta))
}

fn compile_with(circuit: &Circuit, mut phase: impl FnMut(&PhaseShifter) -> Complex64) -> NetworkMatrix {
    let mut u = NetworkMatrix::identity(circuit.mode_count);
    for e in &circuit.elements {
        match e {
            Element::BeamSplitter(b) => u.left_apply_2x2(b.first, b.second, HADAMARD),
            Element::Phase(p) => u.left_scale_row(p.mode, phase(p)),
            Element::Fixed(f) => u.left_apply_block(&f.modes, &f.matrix),
        }
    }
    u
}

/// Selected input columns of a compiled network, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeColumns {
    mode_count: usize,
    inputs: Vec<usize>,
    data: Vec<Complex64>,
}

impl ModeColumns {
    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    /// Entry `U[output][input]`; `input` must be one of the compiled columns.
    pub fn get(&self, output: usize, input: usize) -> Complex64 {
        let slot = self
            .inputs
            .iter()
            .position(|&i| i == input)
            .expect("input column was not compiled");
        self.data[slot * self.mode_count + output]
    }
}

/// Propagates only the listed input columns; `O(elements x columns)`.
pub fn compile_columns(circuit: &Circuit, deltas: &[f64], inputs: &[usize]) -> Result<ModeColumns> {
    check_realization(circuit, deltas)?;
    let m = circuit.mode_count;
    if inputs.iter().any(|&i| i >= m) {
        return invalid("input column out of range");
    }
    let mut inputs = inputs.to_vec();
    inputs.sort_unstable();
    inputs.dedup();
    let mut data = vec![Complex64::new(0.0, 0.0); m * inputs.len()];
    for (slot, &i) in inputs.iter().enumerate() {
        data[slot * m + i] = Complex64::new(1.0, 0.0);
    }
    let mut k = 0;
    let mut scratch = Vec::new();
    for e in &circuit.elements {
        match e {
            Element::BeamSplitter(b) => {
                let h = HADAMARD[0][0].re;
                for col in data.chunks_exact_mut(m) {
                    let (x, y) = (col[b.first], col[b.second]);
                    col[b.first] = (x + y) * h;
                    col[b.second] = (x - y) * h;
                }
            }
            Element::Phase(p) => {
                let z = Complex64::from_polar(1.0, p.theta + deltas[k]);
                k += 1;
                for col in data.chunks_exact_mut(m) {
                    col[p.mode] *= z;
                }
            }
            Element::Fixed(f) => {
                for col in data.chunks_exact_mut(m) {
                    scratch.clear();
                    scratch.extend((0..f.modes.len()).map(|r| {
                        f.modes
                            .iter()
                            .enumerate()
                            .map(|(q, &mq)| f.matrix.get(r, q) * col[mq])
                            .sum::<Complex64>()
                    }));
                    for (r, &mr) in f.modes.iter().enumerate() {
                        col[mr] = scratch[r];
                    }
                }
            }
        }
    }
    Ok(ModeColumns {
        mode_count: m,
        inputs,
        data,
    })
}

/// JSON netlist: `{mode_count, elements: [{kind, modes, theta, variance}]}`,
/// plus `kept_modes` for encoded circuits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub mode_count: usize,
    pub elements: Vec<ElementRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kept_modes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementRecord {
    /// `"bs"`, `"phase"` or `"fixed"`.
    pub kind: String,
    pub modes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    /// Row-major `[re, im]` pairs, only for `"fixed"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

impl Netlist {
    pub fn from_circuit(circuit: &Circuit, kept_modes: Option<Vec<usize>>) -> Self {
        let elements = circuit
            .elements
            .iter()
            .map(|e| match e {
                Element::BeamSplitter(b) => ElementRecord {
                    kind: "bs".into(),
                    modes: vec![b.first, b.second],
                    theta: None,
                    variance: None,
                    matrix: None,
                },
                Element::Phase(p) => ElementRecord {
                    kind: "phase".into(),
                    modes: vec![p.mode],
                    theta: Some(p.theta),
                    variance: Some(p.variance),
                    matrix: None,
                },
                Element::Fixed(f) => {
                    let n = f.matrix.dim();
                    let rows = (0..n)
                        .map(|r| {
                            (0..n)
                                .map(|c| {
                                    let z = f.matrix.get(r, c);
                                    [z.re, z.im]
                                })
                                .collect()
                        })
                        .collect();
                    ElementRecord {
                        kind: "fixed".into(),
                        modes: f.modes.clone(),
                        theta: None,
                        variance: None,
                        matrix: Some(rows),
                    }
                }
            })
            .collect();
        Self {
            mode_count: circuit.mode_count,
            elements,
            kept_modes,
        }
    }

    pub fn into_circuit(self) -> Result<Circuit> {
        let mut c = Circuit::new(self.mode_count)?;
        for rec in self.elements {
            let e = match rec.kind.as_str() {
                "bs" => match rec.modes[..] {
                    [a, b] => Element::beam_splitter(a, b),
                    _ => return invalid("\"bs\" needs exactly two modes"),
                },
                "phase" => match rec.modes[..] {
                    [m] => Element::phase(m, rec.theta.unwrap_or(0.0), rec.variance.unwrap_or(0.0)),
                    _ => return invalid("\"phase\" needs exactly one mode"),
                },
                "fixed" => {
                    let rows = rec
                        .matrix
                        .ok_or_else(|| crate::Error::InvalidArgument("\"fixed\" needs a matrix".into()))?;
                    let matrix = NetworkMatrix::from_rows(
                        rows.into_iter()
                            .map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
                            .collect(),
                    )?;
                    Element::Fixed(FixedUnitary {
                        modes: rec.modes,
                        matrix,
                    })
                }
                other => return invalid(format!("unknown element kind {other:?}")),
            };
            c.push(e)?;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dft_matrix, is_unitary, unitarity_defect};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mz(theta: f64, variance: f64) -> Circuit {
        let mut circ = Circuit::new(2).unwrap();
        circ.push_mz(0, 1, theta, variance).unwrap();
        circ
    }

    #[test]
    fn mz_noiseless_blocks() {
        let id = compile(&mz(0.0, 0.0), &NoiseRealization { deltas: vec![0.0] }).unwrap();
        assert!(id.max_abs_diff(&NetworkMatrix::identity(2)) < 1e-15);

        let swap = compile(&mz(std::f64::consts::PI, 0.0), &NoiseRealization { deltas: vec![0.0] }).unwrap();
        let want = NetworkMatrix::from_real(&[&[0.0, -1.0], &[-1.0, 0.0]]).unwrap();
        assert!(swap.max_abs_diff(&want) < 1e-15);

        // general theta reproduces the averaged-phase coefficient structure
        let theta = 0.7;
        let e = Complex64::from_polar(1.0, theta);
        let u = compile(&mz(theta, 0.0), &NoiseRealization { deltas: vec![0.0] }).unwrap();
        assert!((u.get(0, 0) - (e + 1.0) / 2.0).norm() < 1e-15);
        assert!((u.get(0, 1) - (e - 1.0) / 2.0).norm() < 1e-15);
        assert!((u.get(1, 0) - (e - 1.0) / 2.0).norm() < 1e-15);
        assert!((u.get(1, 1) - (e + 1.0) / 2.0).norm() < 1e-15);
    }

    #[test]
    fn mz_stay_probability() {
        let u = compile(&mz(0.0, 0.1), &NoiseRealization { deltas: vec![0.1] }).unwrap();
        assert!((u.get(0, 0).norm_sqr() - 0.05f64.cos().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn mz_rejects_same_mode() {
        assert!(mz_tunable_bs(1, 1, 0.0, 0.0).is_err());
    }

    #[test]
    fn sampling_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut bare = Circuit::new(2).unwrap();
        bare.push(Element::beam_splitter(0, 1)).unwrap();
        assert!(sample_realization(&bare, &mut rng).deltas.is_empty());
        assert_eq!(sample_realization(&mz(0.0, 0.0), &mut rng).deltas, vec![0.0]);
    }

    #[test]
    fn sample_mean_within_standard_error() {
        let v = 0.1;
        let n = 100_000;
        let mut circ = Circuit::new(1).unwrap();
        circ.push(Element::phase(0, 0.0, v)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mean: f64 = (0..n)
            .map(|_| sample_realization(&circ, &mut rng).deltas[0])
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 3.0 * (v / n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn compile_edge_cases() {
        let empty = Circuit::new(3).unwrap();
        assert_eq!(compile(&empty, &NoiseRealization { deltas: vec![] }).unwrap(), NetworkMatrix::identity(3));

        let mut twice = Circuit::new(2).unwrap();
        twice.push(Element::beam_splitter(0, 1)).unwrap();
        twice.push(Element::beam_splitter(0, 1)).unwrap();
        let u = compile(&twice, &NoiseRealization { deltas: vec![] }).unwrap();
        assert!(u.max_abs_diff(&NetworkMatrix::identity(2)) < 1e-15);

        assert!(compile(&mz(0.0, 0.1), &NoiseRealization { deltas: vec![] }).is_err());
    }

    #[test]
    fn sampled_circuits_are_unitary() {
        let mut circ = Circuit::new(4).unwrap();
        circ.push_mz(0, 1, 0.3, 0.5).unwrap();
        circ.push_mz(2, 3, -1.0, 0.5).unwrap();
        circ.push_mz(1, 2, 2.0, 0.5).unwrap();
        circ.push(Element::Fixed(FixedUnitary {
            modes: vec![3, 0, 1],
            matrix: dft_matrix(3).unwrap(),
        }))
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let r = sample_realization(&circ, &mut rng);
            let u = compile(&circ, &r).unwrap();
            assert!(is_unitary(&u, 1e-10), "defect {}", unitarity_defect(&u));
        }
    }

    #[test]
    fn column_propagation_matches_full_compile() {
        let mut circ = Circuit::new(4).unwrap();
        circ.push_mz(0, 1, 0.3, 0.5).unwrap();
        circ.push(Element::Fixed(FixedUnitary {
            modes: vec![2, 1, 3],
            matrix: dft_matrix(3).unwrap(),
        }))
        .unwrap();
        circ.push_mz(3, 0, 1.1, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = sample_realization(&circ, &mut rng);
        let full = compile(&circ, &r).unwrap();
        let cols = compile_columns(&circ, &r.deltas, &[3, 1]).unwrap();
        for out in 0..4 {
            for input in [1, 3] {
                assert!((cols.get(out, input) - full.get(out, input)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn mean_matrix_cases() {
        let noiseless = mz(0.4, 0.0);
        let a = mean_matrix(&noiseless);
        let b = compile(&noiseless, &NoiseRealization::zeros(&noiseless)).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);

        let mut single = Circuit::new(1).unwrap();
        single.push(Element::phase(0, 0.0, 0.1)).unwrap();
        assert!((mean_matrix(&single).get(0, 0) - c(0.951229424500714, 0.0)).norm() < 1e-12);

        let m = mean_matrix(&mz(0.0, 0.1));
        let want = ((-0.05f64).exp() + 1.0) / 2.0;
        assert!((m.get(0, 0) - c(want, 0.0)).norm() < 1e-15);
        assert!((m.get(1, 1) - c(want, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn empirical_mean_matches_mean_matrix() {
        let mut circ = Circuit::new(3).unwrap();
        circ.push_mz(0, 1, 0.5, 0.2).unwrap();
        circ.push_mz(1, 2, -0.3, 0.1).unwrap();
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let dim = 3;
        let mut sum = vec![c(0.0, 0.0); dim * dim];
        let mut sq_re = vec![0.0; dim * dim];
        let mut sq_im = vec![0.0; dim * dim];
        for _ in 0..n {
            let u = compile(&circ, &sample_realization(&circ, &mut rng)).unwrap();
            for (k, z) in u.entries().iter().enumerate() {
                sum[k] += z;
                sq_re[k] += z.re * z.re;
                sq_im[k] += z.im * z.im;
            }
        }
        let expect = mean_matrix(&circ);
        for k in 0..dim * dim {
            let mean = sum[k] / n as f64;
            let se_re = ((sq_re[k] / n as f64 - mean.re * mean.re) / n as f64).sqrt();
            let se_im = ((sq_im[k] / n as f64 - mean.im * mean.im) / n as f64).sqrt();
            let want = expect.entries()[k];
            assert!((mean.re - want.re).abs() <= 4.0 * se_re + 1e-12, "re entry {k}");
            assert!((mean.im - want.im).abs() <= 4.0 * se_im + 1e-12, "im entry {k}");
        }
    }

    #[test]
    fn netlist_round_trip() {
        let mut circ = Circuit::new(3).unwrap();
        circ.push_mz(0, 2, 0.25, 0.01).unwrap();
        circ.push(Element::Fixed(FixedUnitary {
            modes: vec![1, 2],
            matrix: dft_matrix(2).unwrap(),
        }))
        .unwrap();
        let text = circ.to_json();
        assert!(text.contains("\"kind\": \"phase\""));
        assert_eq!(Circuit::from_json(&text).unwrap(), circ);
    }

    #[test]
    fn invalid_elements_rejected() {
        let mut circ = Circuit::new(2).unwrap();
        assert!(circ.push(Element::phase(2, 0.0, 0.1)).is_err());
        assert!(circ.push(Element::phase(0, 0.0, -0.1)).is_err());
        assert!(circ.push(Element::beam_splitter(1, 1)).is_err());
        assert!(Circuit::new(0).is_err());
        assert!(Circuit::from_json(r#"{"mode_count":2,"elements":[{"kind":"mirror","modes":[0]}]}"#).is_err());
    }
}
