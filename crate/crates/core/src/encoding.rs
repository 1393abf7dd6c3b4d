//! Redundant encodings: fan each mode out over `N` copies, run `N`
//! independently noisy copies of a network, fan back in, and keep only the
//! copy-0 modes. Post-selecting vacuum in the other modes leaves the kept block
//! equal to the average `(1/N) sum_k U_k`.

use serde::{Deserialize, Serialize};

use crate::circuit::{compile, Circuit, Element, FixedUnitary, Netlist, NoiseRealization};
use crate::error::{invalid, Result};
use crate::linalg::{dft_matrix, NetworkMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    /// Unitary DFT on the copies of each mode.
    Dft,
    /// Recursive tree of 50:50 splitters; needs `N = 2^k`.
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// One encoding around the whole circuit.
    Whole,
    /// A separate encoding around every phase shifter.
    Each,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingScheme {
    redundancy: usize,
    encoder: EncoderKind,
    strategy: Strategy,
}

impl EncodingScheme {
    pub fn new(redundancy: usize, encoder: EncoderKind, strategy: Strategy) -> Result<Self> {
        check_redundancy(redundancy, encoder)?;
        Ok(Self {
            redundancy,
            encoder,
            strategy,
        })
    }

    pub fn redundancy(&self) -> usize {
        self.redundancy
    }

    pub fn encoder(&self) -> EncoderKind {
        self.encoder
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }
}

fn check_redundancy(n: usize, encoder: EncoderKind) -> Result<()> {
    if n == 0 {
        return invalid("redundancy must be at least 1");
    }
    if encoder == EncoderKind::Tree && !n.is_power_of_two() {
        return invalid(format!("tree encoder needs a power-of-two redundancy, got {n}"));
    }
    Ok(())
}

/// Encoded network plus the bookkeeping needed for post-selection.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedCircuit {
    pub circuit: Circuit,
    /// Modes carrying the logical output, in original-mode order.
    pub kept_modes: Vec<usize>,
    /// Modes post-selected on vacuum.
    pub error_modes: Vec<usize>,
}

impl EncodedCircuit {
    /// Wraps a plain circuit with every mode kept.
    pub fn unencoded(circuit: Circuit) -> Self {
        let kept_modes = (0..circuit.mode_count()).collect();
        Self {
            circuit,
            kept_modes,
            error_modes: Vec::new(),
        }
    }

    fn new(circuit: Circuit, kept_modes: Vec<usize>) -> Self {
        let error_modes = (0..circuit.mode_count())
            .filter(|m| !kept_modes.contains(m))
            .collect();
        Self {
            circuit,
            kept_modes,
            error_modes,
        }
    }

    /// Kept-modes block of the compiled network for one realization.
    pub fn kept_block(&self, realization: &NoiseRealization) -> Result<NetworkMatrix> {
        let full = compile(&self.circuit, realization)?;
        full.select(&self.kept_modes, &self.kept_modes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&Netlist::from_circuit(&self.circuit, Some(self.kept_modes.clone())))
            .expect("netlist serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let netlist: Netlist = serde_json::from_str(text)
            .or_else(|e| invalid(format!("malformed netlist: {e}")))?;
        let kept = netlist.kept_modes.clone();
        let circuit = netlist.into_circuit()?;
        match kept {
            Some(kept) => {
                if kept.iter().any(|&m| m >= circuit.mode_count()) {
                    return invalid("kept mode out of range");
                }
                Ok(Self::new(circuit, kept))
            }
            None => Ok(Self::unencoded(circuit)),
        }
    }
}

/// Splitter layers of the recursive tree on the given modes, in application order.
/// The result is the normalised Sylvester-Hadamard transform, which is real,
/// symmetric and its own inverse.
pub fn tree_elements(modes: &[usize]) -> Result<Vec<Element>> {
    let n = modes.len();
    if n == 0 || !n.is_power_of_two() {
        return invalid(format!("tree encoder needs a power-of-two mode count, got {n}"));
    }
    let mut out = Vec::new();
    let mut stride = n / 2;
    while stride >= 1 {
        for p in (0..n).filter(|p| p & stride == 0) {
            out.push(Element::beam_splitter(modes[p], modes[p | stride]));
        }
        stride /= 2;
    }
    Ok(out)
}

/// Matrix of the recursive splitter tree on `n = 2^k` modes.
pub fn fanout_tree(n: usize) -> Result<NetworkMatrix> {
    let modes: Vec<usize> = (0..n).collect();
    let circuit = Circuit::with_elements(n, tree_elements(&modes)?)?;
    compile(&circuit, &NoiseRealization { deltas: vec![] })
}

/// Single-mode encoder on `n` copies.
pub fn encoder_matrix(kind: EncoderKind, n: usize) -> Result<NetworkMatrix> {
    check_redundancy(n, kind)?;
    match kind {
        EncoderKind::Dft => dft_matrix(n),
        EncoderKind::Tree => fanout_tree(n),
    }
}

/// (fan-out, fan-in) element lists on the given copy modes.
fn encoder_layers(kind: EncoderKind, modes: &[usize]) -> Result<(Vec<Element>, Vec<Element>)> {
    if modes.len() == 1 {
        return Ok((Vec::new(), Vec::new()));
    }
    match kind {
        EncoderKind::Tree => {
            let forward = tree_elements(modes)?;
            let mut inverse = forward.clone();
            inverse.reverse();
            Ok((forward, inverse))
        }
        EncoderKind::Dft => {
            let f = dft_matrix(modes.len())?;
            let forward = Element::Fixed(FixedUnitary {
                modes: modes.to_vec(),
                matrix: f.clone(),
            });
            let inverse = Element::Fixed(FixedUnitary {
                modes: modes.to_vec(),
                matrix: f.adjoint(),
            });
            Ok((vec![forward], vec![inverse]))
        }
    }
}

/// `(1/N) sum_k U_k`.
pub fn effective_matrix(unitaries: &[NetworkMatrix]) -> Result<NetworkMatrix> {
    let first = match unitaries.first() {
        Some(u) => u,
        None => return invalid("need at least one matrix to average"),
    };
    let dim = first.dim();
    let mut acc = NetworkMatrix::zeros(dim);
    for u in unitaries {
        if u.dim() != dim {
            return invalid("all averaged matrices must share a dimension");
        }
        acc = acc.add(u)?;
    }
    Ok(acc.scale((1.0 / unitaries.len() as f64).into()))
}

/// Full `N m x N m` encoded matrix `E^dagger diag(U_1..U_N) E`, with the
/// encoder `E` acting on the copies of every mode. Mode `(j, copy k)` sits at
/// index `j N + k`, so the kept modes are `{j N}`.
pub fn encode_matrix(unitaries: &[NetworkMatrix], encoder: EncoderKind) -> Result<NetworkMatrix> {
    let n = unitaries.len();
    if n == 0 {
        return invalid("need at least one matrix to encode");
    }
    let m = unitaries[0].dim();
    if unitaries.iter().any(|u| u.dim() != m) {
        return invalid("all encoded matrices must share a dimension");
    }
    let e = encoder_matrix(encoder, n)?;
    let size = n * m;
    let mut diag = NetworkMatrix::zeros(size);
    let mut enc = NetworkMatrix::zeros(size);
    for (k, u) in unitaries.iter().enumerate() {
        for i in 0..m {
            for j in 0..m {
                diag.set(i * n + k, j * n + k, u.get(i, j));
            }
        }
    }
    for j in 0..m {
        for r in 0..n {
            for k in 0..n {
                enc.set(j * n + r, j * n + k, e.get(r, k));
            }
        }
    }
    enc.adjoint().mul(&diag)?.mul(&enc)
}

/// Kept block `{j N}` of a matrix produced by [`encode_matrix`].
pub fn kept_block(encoded: &NetworkMatrix, m: usize, n: usize) -> Result<NetworkMatrix> {
    if encoded.dim() != m * n {
        return invalid("encoded matrix size does not match m * N");
    }
    let kept: Vec<usize> = (0..m).map(|j| j * n).collect();
    encoded.select(&kept, &kept)
}

/// Dispatches on the scheme's strategy.
pub fn encode(circuit: &Circuit, scheme: &EncodingScheme) -> Result<EncodedCircuit> {
    match scheme.strategy {
        Strategy::Whole => encode_average_whole(circuit, scheme),
        Strategy::Each => encode_average_each(circuit, scheme),
    }
}

/// Fan-out, `N` clones of the full circuit with independent noise, fan-in.
pub fn encode_average_whole(circuit: &Circuit, scheme: &EncodingScheme) -> Result<EncodedCircuit> {
    if scheme.strategy != Strategy::Whole {
        return invalid("encode_average_whole needs the whole-circuit strategy");
    }
    let n = scheme.redundancy;
    let m = circuit.mode_count();
    let mut out = Circuit::new(m * n)?;
    let mut fan_in = Vec::new();
    for j in 0..m {
        let copies: Vec<usize> = (0..n).map(|k| j * n + k).collect();
        let (forward, inverse) = encoder_layers(scheme.encoder, &copies)?;
        out.extend(forward)?;
        fan_in.extend(inverse);
    }
    for k in 0..n {
        for e in circuit.elements() {
            out.push(e.remapped(|j| j * n + k))?;
        }
    }
    out.extend(fan_in)?;
    let kept = (0..m).map(|j| j * n).collect();
    Ok(EncodedCircuit::new(out, kept))
}

/// Every phase shifter wrapped in its own fan-out / `N` copies / fan-in gadget.
/// Each gadget gets `N - 1` fresh vacuum modes appended after the original
/// modes; the original modes are kept.
pub fn encode_average_each(circuit: &Circuit, scheme: &EncodingScheme) -> Result<EncodedCircuit> {
    if scheme.strategy != Strategy::Each {
        return invalid("encode_average_each needs the per-element strategy");
    }
    let n = scheme.redundancy;
    let m = circuit.mode_count();
    let total = m + circuit.phase_count() * (n - 1);
    let mut out = Circuit::new(total)?;
    let mut next_fresh = m;
    for e in circuit.elements() {
        match e {
            Element::Phase(p) => {
                let mut copies = vec![p.mode];
                copies.extend(next_fresh..next_fresh + n - 1);
                next_fresh += n - 1;
                let (forward, inverse) = encoder_layers(scheme.encoder, &copies)?;
                out.extend(forward)?;
                for &mode in &copies {
                    out.push(Element::phase(mode, p.theta, p.variance))?;
                }
                out.extend(inverse)?;
            }
            other => {
                out.push(other.clone())?;
            }
        }
    }
    Ok(EncodedCircuit::new(out, (0..m).collect()))
}
