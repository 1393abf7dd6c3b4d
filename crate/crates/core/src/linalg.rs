//! Dense complex matrices for mode transformations.
//!
//! Row index is the output mode and column index the input mode, so a
//! network acts as `a_i -> sum_j U[i][j] a_j`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type ComplexScalar = Complex64;

/// Tolerance used wherever a caller does not supply one.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest matrix accepted by [`permanent`].
pub const PERMANENT_CAP: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix describing a (possibly non-unitary) network.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl NetworkMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from rows; every row must have `rows.len()` entries
    /// and every entry must be finite.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return invalid(format!("row {r} has {} entries, expected {dim}", row.len()));
            }
            entries.extend(row);
        }
        Self::from_entries(dim, entries)
    }

    /// Row-major constructor.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return invalid(format!(
                "{} entries cannot form a {dim}x{dim} matrix",
                entries.len()
            ));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("matrix entries must be finite");
        }
        Ok(Self { dim, entries })
    }

    /// Real matrix convenience constructor, mostly for tests.
    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.entries[c * n + r] = self.entries[r * n + c].conj();
            }
        }
        out
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return invalid(format!("cannot multiply {0}x{0} by {1}x{1}", self.dim, rhs.dim));
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.entries[r * n + c] += a * rhs.entries[k * n + c];
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return invalid("dimension mismatch in matrix sum");
        }
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Square sub-block with the given row and column index lists.
    /// Repeated indices are allowed (needed for bunched Fock states).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if rows.len() != cols.len() {
            return invalid("row and column selections must have equal length");
        }
        if rows.iter().chain(cols).any(|&i| i >= self.dim) {
            return invalid("selection index out of range");
        }
        let k = rows.len();
        let mut entries = Vec::with_capacity(k * k);
        for &r in rows {
            for &c in cols {
                entries.push(self.get(r, c));
            }
        }
        Ok(Self { dim: k, entries })
    }

    /// Applies a 2x2 block on modes `(i, j)` from the left: `self <- B * self`.
    pub(crate) fn left_apply_2x2(&mut self, i: usize, j: usize, b: [[Complex64; 2]; 2]) {
        let n = self.dim;
        for c in 0..n {
            let x = self.entries[i * n + c];
            let y = self.entries[j * n + c];
            self.entries[i * n + c] = b[0][0] * x + b[0][1] * y;
            self.entries[j * n + c] = b[1][0] * x + b[1][1] * y;
        }
    }

    /// Multiplies row `i` by `factor` (a phase shifter applied from the left).
    pub(crate) fn left_scale_row(&mut self, i: usize, factor: Complex64) {
        let n = self.dim;
        for z in &mut self.entries[i * n..(i + 1) * n] {
            *z *= factor;
        }
    }

    /// Applies a `k x k` block acting on `modes` from the left.
    pub(crate) fn left_apply_block(&mut self, modes: &[usize], block: &NetworkMatrix) {
        let n = self.dim;
        let k = modes.len();
        let mut scratch = vec![ZERO; k];
        for c in 0..n {
            for (r, s) in scratch.iter_mut().enumerate() {
                *s = (0..k)
                    .map(|q| block.get(r, q) * self.entries[modes[q] * n + c])
                    .sum();
            }
            for (r, &m) in modes.iter().enumerate() {
                self.entries[m * n + c] = scratch[r];
            }
        }
    }
}

impl fmt::Debug for NetworkMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "NetworkMatrix({0}x{0}) [", self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self.get(r, c);
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `true` iff `max |U^dagger U - I| <= tol`.
pub fn is_unitary(m: &NetworkMatrix, tol: f64) -> bool {
    unitarity_defect(m) <= tol
}

/// `max |U^dagger U - I|`.
pub fn unitarity_defect(m: &NetworkMatrix) -> f64 {
    let n = m.dim();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += m.get(k, r).conj() * m.get(k, c);
            }
            if r == c {
                acc -= ONE;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

/// Unitary DFT, entry `(r, k) = w^(r k) / sqrt(n)` with `w = exp(-2 pi i / n)`.
pub fn dft_matrix(n: usize) -> Result<NetworkMatrix> {
    if n == 0 {
        return invalid("DFT size must be at least 1");
    }
    let norm = 1.0 / (n as f64).sqrt();
    let mut m = NetworkMatrix::zeros(n);
    for r in 0..n {
        for k in 0..n {
            // reduce the exponent first so large sizes keep full precision
            let e = (r * k) % n;
            let angle = -2.0 * PI * e as f64 / n as f64;
            m.set(r, k, Complex64::from_polar(norm, angle));
        }
    }
    Ok(m)
}

/// Block-diagonal matrix `diag(blocks[0], blocks[1], ...)`.
pub fn direct_sum(blocks: &[NetworkMatrix]) -> Result<NetworkMatrix> {
    if blocks.is_empty() {
        return invalid("direct sum of an empty list");
    }
    let dim: usize = blocks.iter().map(NetworkMatrix::dim).sum();
    let mut out = NetworkMatrix::zeros(dim);
    let mut offset = 0;
    for b in blocks {
        for r in 0..b.dim() {
            for c in 0..b.dim() {
                out.set(offset + r, offset + c, b.get(r, c));
            }
        }
        offset += b.dim();
    }
    Ok(out)
}

/// Permanent with the default size cap.
pub fn permanent(m: &NetworkMatrix) -> Result<Complex64> {
    permanent_with_cap(m, PERMANENT_CAP)
}

/// Ryser's formula with Gray-code subset updates, `O(2^n n)`.
pub fn permanent_with_cap(m: &NetworkMatrix, cap: usize) -> Result<Complex64> {
    let n = m.dim();
    if n > cap {
        return Err(Error::ResourceLimit(format!(
            "permanent of a {n}x{n} matrix exceeds the cap of {cap}"
        )));
    }
    Ok(ryser(n, |r, c| m.get(r, c)))
}

/// Ryser over an arbitrary entry accessor; `n` must be small.
pub(crate) fn ryser(n: usize, entry: impl Fn(usize, usize) -> Complex64) -> Complex64 {
    match n {
        0 => return ONE,
        1 => return entry(0, 0),
        2 => return entry(0, 0) * entry(1, 1) + entry(0, 1) * entry(1, 0),
        _ => {}
    }
    let mut row_sums = vec![ZERO; n];
    let mut total = ZERO;
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << n) {
        let next = step ^ (step >> 1);
        let flipped = (gray ^ next).trailing_zeros() as usize;
        let adding = next & (1 << flipped) != 0;
        for (r, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += entry(r, flipped);
            } else {
                *s -= entry(r, flipped);
            }
        }
        gray = next;
        let prod: Complex64 = row_sums.iter().product();
        // sign (-1)^(n - |S|)
        if (n as u32 - next.count_ones()).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Laplace expansion along the first row; test oracle only.
    fn naive_permanent(m: &NetworkMatrix) -> Complex64 {
        let n = m.dim();
        if n == 0 {
            return ONE;
        }
        let mut total = ZERO;
        for c in 0..n {
            let rows: Vec<usize> = (1..n).collect();
            let cols: Vec<usize> = (0..n).filter(|&k| k != c).collect();
            let minor = m.select(&rows, &cols).unwrap();
            total += m.get(0, c) * naive_permanent(&minor);
        }
        total
    }

    #[test]
    fn dft_small_cases() {
        let d1 = dft_matrix(1).unwrap();
        assert!(d1.max_abs_diff(&NetworkMatrix::identity(1)) < 1e-15);

        let s = 1.0 / 2f64.sqrt();
        let d2 = dft_matrix(2).unwrap();
        let want = NetworkMatrix::from_real(&[&[s, s], &[s, -s]]).unwrap();
        assert!(d2.max_abs_diff(&want) < 1e-15);

        let d4 = dft_matrix(4).unwrap();
        assert!(unitarity_defect(&d4) < 1e-12);
        assert!(matches!(dft_matrix(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn dft_unitary_up_to_64() {
        for n in 1..=64 {
            assert!(is_unitary(&dft_matrix(n).unwrap(), 1e-10), "n = {n}");
        }
    }

    #[test]
    fn unitarity_check() {
        assert!(is_unitary(&NetworkMatrix::identity(5), 1e-12));
        assert!(is_unitary(&dft_matrix(8).unwrap(), 1e-10));
        let mut m = NetworkMatrix::identity(2);
        m.set(0, 0, c(1.1, 0.0));
        assert!(!is_unitary(&m, 1e-6));
    }

    #[test]
    fn permanent_known_values() {
        assert_eq!(permanent(&NetworkMatrix::identity(3)).unwrap(), ONE);
        let ones = NetworkMatrix::from_real(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert_eq!(permanent(&ones).unwrap(), c(2.0, 0.0));
        let m = NetworkMatrix::from_real(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(permanent(&m).unwrap(), c(10.0, 0.0));
        // all-ones n x n has permanent n!
        let n = 6;
        let big = NetworkMatrix::from_entries(n, vec![ONE; n * n]).unwrap();
        assert!((permanent(&big).unwrap() - c(720.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn permanent_cap_enforced() {
        let m = NetworkMatrix::identity(17);
        assert!(matches!(permanent(&m), Err(Error::ResourceLimit(_))));
        assert!(permanent_with_cap(&NetworkMatrix::identity(4), 3).is_err());
        assert!(permanent(&NetworkMatrix::identity(16)).is_ok());
    }

    #[test]
    fn permanent_matches_laplace_on_unitary_blocks() {
        let f = dft_matrix(5).unwrap();
        let picks: [(&[usize], &[usize]); 4] = [
            (&[0, 1], &[2, 4]),
            (&[0, 0, 3], &[1, 2, 2]),
            (&[1, 2, 3, 4], &[0, 1, 2, 3]),
            (&[4, 4, 4, 4], &[0, 0, 1, 1]),
        ];
        for (rows, cols) in picks {
            let sub = f.select(rows, cols).unwrap();
            let fast = permanent(&sub).unwrap();
            let slow = naive_permanent(&sub);
            assert!((fast - slow).norm() <= 1e-10 * slow.norm().max(1e-300) + 1e-14);
        }
    }

    #[test]
    fn direct_sum_cases() {
        let sum = direct_sum(&[NetworkMatrix::identity(2), NetworkMatrix::identity(3)]).unwrap();
        assert_eq!(sum, NetworkMatrix::identity(5));

        let a = NetworkMatrix::from_rows(vec![vec![c(0.0, 1.0)]]).unwrap();
        let b = NetworkMatrix::from_rows(vec![vec![c(0.0, -1.0)]]).unwrap();
        let d = direct_sum(&[a, b]).unwrap();
        assert_eq!(d.get(0, 0), c(0.0, 1.0));
        assert_eq!(d.get(1, 1), c(0.0, -1.0));
        assert_eq!(d.get(0, 1), ZERO);

        let blocks: Vec<_> = (1..=4).map(|n| dft_matrix(n).unwrap()).collect();
        assert!(is_unitary(&direct_sum(&blocks).unwrap(), 1e-10));
        assert!(direct_sum(&[]).is_err());
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(NetworkMatrix::from_rows(vec![vec![ONE, ONE]]).is_err());
        assert!(NetworkMatrix::from_entries(1, vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn block_application_matches_full_product() {
        let f3 = dft_matrix(3).unwrap();
        let mut u = dft_matrix(5).unwrap();
        let base = u.clone();
        let modes = [4, 0, 2];
        u.left_apply_block(&modes, &f3);

        let mut full = NetworkMatrix::identity(5);
        for (r, &mr) in modes.iter().enumerate() {
            for (q, &mq) in modes.iter().enumerate() {
                full.set(mr, mq, f3.get(r, q));
            }
        }
        let want = full.mul(&base).unwrap();
        assert!(u.max_abs_diff(&want) < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix(n: usize) -> impl Strategy<Value = NetworkMatrix> {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
                NetworkMatrix::from_entries(n, v.into_iter().map(|(a, b)| c(a, b)).collect())
                    .unwrap()
            })
        }

        proptest! {
            #[test]
            fn ryser_agrees_with_laplace(m in (1usize..=4).prop_flat_map(matrix)) {
                let fast = permanent(&m).unwrap();
                let slow = naive_permanent(&m);
                prop_assert!((fast - slow).norm() <= 1e-10 * slow.norm().max(1.0));
            }
        }
    }
}
