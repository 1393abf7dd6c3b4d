//! Published first-order coefficients for the four-mode identity network.
//!
//! Each value reads `c v` for a leakage outcome, `1 + c v` for the input
//! state itself, and `1 + c v` for the post-selected row.

use ea_core::{FockState, Strategy};
use num_rational::Ratio;

#[derive(Debug, Clone, Copy)]
pub struct TableRow {
    /// `None` marks the "with post selection" row for the input state.
    pub output: Option<[u32; 4]>,
    pub coefficients: &'static [(i64, i64)],
}

#[derive(Debug, Clone, Copy)]
pub struct TableSpec {
    pub number: u8,
    pub input: [u32; 4],
    pub strategy: Strategy,
    pub redundancies: &'static [usize],
    pub rows: &'static [TableRow],
}

const fn row(output: [u32; 4], coefficients: &'static [(i64, i64)]) -> TableRow {
    TableRow { output: Some(output), coefficients }
}

const fn post(coefficients: &'static [(i64, i64)]) -> TableRow {
    TableRow { output: None, coefficients }
}

const Z3: &[(i64, i64)] = &[(0, 1), (0, 1), (0, 1)];
const Z2: &[(i64, i64)] = &[(0, 1), (0, 1)];

const SINGLE: &[TableRow] = &[
    row([1, 0, 0, 0], &[(-1, 2), (-3, 4), (-7, 8)]),
    row([0, 1, 0, 0], &[(1, 4), (1, 8), (1, 16)]),
    row([0, 0, 1, 0], Z3),
    row([0, 0, 0, 1], &[(1, 4), (1, 8), (1, 16)]),
    post(&[(-1, 2), (-1, 4), (-1, 8)]),
];

const BUNCHED_SHORT: &[TableRow] = &[
    row([2, 0, 0, 0], &[(-1, 1), (-3, 2)]),
    row([0, 2, 0, 0], Z2),
    row([0, 0, 2, 0], Z2),
    row([0, 0, 0, 2], Z2),
    row([1, 1, 0, 0], &[(1, 2), (1, 4)]),
    row([1, 0, 1, 0], Z2),
    row([1, 0, 0, 1], &[(1, 2), (1, 4)]),
    row([0, 1, 1, 0], Z2),
    row([0, 1, 0, 1], Z2),
    row([0, 0, 1, 1], Z2),
    post(&[(-1, 1), (-1, 2)]),
];

const BUNCHED: &[TableRow] = &[
    row([2, 0, 0, 0], &[(-1, 1), (-3, 2), (-7, 4)]),
    row([0, 2, 0, 0], Z3),
    row([0, 0, 2, 0], Z3),
    row([0, 0, 0, 2], Z3),
    row([1, 1, 0, 0], &[(1, 2), (1, 4), (1, 8)]),
    row([1, 0, 1, 0], Z3),
    row([1, 0, 0, 1], &[(1, 2), (1, 4), (1, 8)]),
    row([0, 1, 1, 0], Z3),
    row([0, 1, 0, 1], Z3),
    row([0, 0, 1, 1], Z3),
    post(&[(-1, 1), (-1, 2), (-1, 4)]),
];

const PAIR: &[TableRow] = &[
    row([2, 0, 0, 0], &[(1, 2), (1, 4), (1, 8)]),
    row([0, 2, 0, 0], &[(1, 2), (1, 4), (1, 8)]),
    row([0, 0, 2, 0], Z3),
    row([0, 0, 0, 2], Z3),
    row([1, 1, 0, 0], &[(-3, 2), (-7, 4), (-15, 8)]),
    row([1, 0, 1, 0], &[(1, 2), (1, 8), (1, 16)]),
    row([1, 0, 0, 1], Z3),
    row([0, 1, 1, 0], Z3),
    row([0, 1, 0, 1], &[(1, 2), (1, 8), (1, 16)]),
    row([0, 0, 1, 1], Z3),
    post(&[(-3, 2), (-3, 4), (-3, 8)]),
];

pub const TABLES: [TableSpec; 6] = [
    TableSpec { number: 1, input: [1, 0, 0, 0], strategy: Strategy::Each, redundancies: &[1, 2, 4], rows: SINGLE },
    TableSpec { number: 2, input: [1, 0, 0, 0], strategy: Strategy::Whole, redundancies: &[1, 2, 4], rows: SINGLE },
    TableSpec { number: 3, input: [2, 0, 0, 0], strategy: Strategy::Each, redundancies: &[1, 2], rows: BUNCHED_SHORT },
    TableSpec { number: 4, input: [2, 0, 0, 0], strategy: Strategy::Whole, redundancies: &[1, 2, 4], rows: BUNCHED },
    TableSpec { number: 5, input: [1, 1, 0, 0], strategy: Strategy::Each, redundancies: &[1, 2, 4], rows: PAIR },
    TableSpec { number: 6, input: [1, 1, 0, 0], strategy: Strategy::Whole, redundancies: &[1, 2, 4], rows: PAIR },
];

/// One printed coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub table: u8,
    pub input: FockState,
    pub strategy: Strategy,
    pub redundancy: usize,
    pub output: FockState,
    pub conditional: bool,
    pub coefficient: Ratio<i64>,
}

impl TableEntry {
    pub fn label(&self) -> String {
        let kind = if self.conditional { "post-selected " } else { "" };
        format!(
            "table {} N={} {}{} -> {}",
            self.table, self.redundancy, kind, self.input, self.output
        )
    }
}

pub fn entries() -> Vec<TableEntry> {
    let mut out = Vec::new();
    for t in &TABLES {
        let input = FockState::new(t.input.to_vec());
        for r in t.rows {
            for (&n, &(num, den)) in t.redundancies.iter().zip(r.coefficients) {
                out.push(TableEntry {
                    table: t.number,
                    input: input.clone(),
                    strategy: t.strategy,
                    redundancy: n,
                    output: r.output.map_or_else(|| input.clone(), |o| FockState::new(o.to_vec())),
                    conditional: r.output.is_none(),
                    coefficient: Ratio::new(num, den),
                });
            }
        }
    }
    out
}
