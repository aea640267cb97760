//! Executable checks of the spectral and coupling hypotheses.

pub mod assumptions;
pub mod gap;
pub mod perturbation;
pub mod resonance;

use std::fmt::Write as _;

pub use assumptions::{
    check_assumption_i, check_assumption_i_with, check_assumption_ii, AssumptionIReport,
    AssumptionIiCase, AssumptionIiReport,
};
pub use gap::{
    check_gap_polynomial, check_gap_uniform, gap_decay_exponent, partition_classes,
    ClassPartition, GapReport, PolynomialGapReport,
};
pub use perturbation::{perturbed_spectrum, scan_nondegeneracy, NondegeneracyScan, PerturbedSpectrum};
pub use resonance::{
    default_tolerance, find_resonances, find_resonances_exact, resonances_for_basis, Quadruple,
    ResonanceTable,
};

/// One line of a check report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub pass: bool,
    /// Margin or measured value; its meaning depends on the check.
    pub value: f64,
    /// 1-based index attaining `value`, when there is one.
    pub index: Option<usize>,
    pub detail: String,
}

impl CheckRow {
    pub fn new(check: impl Into<String>, pass: bool, value: f64) -> Self {
        Self {
            check: check.into(),
            pass,
            value,
            index: None,
            detail: String::new(),
        }
    }

    pub fn at(mut self, index: usize) -> Self {
        self.index = Some(index);
        self
    }

    pub fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// CSV with header `check,pass,value,index,detail`.
pub fn rows_to_csv(rows: &[CheckRow]) -> String {
    let mut s = String::from("check,pass,value,index,detail\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:.12e},{},\"{}\"",
            r.check,
            if r.pass { "PASS" } else { "FAIL" },
            r.value,
            r.index.map(|i| i.to_string()).unwrap_or_default(),
            r.detail.replace('"', "'")
        );
    }
    s
}

/// Aligned plain-text table.
pub fn rows_to_text(rows: &[CheckRow]) -> String {
    let width = rows.iter().map(|r| r.check.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in rows {
        let _ = write!(
            s,
            "{:<width$}  {}  {:>14.6e}",
            r.check,
            if r.pass { "PASS" } else { "FAIL" },
            r.value
        );
        if let Some(i) = r.index {
            let _ = write!(s, "  at {i}");
        }
        if !r.detail.is_empty() {
            let _ = write!(s, "  {}", r.detail);
        }
        s.push('\n');
    }
    s
}
