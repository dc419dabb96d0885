//! Independent desk-scale verification: a discrete-time dynamic-programming
//! solver for expected utility and the indifference price, and a Monte Carlo
//! estimator of the marginal-price ratio formula.

mod lattice;
mod mc;

pub use lattice::{
    lattice_expected_utility, lattice_indifference_price, lattice_indifference_ladder,
    richardson_extrapolate, LatticeSpec, LatticeSurface,
};
pub use mc::{mc_marginal_price, McSpec};

use std::io::Write;

/// One row of a verification report.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub check: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
}

impl CheckRow {
    pub fn pass(&self) -> bool {
        (self.expected - self.actual).abs() <= self.tolerance
    }
}

/// Accumulates named checks and emits them as CSV.
#[derive(Debug, Default)]
pub struct VerificationReport {
    pub rows: Vec<CheckRow>,
}

impl VerificationReport {
    pub fn add(&mut self, check: &str, expected: f64, actual: f64, tolerance: f64) {
        self.rows.push(CheckRow { check: check.into(), expected, actual, tolerance });
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(CheckRow::pass)
    }

    /// CSV export: `check,expected,actual,tolerance,pass`.
    pub fn to_csv<W: Write>(&self, w: &mut W) -> crate::error::Result<()> {
        writeln!(w, "check,expected,actual,tolerance,pass")?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                row.check, row.expected, row.actual, row.tolerance, row.pass()
            )?;
        }
        Ok(())
    }
}
