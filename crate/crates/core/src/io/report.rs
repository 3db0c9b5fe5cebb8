//! Tab-separated report tables.
//!
//! Reals are written as `{:.16e}` (17 significant digits, no locale),
//! so identical inputs give byte-identical files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::estimates::{EstimateReport, GeometricSequence};
use crate::grid::{RunMonitor, Trajectory};
use crate::nonlinearity::{StructuralConstants, ValidationReport};
use crate::reaction::GrowthBoundReport;
use crate::regularity::{
    Branch, ConditionReport, DeGiorgiConstants, DichotomyReport, HolderReport, HolderStatus, OscillationReport,
    SchemePhase, SchemeStep,
};
use crate::solver::total_mass;

/// One table entry.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.replace(['\t', '\n'], " "),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A report that renders as a header plus one row per record.
pub trait Tabular {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<Cell>>;
}

pub fn render_table<T: Tabular + ?Sized>(report: &T) -> String {
    let mut out = report.header().join("\t");
    out.push('\n');
    for row in report.rows() {
        let line: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&line.join("\t"));
        out.push('\n');
    }
    out
}

pub fn export_report<T: Tabular + ?Sized>(report: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_table(report)).map_err(|e| Error::io(path, e))
}

macro_rules! row {
    ($($v:expr),* $(,)?) => { vec![$(Cell::from($v)),*] };
}

impl Tabular for OscillationReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["mu_minus", "mu_plus", "essosc", "samples"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        vec![row![self.mu_minus, self.mu_plus, self.essosc, self.sample_count]]
    }
}

impl Tabular for [SchemeStep] {
    fn header(&self) -> Vec<&'static str> {
        vec!["n", "radius", "omega", "depth", "phase", "slack", "nested"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        self.iter()
            .map(|s| {
                let phase = match s.phase {
                    SchemePhase::Intrinsic => "intrinsic",
                    SchemePhase::Classical => "classical",
                };
                row![s.n, s.radius, s.omega, s.depth, phase, s.condition11_slack, s.nested]
            })
            .collect()
    }
}

impl Tabular for ConditionReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["condition", "passed", "margin"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        [
            ("domain", self.c8),
            ("oscillation", self.c9),
            ("infimum", self.c10),
            ("radius", self.c11),
            ("below_cap", self.below_cap),
        ]
        .iter()
        .map(|(n, c)| row![*n, c.passed, c.margin])
        .collect()
    }
}

impl Tabular for DichotomyReport {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "branch",
            "hypothesis_fraction",
            "conclusion_holds",
            "violating_fraction",
            "conclusion_level",
            "samples",
            "mu_minus",
            "omega",
        ]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        let branch = match self.branch {
            Branch::I => "I",
            Branch::II => "II",
        };
        vec![row![
            branch,
            self.hypothesis_fraction,
            self.conclusion_holds,
            self.violating_fraction,
            self.conclusion_level,
            self.conclusion_samples,
            self.mu_minus,
            self.omega,
        ]]
    }
}

impl Tabular for HolderReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["radius", "oscillation", "alpha_hat", "c_hat", "fit_residual", "status"]
    }

    /// One row per fitted radius; the fit columns repeat on each row.
    fn rows(&self) -> Vec<Vec<Cell>> {
        let status = match self.status {
            HolderStatus::Fitted => "fitted",
            HolderStatus::Flat => "flat",
        };
        let used = if self.radii_used.is_empty() { vec![f64::NAN] } else { self.radii_used.clone() };
        let osc: Vec<f64> = self.oscillations.iter().copied().filter(|o| *o > 1e-12).collect();
        used.iter()
            .enumerate()
            .map(|(i, &r)| {
                row![r, osc.get(i).copied().unwrap_or(0.0), self.alpha_hat, self.c_hat, self.fit_residual, status]
            })
            .collect()
    }
}

impl Tabular for EstimateReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["side", "term", "value"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        let mut rows: Vec<Vec<Cell>> = Vec::new();
        for (n, v) in &self.lhs_terms {
            rows.push(row!["lhs", n.as_str(), *v]);
        }
        for (n, v) in &self.rhs_terms {
            rows.push(row!["rhs", n.as_str(), *v]);
        }
        rows.push(row!["ratio", "gradient_times_cutoff", self.ratio]);
        rows.push(row!["ratio", "gradient_of_product", self.ratio_product]);
        rows.push(row!["flag", "vacuous", self.vacuous]);
        rows.push(row!["flag", "degenerate", self.degenerate]);
        rows.push(row!["grid", "refinement", self.refinement_tag.as_str()]);
        rows
    }
}

impl Tabular for GeometricSequence {
    fn header(&self) -> Vec<&'static str> {
        vec!["n", "y", "bound", "within"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        self.values
            .iter()
            .zip(&self.bounds)
            .enumerate()
            .map(|(n, (y, b))| row![n, *y, *b, *y <= b * (1.0 + 1e-12)])
            .collect()
    }
}

impl Tabular for StructuralConstants {
    fn header(&self) -> Vec<&'static str> {
        vec!["c1", "c2", "m", "eps", "lambda", "m_cap", "mu", "fit_residual"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        vec![row![self.c1, self.c2, self.m, self.eps, self.lambda, self.m_cap, self.mu, self.fit_residual]]
    }
}

impl Tabular for ValidationReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["check", "passed", "margin", "detail"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        self.checks
            .iter()
            .map(|c| row![c.name.as_str(), c.passed, c.margin, c.detail.as_str()])
            .collect()
    }
}

impl Tabular for GrowthBoundReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["minimal_l", "declared_l", "m0", "m", "bound_holds", "exponent_admissible", "samples"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        vec![row![
            self.minimal_l,
            self.declared_l,
            self.exponent_m0,
            self.m,
            self.bound_holds,
            self.exponent_admissible,
            self.samples,
        ]]
    }
}

impl Tabular for DeGiorgiConstants {
    fn header(&self) -> Vec<&'static str> {
        vec!["nu0", "n0", "eta0", "a", "alpha", "r_max", "n_star", "c_struct", "theta", "eta"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        vec![row![
            self.nu0,
            self.n0,
            self.eta0,
            self.a,
            self.alpha,
            self.r_max,
            self.n_star,
            self.c_struct,
            self.theta,
            self.eta,
        ]]
    }
}

impl Tabular for RunMonitor {
    fn header(&self) -> Vec<&'static str> {
        vec!["steps", "newton_iterations", "max_newton_iterations", "upper_clip_steps", "retries"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        vec![row![
            self.steps,
            self.newton_iterations,
            self.max_newton_iterations,
            self.upper_clip_steps,
            self.retries,
        ]]
    }
}

impl Tabular for Trajectory {
    fn header(&self) -> Vec<&'static str> {
        vec!["t", "mass", "min", "max"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        self.snapshots()
            .iter()
            .map(|s| row![s.t, total_mass(&s.field), s.field.min(), s.field.max()])
            .collect()
    }
}

/// Free-form table built row by row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }
}

impl Tabular for Table {
    fn header(&self) -> Vec<&'static str> {
        self.header.clone()
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        self.rows.clone()
    }
}
