//! Report records, output formats and the command-line driver.

pub mod cli;
pub mod suites;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{BoundError, BoundInput, BoundResult};
use crate::foliation_zoo::ZooError;
use crate::model_ode::ModelError;
use crate::psi_kernel::PsiError;
use crate::sl_engine::SlError;

pub const SCHEMA: &str = include_str!("../../schema/report.schema.json");

/// Significant digits kept in machine-readable output.
pub const JSON_DIGITS: usize = 12;
/// Significant digits shown in human-readable tables.
pub const TABLE_DIGITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitStatus {
    Success = 0,
    VerificationFailure = 1,
    InvalidInput = 2,
    NonConvergence = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::InvalidInput(_) | CliError::Io(_) => ExitStatus::InvalidInput,
            CliError::NonConvergence(_) => ExitStatus::NonConvergence,
            CliError::Verification(_) => ExitStatus::VerificationFailure,
        }
    }
}

fn is_convergence_failure(e: &SlError) -> bool {
    matches!(
        e,
        SlError::NonConvergence(_) | SlError::BracketFailure { .. } | SlError::StiffIntegration { .. }
    )
}

impl From<SlError> for CliError {
    fn from(e: SlError) -> Self {
        if is_convergence_failure(&e) {
            CliError::NonConvergence(e.to_string())
        } else {
            CliError::InvalidInput(e.to_string())
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Solver(s) => s.into(),
            ModelError::Domain(_) => CliError::InvalidInput(e.to_string()),
        }
    }
}

impl From<PsiError> for CliError {
    fn from(e: PsiError) -> Self {
        match e {
            PsiError::QuadratureFailure { .. } => CliError::NonConvergence(e.to_string()),
            _ => CliError::InvalidInput(e.to_string()),
        }
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::Domain(_) => CliError::InvalidInput(e.to_string()),
            BoundError::Model(m) => m.into(),
            BoundError::Psi(p) => p.into(),
            BoundError::Hierarchy(_) => CliError::Verification(e.to_string()),
        }
    }
}

impl From<ZooError> for CliError {
    fn from(e: ZooError) -> Self {
        match e {
            ZooError::Solver(s) => s.into(),
            ZooError::Psi(p) => p.into(),
            ZooError::Bound(b) => b.into(),
            _ => CliError::InvalidInput(e.to_string()),
        }
    }
}

/// Rounds to `digits` significant digits; non-finite values pass through.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn round_opt(x: Option<f64>) -> Option<f64> {
    x.filter(|v| v.is_finite()).map(|v| round_sig(v, JSON_DIGITS))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Bounds,
    Model,
    Verify,
    Examples,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SweepVar {
    #[serde(rename = "n")]
    N,
    #[serde(rename = "K")]
    K,
    #[serde(rename = "d")]
    D,
    #[serde(rename = "s")]
    S,
}

impl SweepVar {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVar::N => "n",
            SweepVar::K => "K",
            SweepVar::D => "d",
            SweepVar::S => "s",
        }
    }
}

/// `var=start:stop:count`, `count` evenly spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub var: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        let mut v: Vec<f64> = (0..self.count)
            .map(|j| if j + 1 == self.count { self.stop } else { self.start + step * j as f64 })
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

impl FromStr for SweepRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (var, range) = s
            .split_once('=')
            .ok_or_else(|| format!("expected var=start:stop:count, got `{s}`"))?;
        let var = match var.trim() {
            "n" => SweepVar::N,
            "K" => SweepVar::K,
            "d" => SweepVar::D,
            "s" => SweepVar::S,
            other => return Err(format!("unknown sweep variable `{other}` (use n, K, d or s)")),
        };
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:count, got `{range}`"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad number `{p}`: {e}"));
        let start = num(parts[0])?;
        let stop = num(parts[1])?;
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("bad count `{}`: {e}", parts[2]))?;
        if !(start.is_finite() && stop.is_finite()) {
            return Err("sweep bounds must be finite".into());
        }
        Ok(Self { var, start, stop, count })
    }
}

impl fmt::Display for SweepRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}:{}:{}", self.var.as_str(), self.start, self.stop, self.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub n: u32,
    #[serde(rename = "K")]
    pub k_curv: f64,
    pub d: f64,
    pub s: Option<f64>,
    pub a: Option<f64>,
    pub model: bool,
    pub tolerance: f64,
    pub mesh: usize,
    pub seed: u64,
    pub negative_control: bool,
    pub sweep: Vec<SweepRange>,
    pub format: OutputFormat,
    pub out: Option<String>,
    pub timing: bool,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            n: 3,
            k_curv: 1.0,
            d: std::f64::consts::FRAC_PI_2,
            s: None,
            a: None,
            model: false,
            tolerance: 1e-10,
            mesh: 1024,
            seed: 0,
            negative_control: false,
            sweep: Vec::new(),
            format: if command == CommandKind::Sweep {
                OutputFormat::Csv
            } else {
                OutputFormat::Table
            },
            out: None,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(1e-12..=1e-4).contains(&self.tolerance) {
            return Err(CliError::InvalidInput(format!(
                "tolerance must lie in [1e-12, 1e-4], got {}",
                self.tolerance
            )));
        }
        if self.mesh < 64 || !self.mesh.is_power_of_two() {
            return Err(CliError::InvalidInput(format!(
                "mesh must be a power of two >= 64, got {}",
                self.mesh
            )));
        }
        if self.command == CommandKind::Sweep {
            if self.sweep.is_empty() || self.sweep.len() > 2 {
                return Err(CliError::InvalidInput("sweep needs one or two --sweep ranges".into()));
            }
            if self.sweep.len() == 2 && self.sweep[0].var == self.sweep[1].var {
                return Err(CliError::InvalidInput("the two sweep ranges must differ".into()));
            }
            if let Some(r) = self.sweep.iter().find(|r| r.count == 0) {
                return Err(CliError::InvalidInput(format!("empty sweep range {r}")));
            }
        } else if !self.sweep.is_empty() {
            return Err(CliError::InvalidInput("--sweep is only valid with the sweep command".into()));
        }
        Ok(())
    }

    /// Tolerance handed to the shooting solver, which accepts at most 1e-6.
    pub fn solver_tolerance(&self) -> f64 {
        self.tolerance.clamp(1e-12, 1e-6)
    }

    /// A numerical threshold loosened to the requested tolerance.
    pub fn relaxed(&self, threshold: f64) -> f64 {
        threshold.max(self.tolerance)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub example: Option<String>,
    pub n: Option<u32>,
    #[serde(rename = "K")]
    pub k_curv: Option<f64>,
    pub d: Option<f64>,
    pub s: Option<f64>,
    pub a: Option<f64>,
}

impl InputEcho {
    pub fn from_bound_input(input: &BoundInput) -> Self {
        Self {
            n: Some(input.n),
            k_curv: round_opt(Some(input.k_curv)),
            d: round_opt(Some(input.d)),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub method: String,
    pub mesh: Option<usize>,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub input: InputEcho,
    pub bound: String,
    pub parameter: Option<f64>,
    pub value: f64,
    pub valid: bool,
    pub note: String,
    pub diagnostics: Option<Diagnostics>,
    pub wall_time_ms: Option<f64>,
}

impl ReportRecord {
    pub fn new(input: InputEcho, bound: impl Into<String>, value: f64, valid: bool, note: impl Into<String>) -> Self {
        Self {
            input,
            bound: bound.into(),
            parameter: None,
            value: round_sig(value, JSON_DIGITS),
            valid,
            note: note.into(),
            diagnostics: None,
            wall_time_ms: None,
        }
    }

    pub fn from_bound(input: InputEcho, b: &BoundResult) -> Self {
        let mut r = Self::new(input, b.name.as_str(), b.value, b.valid, b.note.clone());
        r.parameter = round_opt(b.parameter);
        r
    }

    pub fn with_diagnostics(mut self, method: &str, mesh: Option<usize>, residual: Option<f64>) -> Self {
        self.diagnostics = Some(Diagnostics {
            method: method.into(),
            mesh,
            residual: round_opt(residual),
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    /// Smallest slack `threshold − observed` over the suite; negative on failure.
    pub worst_margin: Option<f64>,
    pub detail: String,
}

impl SuiteResult {
    pub fn new(name: &str, passed: bool, checks: usize, worst_margin: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            checks,
            worst_margin: round_opt(Some(worst_margin)),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub records: Vec<ReportRecord>,
    pub suite_results: Vec<SuiteResult>,
}

/// Validates a JSON document against the shipped report schema.
pub fn validate_report_json(value: &serde_json::Value) -> Result<(), String> {
    let schema: serde_json::Value = serde_json::from_str(SCHEMA).map_err(|e| e.to_string())?;
    let compiled = jsonschema::JSONSchema::compile(&schema).map_err(|e| e.to_string())?;
    let result = compiled.validate(value);
    if let Err(errors) = result {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        return Err(msgs.join("; "));
    }
    Ok(())
}

impl Report {
    pub fn to_json(&self) -> Result<String, CliError> {
        let value = serde_json::to_value(self).map_err(|e| CliError::Verification(e.to_string()))?;
        validate_report_json(&value).map_err(|e| CliError::Verification(format!("schema: {e}")))?;
        let mut s = serde_json::to_string_pretty(&value).map_err(|e| CliError::Verification(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// Rows of plain cells rendered as CSV or as an aligned table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self, digits: usize) -> String {
        match self {
            Cell::Num(x) => format_number(*x, digits),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

pub fn format_number(x: f64, digits: usize) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        let r = round_sig(x, digits);
        let a = r.abs();
        if a != 0.0 && !(1e-4..1e9).contains(&a) {
            format!("{r:e}")
        } else {
            r.to_string()
        }
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render(JSON_DIGITS))).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(std::io::Error::other(e)))
    }

    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|c| c.render(TABLE_DIGITS)).collect())
            .collect();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |row: &[String]| {
            let mut s = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ");
            s.truncate(s.trim_end().len());
            s.push('\n');
            s
        };
        let mut out = line(&self.header);
        out.push_str(&line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>()));
        for row in &cells {
            out.push_str(&line(row));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits_and_round_trips() {
        let x = round_sig(std::f64::consts::PI, 12);
        assert_eq!(x, 3.14159265359);
        let back: f64 = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        assert_eq!(back, x);
        assert_eq!(round_sig(0.0, 12), 0.0);
        assert_eq!(format_number(5.0625, 6), "5.0625");
        assert_eq!(format_number(1.0 / 3.0, 6), "0.333333");
    }

    #[test]
    fn sweep_range_parsing() {
        let r: SweepRange = "s=0.0125:0.9925:99".parse().unwrap();
        assert_eq!((r.var, r.count), (SweepVar::S, 99));
        let v = r.values();
        assert_eq!(v.len(), 99);
        assert!(v.iter().any(|&s| (s - 0.5625).abs() < 1e-12));
        assert_eq!(*v.last().unwrap(), 0.9925);
        assert!("q=1:2:3".parse::<SweepRange>().is_err());
        assert!("d=1:2".parse::<SweepRange>().is_err());
        assert!("d=1:x:3".parse::<SweepRange>().is_err());
        let desc: SweepRange = "d=3:1:3".parse().unwrap();
        assert_eq!(desc.values(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(CommandKind::Bounds);
        assert!(c.validate().is_ok());
        c.mesh = 100;
        assert!(c.validate().is_err());
        c.mesh = 64;
        c.tolerance = 1e-3;
        assert!(c.validate().is_err());
        let mut c = RunConfig::new(CommandKind::Sweep);
        assert!(c.validate().is_err());
        c.sweep.push("d=1:2:0".parse().unwrap());
        assert_eq!(c.validate().unwrap_err().status(), ExitStatus::InvalidInput);
    }

    #[test]
    fn csv_uses_lf_and_header() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::Num(1.5), Cell::Text("x,y".into())]);
        let s = t.to_csv().unwrap();
        assert_eq!(s, "a,b\n1.5,\"x,y\"\n");
        assert!(t.to_text().contains("1.5"));
    }

    #[test]
    fn error_classification() {
        let e: CliError = SlError::NonConvergence("x".into()).into();
        assert_eq!(e.status(), ExitStatus::NonConvergence);
        let e: CliError = BoundError::Domain("x".into()).into();
        assert_eq!(e.status(), ExitStatus::InvalidInput);
        let e: CliError = BoundError::Hierarchy("x".into()).into();
        assert_eq!(e.status(), ExitStatus::VerificationFailure);
    }
}
