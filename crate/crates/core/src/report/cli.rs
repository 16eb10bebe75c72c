//! `basicgap` command line.

use std::ffi::OsString;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use super::{
    suites, Cell, CliError, CommandKind, ExitStatus, InputEcho, OutputFormat, Report, ReportRecord, RunConfig,
    SweepRange, SweepVar, Table,
};
use crate::bounds::{
    best_bound, lichnerowicz, li_type, model_bound, shi_zhang, shi_zhang_optimal, zhong_yang, BoundInput,
};
use crate::foliation_zoo::standard_zoo;
use crate::model_ode::{model_eigenvalue_checked, ModelProblem};

#[derive(Debug, Parser)]
#[command(name = "basicgap", version, about = "Lower bounds for the first basic eigenvalue")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Table of every lower bound for (n, K, d)
    Bounds(Common),
    /// First eigenvalue of the 1-D comparison model, cross-checked
    Model(Common),
    /// Run the invariant suites
    Verify(Common),
    /// Fixture gallery with known spectra and their bounds
    Examples(Common),
    /// Evaluate the bounds over one or two parameter ranges
    Sweep(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Ambient dimension
    #[arg(long, default_value_t = 3)]
    n: u32,
    /// Ricci lower bound constant: Ric ≥ (n−1)K
    #[arg(long = "K", default_value_t = 1.0, allow_negative_numbers = true)]
    k_curv: f64,
    /// Leaf-space diameter
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_negative_numbers = true)]
    d: f64,
    /// Parameter of the one-parameter family, in (0, 1)
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Left endpoint of the model interval (default −d/2)
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Include the 1-D model eigenvalue
    #[arg(long)]
    model: bool,
    /// Finite-difference mesh (power of two ≥ 64)
    #[arg(long, default_value_t = 1024)]
    mesh: usize,
    /// Solver tolerance in [1e-12, 1e-4]
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<String>,
    /// Seed for the randomized suites
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shift ψ by 0.01 so the residual suite must fail
    #[arg(long)]
    negative_control: bool,
    /// Sweep range `var=start:stop:count` with var ∈ {n, K, d, s}; repeat for two
    #[arg(long)]
    sweep: Vec<SweepRange>,
    /// Record wall time per record (makes output non-deterministic)
    #[arg(long)]
    timing: bool,
}

impl Cli {
    fn into_config(self) -> RunConfig {
        let (kind, c) = match self.command {
            Command::Bounds(c) => (CommandKind::Bounds, c),
            Command::Model(c) => (CommandKind::Model, c),
            Command::Verify(c) => (CommandKind::Verify, c),
            Command::Examples(c) => (CommandKind::Examples, c),
            Command::Sweep(c) => (CommandKind::Sweep, c),
        };
        let mut cfg = RunConfig::new(kind);
        cfg.n = c.n;
        cfg.k_curv = c.k_curv;
        cfg.d = c.d;
        cfg.s = c.s;
        cfg.a = c.a;
        cfg.model = c.model;
        cfg.mesh = c.mesh;
        cfg.tolerance = c.tolerance;
        if let Some(f) = c.format {
            cfg.format = f;
        }
        cfg.out = c.out;
        cfg.seed = c.seed;
        cfg.negative_control = c.negative_control;
        cfg.sweep = c.sweep;
        cfg.timing = c.timing;
        cfg
    }
}

/// Parses the arguments into a configuration, or returns clap's message and exit code.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, (String, i32)>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args)
        .map(Cli::into_config)
        .map_err(|e| (e.render().to_string(), e.exit_code()))
}

/// Rendered output of a successful or verification-failed run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: ExitStatus,
    pub report: Report,
    pub rendered: String,
}

pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let (records, suite_results, table) = match config.command {
        CommandKind::Bounds => {
            let (r, t) = cmd_bounds(config)?;
            (r, Vec::new(), t)
        }
        CommandKind::Model => {
            let (r, t) = cmd_model(config)?;
            (r, Vec::new(), t)
        }
        CommandKind::Examples => {
            let (r, t) = cmd_examples(config)?;
            (r, Vec::new(), t)
        }
        CommandKind::Sweep => {
            let (r, t) = cmd_sweep(config)?;
            (r, Vec::new(), t)
        }
        CommandKind::Verify => {
            let mut results = suites::run_all(config)?;
            // failing suites first, otherwise in suite order
            results.sort_by_key(|r| r.passed);
            let mut t = Table::new(&["suite", "status", "checks", "worst_margin", "detail"]);
            for r in &results {
                t.push(vec![
                    r.name.as_str().into(),
                    if r.passed { "pass" } else { "FAIL" }.into(),
                    Cell::Int(r.checks as i64),
                    r.worst_margin.into(),
                    r.detail.as_str().into(),
                ]);
            }
            (Vec::new(), results, t)
        }
    };
    let status = if suite_results.iter().all(|r| r.passed) {
        ExitStatus::Success
    } else {
        ExitStatus::VerificationFailure
    };
    let report = Report {
        config: config.clone(),
        records,
        suite_results,
    };
    let rendered = match config.format {
        OutputFormat::Json => report.to_json()?,
        OutputFormat::Csv => table.to_csv()?,
        OutputFormat::Table => table.to_text(),
    };
    Ok(Outcome { status, report, rendered })
}

/// Full driver: parse, execute, write output, return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_config(args) {
        Ok(c) => c,
        Err((msg, code)) => {
            if code == 0 {
                print!("{msg}");
            } else {
                eprint!("{msg}");
            }
            return code;
        }
    };
    match execute(&config).and_then(|o| write_output(&config, &o.rendered).map(|_| o)) {
        Ok(o) => o.status.code(),
        Err(e) => {
            eprintln!("basicgap: {e}");
            e.status().code()
        }
    }
}

fn write_output(config: &RunConfig, text: &str) -> Result<(), CliError> {
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn timed<T>(config: &RunConfig, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    let start = Instant::now();
    let v = f();
    let ms = config.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    (v, ms)
}

fn record_table(records: &[ReportRecord]) -> Table {
    let mut t = Table::new(&["bound", "parameter", "value", "valid", "note"]);
    for r in records {
        t.push(vec![
            r.bound.as_str().into(),
            r.parameter.into(),
            r.value.into(),
            r.valid.into(),
            r.note.as_str().into(),
        ]);
    }
    t
}

fn cmd_bounds(config: &RunConfig) -> Result<(Vec<ReportRecord>, Table), CliError> {
    let input = BoundInput::new(config.n, config.k_curv, config.d)?;
    let (list, ms) = timed(config, || best_bound(&input, config.model, config.solver_tolerance()));
    let mut list = list?;
    if let Some(s) = config.s {
        list.push(shi_zhang(&input, s)?);
        list.sort_by(|x, y| y.value.total_cmp(&x.value));
    }
    let echo = InputEcho {
        s: config.s,
        ..InputEcho::from_bound_input(&input)
    };
    let records: Vec<ReportRecord> = list
        .iter()
        .map(|b| {
            let mut r = ReportRecord::from_bound(echo.clone(), b);
            if b.name == crate::bounds::BoundName::Model {
                r = r.with_diagnostics("shooting", None, None);
            }
            r.wall_time_ms = ms;
            r
        })
        .collect();
    let table = record_table(&records);
    Ok((records, table))
}

fn cmd_model(config: &RunConfig) -> Result<(Vec<ReportRecord>, Table), CliError> {
    let a = config.a.unwrap_or(-config.d / 2.0);
    let problem = ModelProblem::new(config.k_curv, config.n, a, config.d)?;
    let (checked, ms) = timed(config, || {
        model_eigenvalue_checked(&problem, config.solver_tolerance(), config.mesh)
    });
    let c = checked?;
    let echo = InputEcho {
        n: Some(config.n),
        k_curv: Some(config.k_curv),
        d: Some(config.d),
        a: Some(a),
        ..InputEcho::default()
    };
    let note = format!("relative gap to FD {:.2e}", c.relative_gap);
    let mut shoot = ReportRecord::new(echo.clone(), "model", c.shooting, true, note)
        .with_diagnostics("shooting", None, Some(c.residual));
    shoot.wall_time_ms = ms;
    let mut fd = ReportRecord::new(echo, "model_fd", c.finite_difference, true, "Richardson-extrapolated")
        .with_diagnostics("finite_difference", Some(c.mesh), None);
    fd.wall_time_ms = ms;
    let records = vec![shoot, fd];
    let mut t = Table::new(&["method", "value", "mesh", "residual", "note"]);
    for r in &records {
        let d = r.diagnostics.as_ref().expect("set above");
        t.push(vec![
            d.method.as_str().into(),
            r.value.into(),
            d.mesh.map_or(Cell::Empty, |m| Cell::Int(m as i64)),
            d.residual.into(),
            r.note.as_str().into(),
        ]);
    }
    Ok((records, t))
}

fn cmd_examples(config: &RunConfig) -> Result<(Vec<ReportRecord>, Table), CliError> {
    let tol = config.solver_tolerance();
    let zoo = standard_zoo();
    let per_example: Vec<Vec<ReportRecord>> = zoo
        .par_iter()
        .map(|e| {
            let input = e.bound_input()?;
            let echo = InputEcho {
                example: Some(e.name.clone()),
                ..InputEcho::from_bound_input(&input)
            };
            let (computed, ms) = timed(config, || -> Result<_, CliError> {
                let reduction = e.reduction.map(|r| r.first_eigenvalue(tol)).transpose()?;
                Ok((reduction, e.bounds(tol)?))
            });
            let (reduction, bounds) = computed?;
            let mut out = vec![ReportRecord::new(echo.clone(), "known_lambda1B", e.known_lambda1b, true, "closed form")];
            if let Some(v) = reduction {
                out.push(
                    ReportRecord::new(echo.clone(), "reduction", v, true, "transverse drift problem")
                        .with_diagnostics("shooting", None, None),
                );
            }
            out.extend(bounds.iter().map(|b| ReportRecord::from_bound(echo.clone(), b)));
            for r in &mut out {
                r.wall_time_ms = ms;
            }
            Ok(out)
        })
        .collect::<Result<_, CliError>>()?;
    let records: Vec<ReportRecord> = per_example.into_iter().flatten().collect();
    let mut t = Table::new(&["example", "n", "K", "d", "quantity", "value", "valid"]);
    for r in &records {
        t.push(vec![
            r.input.example.clone().unwrap_or_default().into(),
            Cell::Int(r.input.n.unwrap_or(0) as i64),
            r.input.k_curv.into(),
            r.input.d.into(),
            r.bound.as_str().into(),
            r.value.into(),
            r.valid.into(),
        ]);
    }
    Ok((records, t))
}

#[derive(Debug, Clone, Copy)]
struct SweepPoint {
    n: u32,
    k: f64,
    d: f64,
    s: Option<f64>,
}

fn sweep_points(config: &RunConfig) -> Result<Vec<(Vec<f64>, SweepPoint)>, CliError> {
    let base = SweepPoint {
        n: config.n,
        k: config.k_curv,
        d: config.d,
        s: config.s,
    };
    let mut points: Vec<(Vec<f64>, SweepPoint)> = vec![(Vec::new(), base)];
    for range in &config.sweep {
        let values = range.values();
        let mut next = Vec::with_capacity(points.len() * values.len());
        for (key, p) in &points {
            for &v in &values {
                let mut q = *p;
                match range.var {
                    SweepVar::N => {
                        if v.fract() != 0.0 || v < 2.0 || v > u32::MAX as f64 {
                            return Err(CliError::InvalidInput(format!("n must be an integer >= 2, got {v}")));
                        }
                        q.n = v as u32;
                    }
                    SweepVar::K => q.k = v,
                    SweepVar::D => q.d = v,
                    SweepVar::S => q.s = Some(v),
                }
                let mut k2 = key.clone();
                k2.push(v);
                next.push((k2, q));
            }
        }
        points = next;
    }
    points.sort_by(|x, y| {
        x.0.iter()
            .zip(&y.0)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(points)
}

fn cmd_sweep(config: &RunConfig) -> Result<(Vec<ReportRecord>, Table), CliError> {
    let tol = config.solver_tolerance();
    let points = sweep_points(config)?;
    let with_s = points.iter().any(|(_, p)| p.s.is_some());
    let rows: Vec<Vec<(&'static str, Option<f64>, bool, String)>> = points
        .par_iter()
        .map(|(_, p)| {
            let input = BoundInput::new(p.n, p.k, p.d)?;
            let mut row = Vec::new();
            for b in [zhong_yang(&input), lichnerowicz(&input), li_type(&input)] {
                row.push((b.name.as_str(), Some(b.value), b.valid, b.note));
            }
            if with_s {
                let s = p.s.ok_or_else(|| CliError::InvalidInput("s is swept or given for some rows only".into()))?;
                let b = shi_zhang(&input, s)?;
                row.push(("shi_zhang", Some(b.value), b.valid, b.note));
            }
            let opt = shi_zhang_optimal(&input);
            row.push((opt.name.as_str(), Some(opt.value), opt.valid, opt.note));
            if config.model {
                if input.k_curv > 0.0 && input.d >= input.max_diameter() {
                    row.push(("model", None, false, "skipped at d = π/√K".into()));
                } else {
                    let m = model_bound(&input, tol)?;
                    row.push(("model", Some(m.value), true, m.note));
                }
            }
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;

    let swept: Vec<&str> = config.sweep.iter().map(|r| r.var.as_str()).collect();
    let mut header: Vec<&str> = swept.clone();
    if let Some(first) = rows.first() {
        header.extend(first.iter().map(|c| c.0));
    }
    let mut table = Table::new(&header);
    let mut records = Vec::new();
    for ((key, p), row) in points.iter().zip(&rows) {
        let mut cells: Vec<Cell> = key
            .iter()
            .zip(&config.sweep)
            .map(|(v, r)| if r.var == SweepVar::N { Cell::Int(*v as i64) } else { Cell::Num(*v) })
            .collect();
        let echo = InputEcho {
            n: Some(p.n),
            k_curv: Some(super::round_sig(p.k, super::JSON_DIGITS)),
            d: Some(super::round_sig(p.d, super::JSON_DIGITS)),
            s: p.s.map(|s| super::round_sig(s, super::JSON_DIGITS)),
            ..InputEcho::default()
        };
        for (name, value, valid, note) in row {
            cells.push((*value).into());
            if let Some(v) = value {
                records.push(ReportRecord::new(echo.clone(), *name, *v, *valid, note.clone()));
            }
        }
        table.push(cells);
    }
    Ok((records, table))
}
