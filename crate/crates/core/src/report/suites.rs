//! Invariant suites run by `basicgap verify`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CliError, RunConfig, SuiteResult};
use crate::bounds::{optimal_s, shi_zhang, zhong_yang, BoundInput, BoundName, Regime};
use crate::foliation_zoo::{
    rigidity_certificate, rigidity_certificate_shifted, standard_zoo, verify_hopf_inequality,
    verify_isoparametric_inequality,
};
use crate::model_ode::{
    check_central_minimal, check_diameter_monotone, model_eigenvalue, model_eigenvalue_checked,
    ModelProblem, MONOTONE_SLACK,
};
use crate::psi_kernel::{
    barrier_integral, barrier_integral_gauss_legendre, gradient_estimate_check, psi,
    psi_ode_residual_with_offset, refined_zhong_yang, series_partial_sum, Normalization,
    RESIDUAL_LIMIT,
};
use crate::sl_engine::solve_neumann_fd_extrapolated;

/// Shift applied to ψ by the fault-injection run.
pub const NEGATIVE_CONTROL_OFFSET: f64 = 0.01;

type Suite = fn(&RunConfig) -> Result<SuiteResult, CliError>;

pub const SUITES: &[(&str, Suite)] = &[
    ("psi_ode_residual", psi_residual),
    ("series_consistency", series_consistency),
    ("barrier_dual_quadrature", barrier_quadrature),
    ("refined_bound_ordering", refined_ordering),
    ("model_closed_forms", model_closed_forms),
    ("model_cross_check", model_cross_check),
    ("model_central_minimal", central_minimal),
    ("model_diameter_monotone", diameter_monotone),
    ("shi_zhang_dominance", shi_zhang_dominance),
    ("optimal_s_closed_form", optimal_s_suite),
    ("zoo_reduction_fidelity", zoo_fidelity),
    ("zoo_bound_soundness", zoo_soundness),
    ("zoo_inequalities", zoo_inequalities),
    ("rigidity_certificates", rigidity),
];

/// Runs every suite; the output order matches [`SUITES`].
pub fn run_all(config: &RunConfig) -> Result<Vec<SuiteResult>, CliError> {
    SUITES.par_iter().map(|(_, f)| f(config)).collect()
}

/// Tracks the smallest `threshold − observed` slack over a suite.
struct Margin {
    worst: f64,
    checks: usize,
    failures: Vec<String>,
}

impl Margin {
    fn new() -> Self {
        Self {
            worst: f64::INFINITY,
            checks: 0,
            failures: Vec::new(),
        }
    }

    /// Records `observed ≤ threshold`.
    fn at_most(&mut self, observed: f64, threshold: f64, what: impl FnOnce() -> String) {
        let slack = threshold - observed;
        self.checks += 1;
        if !(slack >= 0.0) {
            self.failures.push(what());
        }
        self.worst = if slack.is_nan() { f64::NEG_INFINITY } else { self.worst.min(slack) };
    }

    fn holds(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
            self.worst = self.worst.min(-1.0);
        }
    }

    fn finish(self, name: &str, summary: String) -> SuiteResult {
        let passed = self.failures.is_empty();
        let detail = if passed {
            summary
        } else {
            let mut shown = self.failures.iter().take(3).cloned().collect::<Vec<_>>().join("; ");
            if self.failures.len() > 3 {
                shown.push_str(&format!("; ... {} more", self.failures.len() - 3));
            }
            format!("{summary}; failing: {shown}")
        };
        let worst = if self.worst.is_infinite() && self.worst > 0.0 { 0.0 } else { self.worst };
        SuiteResult::new(name, passed, self.checks, worst, detail)
    }
}

fn psi_residual(cfg: &RunConfig) -> Result<SuiteResult, CliError> {
    let offset = if cfg.negative_control { NEGATIVE_CONTROL_OFFSET } else { 0.0 };
    let mut m = Margin::new();
    let mut max_res = 0.0f64;
    for j in 0..2001 {
        let theta = -RESIDUAL_LIMIT + 2.0 * RESIDUAL_LIMIT * j as f64 / 2000.0;
        let r = psi_ode_residual_with_offset(theta, offset)?;
        max_res = max_res.max(r);
        m.at_most(r, 1e-10, || format!("residual {r:e} at θ = {theta}"));
    }
    let end = psi(FRAC_PI_2)?;
    m.at_most((end - 1.0).abs(), 1e-6, || format!("ψ(π/2) = {end}"));
    let near = psi(FRAC_PI_2 - 1e-7)?;
    m.at_most((near - 1.0).abs(), 1e-6, || format!("ψ(π/2 − 1e-7) = {near}"));
    let label = if cfg.negative_control { " (ψ shifted by 0.01)" } else { "" };
    Ok(m.finish("psi_ode_residual", format!("max residual {max_res:.3e} on 2001 points{label}")))
}

fn series_consistency(_: &RunConfig) -> Result<SuiteResult, CliError> {
    let mut m = Margin::new();
    let at_zero = series_partial_sum(0.0, 10)?;
    m.at_most((at_zero - 2.0).abs(), 0.0, || format!("partial sum at 0 is {at_zero}"));
    for x in [0.1f64, 0.3, 0.5] {
        let exact = 1.0 / (1.0 + x).sqrt() + 1.0 / (1.0 - x).sqrt();
        for terms in 0..=25u32 {
            let err = (series_partial_sum(x, terms)? - exact).abs();
            // every coefficient is at most 1, so the tail is geometric
            let tail = 2.0 * x.powi(2 * terms as i32 + 2) / (1.0 - x * x) + 4.0 * f64::EPSILON;
            m.at_most(err, tail, || format!("x = {x}, N = {terms}: error {err:e} > {tail:e}"));
        }
    }
    Ok(m.finish("series_consistency", "partial sums within the geometric tail bound".into()))
}

fn barrier_quadrature(_: &RunConfig) -> Result<SuiteResult, CliError> {
    let mut m = Margin::new();
    let simpson = barrier_integral(1e-12)?;
    let gl = barrier_integral_gauss_legendre();
    let diff = (simpson - gl).abs();
    m.at_most(diff, 1e-9, || format!("Simpson {simpson} vs Gauss–Legendre {gl}"));
    m.holds(simpson > 0.0 && simpson < FRAC_PI_2, || format!("I = {simpson} outside (0, π/2)"));
    let reflected = crate::psi_kernel::quadrature::gauss_legendre_integrate(
        &|t: f64| {
            let p = psi(t).unwrap_or(f64::NAN);
            let q = psi(-t).unwrap_or(f64::NAN);
            -p * q
        },
        0.0,
        FRAC_PI_2,
        crate::psi_kernel::GAUSS_LEGENDRE_NODES,
    );
    m.at_most((reflected - gl).abs(), 1e-13, || format!("odd reflection gives {reflected}"));
    Ok(m.finish(
        "barrier_dual_quadrature",
        format!("I = {simpson:.12} (|Simpson − GL| = {diff:.1e})"),
    ))
}

fn refined_ordering(_: &RunConfig) -> Result<SuiteResult, CliError> {
    let mut m = Margin::new();
    for d in [0.5, 1.0, 2.0, PI] {
        let zy = PI * PI / (d * d);
        let mut prev = f64::INFINITY;
        for j in 1..=20 {
            let k = j as f64 / 20.0;
            let r = refined_zhong_yang(d, k)?;
            if j == 20 {
                m.at_most((r - zy).abs(), 1e-12 * zy, || format!("d = {d}: k = 1 gives {r} ≠ {zy}"));
            } else {
                m.holds(r > zy * (1.0 + 1e-12), || format!("d = {d}, k = {k}: {r} not above {zy}"));
            }
            m.holds(r <= prev, || format!("d = {d}: increases at k = {k}"));
            prev = r;
        }
    }
    Ok(m.finish("refined_bound_ordering", "refined ≥ π²/d², equality only at k = 1".into()))
}

fn model_closed_forms(cfg: &RunConfig) -> Result<SuiteResult, CliError> {
    let tol = cfg.solver_tolerance();
    let mut m = Margin::new();
    for delta in [0.5, 1.0, 2.0, 3.0] {
        let l = model_eigenvalue(&ModelProblem::new(0.0, 3, 0.0, delta)?, tol)?;
        let exact = PI * PI / (delta * delta);
        let rel = ((l - exact) / exact).abs();
        m.at_most(rel, cfg.relaxed(1e-8), || format!("K = 0, δ = {delta}: {l} vs {exact}"));
    }
    for n in [2u32, 3, 5] {
        let d = PI - 2e-4 * PI;
        let l = model_eigenvalue(&ModelProblem::central(1.0, n, d)?, tol)?;
        let target = n as f64;
        m.at_most((l - target).abs() / target, 1e-3, || format!("n = {n}: near-full interval {l}"));
    }
    Ok(m.finish("model_closed_forms", "flat gaps π²/δ² and near-full interval → nK".into()))
}

fn model_cross_check(cfg: &RunConfig) -> Result<SuiteResult, CliError> {
    let tol = cfg.solver_tolerance();
    // Richardson-extrapolated differences are fourth order in the mesh width
    let threshold = cfg.relaxed(1e-6).max(1e-6 * (512.0 / cfg.mesh as f64).powi(4));
    let cases: Vec<(u32, f64)> = [2u32, 3, 5]
        .iter()
        .flat_map(|&n| [0.5, 1.5, 2.5].map(move |d| (n, d)))
        .collect();
    let results: Vec<_> = cases
        .par_iter()
        .map(|&(n, d)| Ok(((n, d), model_eigenvalue_checked(&ModelProblem::central(1.0, n, d)?, tol, cfg.mesh)?)))
        .collect::<Result<_, CliError>>()?;
    let mut m = Margin::new();
    let mut worst = 0.0f64;
    for ((n, d), c) in results {
        worst = worst.max(c.relative_gap);
        m.at_most(c.relative_gap, threshold, || {
            format!("n = {n}, d = {d}: shooting {} vs FD {}", c.shooting, c.finite_difference)
        });
    }
    Ok(m.finish(
        "model_cross_check",
        format!("shooting vs extrapolated FD, worst relative gap {worst:.2e} (mesh {})", cfg.mesh),
    ))
}

fn central_minimal(cfg: &RunConfig) -> Result<SuiteResult, CliError> {
    let tol = cfg.solver_tolerance();
    let mut m = Margin::new();
    for n in [2u32, 3, 5] {
        for delta in [FRAC_PI_2, 2.0] {
            let r = check_central_minimal(1.0, n, delta, 9, tol)?;
            for &(a, l) in &r.samples {
                let shortfall = (r.central_value - l) / r.central_value;
                m.at_most(shortfall, MONOTONE_SLACK, || format!("n = {n}, δ = {delta}, a = {a}: {l} < {}", r.central_value));
            }
        }
    }
    Ok(m.finish("model_central_minimal", "K = 1, n ∈ {2, 3, 5}, 9-point offset grid".into()))
}

fn diameter_monotone(cfg: &RunConfig) -> Result<SuiteResult, CliError> {
    let tol = cfg.solver_tolerance();
    let grid = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    let mut m = Margin::new();
    for (k, n) in [(1.0, 2u32), (1.0, 3), (1.0, 5), (0.0, 3)] {
        let r = check_diameter_monotone(k, n, &grid, tol)?;
        for w in r.values.windows(2) {
            let rise = (w[1].1 - w[0].1) / w[0].1;
            m.at_most(rise, MONOTONE_SLACK, || format!("K = {k}, n = {n}: λ rises from d = {} to {}", w[0].0, w[1].0));
        }
    }
    Ok(m.finish("model_diameter_monotone", "6-point diameter grid, K ∈ {0, 1}".into()))
}

/// Random inputs with n ∈ [2, 10], K ∈ (0, 1], d ∈ (0.2, 0.9π/√K).
pub fn random_model_inputs(seed: u64, count: usize) -> Vec<BoundInput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=10u32);
            let k = 1.0 - rng.gen::<f64>();
            let hi = 0.9 * PI / k.sqrt();
            let d = 0.2 + (hi - 0.2) * rng.gen::<f64>();
            BoundInput::new(n, k, d).expect("sampled inside the admissible range")
        })
        .collect()
}

pub fn s_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|j| j as f64 / (points + 1) as f64).collect()
}

fn shi_zhang_dominance(cfg: &RunConfig) -> Result<SuiteResult, CliError> {
    let tol = cfg.solver_tolerance();
    let inputs = random_model_inputs(cfg.seed, 50);
    let models: Vec<f64> = inputs
        .par_iter()
        .map(|i| Ok(model_eigenvalue(&ModelProblem::central(i.k_curv, i.n, i.d)?, tol)?))
        .collect::<Result<_, CliError>>()?;
    let slack = cfg.relaxed(1e-7);
    let mut m = Margin::new();
    for (inp, model) in inputs.iter().zip(&models) {
        for s in s_grid(99) {
            let sz = shi_zhang(inp, s)?.value;
            m.at_most((sz - model) / model, slack, || {
                format!("n = {}, K = {}, d = {}, s = {s}: {sz} > model {model}", inp.n, inp.k_curv, inp.d)
            });
        }
    }
    Ok(m.finish("shi_zhang_dominance", format!("50 random inputs (seed {}), 99-point s grid", cfg.seed)))
}

/// Maximum of `4s(1−s)A + sB` over the grid `s = j·10⁻⁶`.
pub fn grid_maximum(input: &BoundInput) -> f64 {
    let a = PI * PI / (input.d * input.d);
    let b = (input.n - 1) as f64 * input.k_curv;
    (1..1_000_000)
        .map(|j| {
            let s = j as f64 * 1e-6;
            4.0 * s * (1.0 - s) * a + s * b
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Random inputs with n ∈ [2, 10], K ∈ [0, 1], d ∈ (0.2, π/√K) (or (0.2, 10) when K = 0).
pub fn random_bound_inputs(seed: u64, count: usize) -> Vec<BoundInput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..count)
        .map(|j| {
            let n = rng.gen_range(2..=10u32);
            let k = if j % 10 == 0 { 0.0 } else { rng.gen::<f64>() };
            let hi = if k > 0.0 { PI / k.sqrt() } else { 10.0 };
            let d = 0.2 + (hi - 0.2) * rng.gen::<f64>();
            BoundInput::new(n, k, d).expect("sampled inside the admissible range")
        })
        .collect()
}

fn optimal_s_suite(cfg: &RunConfig) -> Result<SuiteResult, CliError> {
    let inputs = random_bound_inputs(cfg.seed, 200);
    let maxima: Vec<f64> = inputs.par_iter().map(grid_maximum).collect();
    let mut m = Margin::new();
    let mut interior = 0;
    for (inp, grid_max) in inputs.iter().zip(maxima) {
        let o = optimal_s(inp);
        match o.regime {
            Regime::Interior => {
                interior += 1;
                m.at_most((grid_max - o.bound).abs(), 1e-9, || {
                    format!("n = {}, K = {}, d = {}: grid {grid_max} vs {}", inp.n, inp.k_curv, inp.d, o.bound)
                });
                let (n, k, d) = (inp.n as f64, inp.k_curv, inp.d);
                let expansion =
                    PI * PI / (d * d) + (n - 1.0) * k / 2.0 + (n - 1.0).powi(2) * k * k * d * d / (16.0 * PI * PI);
                m.at_most((expansion - o.bound).abs(), 1e-12 * o.bound, || format!("expansion {expansion} vs {}", o.bound));
            }
            Regime::Boundary => {
                m.at_most(grid_max - o.bound, 1e-9, || format!("boundary supremum {} below grid {grid_max}", o.bound));
            }
        }
    }
    Ok(m.finish(
        "optimal_s_closed_form",
        format!("200 random inputs (seed {}), {interior} interior", cfg.seed),
    ))
}

fn zoo_fidelity(cfg: &RunConfig) -> Result<SuiteResult, CliError> {
    let tol = cfg.solver_tolerance();
    let threshold = cfg.relaxed(1e-6);
    let zoo: Vec<_> = standard_zoo().into_iter().filter(|e| e.reduction.is_some()).collect();
    let results: Vec<(String, f64, f64, f64)> = zoo
        .par_iter()
        .map(|e| {
            let red = e.reduction.expect("filtered");
            let shoot = red.first_eigenvalue(tol)?;
            let fd = solve_neumann_fd_extrapolated(&red.to_problem()?, 2, cfg.mesh)?.eigenvalues[1];
            Ok((e.name.clone(), e.known_lambda1b, shoot, fd))
        })
        .collect::<Result<_, CliError>>()?;
    let mut m = Margin::new();
    let mut worst_fd = 0.0f64;
    for (name, known, shoot, fd) in &results {
        let rel = ((shoot - known) / known).abs();
        worst_fd = worst_fd.max(((fd - known) / known).abs());
        m.at_most(rel, threshold, || format!("{name}: {shoot} vs {known}"));
    }
    Ok(m.finish(
        "zoo_reduction_fidelity",
        format!("{} reductions; FD oracle worst relative error {worst_fd:.1e}", results.len()),
    ))
}

fn zoo_soundness(cfg: &RunConfig) -> Result<SuiteResult, CliError> {
    let tol = cfg.solver_tolerance();
    let zoo = standard_zoo();
    let bounds: Vec<_> = zoo
        .par_iter()
        .map(|e| Ok(e.bounds(tol)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut m = Margin::new();
    for (e, list) in zoo.iter().zip(&bounds) {
        for b in list.iter().filter(|b| b.valid) {
            // the model value is only as accurate as the solver tolerance
            let slack = if b.name == BoundName::Model && cfg.tolerance > 1e-9 {
                cfg.tolerance * e.known_lambda1b
            } else {
                1e-9
            };
            m.at_most(b.value - e.known_lambda1b, slack, || {
                format!("{}: {} = {} exceeds {}", e.name, b.name, b.value, e.known_lambda1b)
            });
        }
        let zy = zhong_yang(&e.bound_input()?).value;
        let equal = (zy - e.known_lambda1b).abs() <= 1e-9;
        let torus = e.name.starts_with("mapping_torus");
        m.holds(equal == torus, || {
            format!("{}: Zhong–Yang equality is {equal} but mapping torus is {torus}", e.name)
        });
        if e.name.starts_with("hopf") {
            let top = list[0].value;
            m.holds(top < e.known_lambda1b, || format!("{}: top bound {top} not strict", e.name));
        }
    }
    Ok(m.finish("zoo_bound_soundness", format!("{} fixtures; equality only on mapping tori", zoo.len())))
}

fn zoo_inequalities(_: &RunConfig) -> Result<SuiteResult, CliError> {
    let grid = s_grid(99);
    let mut m = Margin::new();
    for n_complex in 1..=3 {
        let r = verify_hopf_inequality(n_complex, &grid)?;
        m.at_most(-r.min_margin, 1e-12, || format!("Hopf m = {n_complex} fails at s = {}", r.worst_s));
    }
    for e in standard_zoo() {
        if let Some(mult) = e.multiplicity_data {
            let r = verify_isoparametric_inequality(mult.g, e.ambient_dim, &grid)?;
            m.at_most(-r.min_margin, 1e-12, || format!("{} fails at s = {}", e.name, r.worst_s));
        }
    }
    Ok(m.finish("zoo_inequalities", "Hopf and isoparametric forms on a 99-point s grid".into()))
}

fn rigidity(_: &RunConfig) -> Result<SuiteResult, CliError> {
    let mut m = Margin::new();
    for (lambda, points) in [(1.0, 101), (4.0, 1001), (9.0, 1001), (PI * PI, 1001)] {
        let r = rigidity_certificate(lambda, points)?;
        m.at_most(r.max_deviation, 1e-9, || format!("λ = {lambda}: deviation {:e}", r.max_deviation));
    }
    let norm = Normalization::new(1.0, 0.0)?;
    let thetas: Vec<f64> = (0..101).map(|j| -1.5 + 3.0 * j as f64 / 100.0).collect();
    for lambda in [1.0, 4.0, PI * PI] {
        let r = gradient_estimate_check(lambda, &norm, &thetas)?;
        m.at_most(r.max_deviation, 1e-9, || format!("θ-grid, λ = {lambda}: deviation {:e}", r.max_deviation));
    }
    let control = rigidity_certificate_shifted(1.0, 101, 0.01)?;
    m.holds(!control.holds && control.max_deviation > 1e-3, || {
        "shifted profile was certified rigid".into()
    });
    Ok(m.finish("rigidity_certificates", "|∇θ|² = λ saturated; shifted profile rejected".into()))
}
