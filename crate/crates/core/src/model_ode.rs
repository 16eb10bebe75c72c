//! The one-dimensional comparison model
//! `v'' − (n−1)√K tan(√K x) v' = −λ v` on `[a, a+δ]` with Neumann ends.
//!
//! λ(K, n, δ, a) is computed on the rescaled interval `√K·[a, a+δ]` with
//! `K = 1` and multiplied back by `K`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sl_engine::{
    solve_neumann_fd_extrapolated, solve_neumann_shooting_with, SLProblem, ShootingOptions,
    SlError,
};

/// Intervals closer than this to a tan pole are rejected.
pub const POLE_GUARD: f64 = 1e-9;
/// Within this (rescaled) distance of a pole the integrator tolerance is tightened 100×.
pub const NEAR_POLE: f64 = 1e-4;
/// Relative slack of the monotonicity checks.
pub const MONOTONE_SLACK: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Solver(#[from] SlError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelProblem {
    /// Curvature constant K ≥ 0 (Ricci ≥ (n−1)K).
    #[serde(rename = "K")]
    pub k: f64,
    pub n: u32,
    /// Left endpoint a.
    pub a: f64,
    /// Interval length δ.
    pub delta: f64,
}

impl ModelProblem {
    pub fn new(k: f64, n: u32, a: f64, delta: f64) -> Result<Self, ModelError> {
        let p = Self { k, n, a, delta };
        p.validate()?;
        Ok(p)
    }

    /// The interval centred at the origin, `a = −δ/2`.
    pub fn central(k: f64, n: u32, delta: f64) -> Result<Self, ModelError> {
        Self::new(k, n, -delta / 2.0, delta)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(ModelError::Domain(format!("K must be finite and >= 0, got {}", self.k)));
        }
        if self.n < 2 {
            return Err(ModelError::Domain(format!("n must be >= 2, got {}", self.n)));
        }
        if !(self.delta.is_finite() && self.delta > 0.0 && self.a.is_finite()) {
            return Err(ModelError::Domain(format!(
                "need finite a and δ > 0, got a = {}, δ = {}",
                self.a, self.delta
            )));
        }
        if self.k > 0.0 {
            let pole = FRAC_PI_2 / self.k.sqrt();
            let lo = self.a;
            let hi = self.a + self.delta;
            if lo <= -pole + POLE_GUARD || hi >= pole - POLE_GUARD {
                return Err(ModelError::Domain(format!(
                    "interval [{lo}, {hi}] reaches a tan pole at ±{pole}"
                )));
            }
        }
        Ok(())
    }

    /// Distance of the rescaled interval from the nearest pole (∞ when K = 0).
    fn pole_clearance(&self) -> f64 {
        if self.k == 0.0 {
            return f64::INFINITY;
        }
        let s = self.k.sqrt();
        let lo = s * self.a;
        let hi = s * (self.a + self.delta);
        (lo + FRAC_PI_2).min(FRAC_PI_2 - hi)
    }

    /// The rescaled drift problem whose gap times `K` is λ (or the free
    /// problem when `K = 0`).
    pub fn to_sl_problem(&self) -> Result<SLProblem, ModelError> {
        self.validate()?;
        if self.k == 0.0 {
            return Ok(SLProblem::free(self.a, self.a + self.delta)?);
        }
        let s = self.k.sqrt();
        let m = (self.n - 1) as f64;
        Ok(SLProblem::new(s * self.a, s * (self.a + self.delta), move |x: f64| -m * x.tan())?
            .with_drift_derivative(move |x: f64| {
                let c = x.cos();
                -m / (c * c)
            }))
    }

    fn scale(&self) -> f64 {
        if self.k == 0.0 {
            1.0
        } else {
            self.k
        }
    }

    fn shooting_options(&self, tol: f64) -> ShootingOptions {
        let mut opts = ShootingOptions::new(tol);
        if self.pole_clearance() < NEAR_POLE {
            opts.integrator_tol = Some((tol / 1000.0).max(1e-14));
        }
        opts
    }
}

/// First nonzero Neumann eigenvalue λ(K, n, δ, a) by shooting.
pub fn model_eigenvalue(problem: &ModelProblem, tol: f64) -> Result<f64, ModelError> {
    let sl = problem.to_sl_problem()?;
    let r = solve_neumann_shooting_with(&sl, 2, &problem.shooting_options(tol))?;
    Ok(problem.scale() * r.eigenvalues[1])
}

/// Shooting value together with the Richardson-extrapolated finite-difference value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossChecked {
    pub shooting: f64,
    pub finite_difference: f64,
    pub relative_gap: f64,
    pub mesh: usize,
    pub residual: f64,
}

pub fn model_eigenvalue_checked(
    problem: &ModelProblem,
    tol: f64,
    mesh: usize,
) -> Result<CrossChecked, ModelError> {
    let sl = problem.to_sl_problem()?;
    let shoot = solve_neumann_shooting_with(&sl, 2, &problem.shooting_options(tol))?;
    let fd = solve_neumann_fd_extrapolated(&sl, 2, mesh)?;
    let scale = problem.scale();
    let shooting = scale * shoot.eigenvalues[1];
    let finite_difference = scale * fd.eigenvalues[1];
    Ok(CrossChecked {
        shooting,
        finite_difference,
        relative_gap: ((shooting - finite_difference) / shooting).abs(),
        mesh: 2 * mesh,
        residual: shoot.residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralMinimalReport {
    pub holds: bool,
    pub central_value: f64,
    /// `(a, λ(K, n, δ, a))` for every sampled left endpoint.
    pub samples: Vec<(f64, f64)>,
    pub violations: Vec<(f64, f64)>,
}

/// Left endpoints spanning 90% of the admissible range symmetrically about −δ/2.
pub fn admissible_offsets(k: f64, delta: f64, grid: usize) -> Vec<f64> {
    let centre = -delta / 2.0;
    let half = if k > 0.0 {
        0.9 * (FRAC_PI_2 / k.sqrt() - delta / 2.0)
    } else {
        delta
    };
    (0..grid)
        .map(|j| {
            let s = if grid == 1 {
                0.0
            } else {
                2.0 * j as f64 / (grid - 1) as f64 - 1.0
            };
            centre + half * s
        })
        .collect()
}

/// Checks λ(K, n, δ, a) ≥ λ(K, n, δ, −δ/2) on a symmetric grid of left endpoints.
pub fn check_central_minimal(
    k: f64,
    n: u32,
    delta: f64,
    grid: usize,
    tol: f64,
) -> Result<CentralMinimalReport, ModelError> {
    if !(k > 0.0) {
        return Err(ModelError::Domain(format!("central minimality needs K > 0, got {k}")));
    }
    if !(delta > 0.0 && delta < PI / k.sqrt()) {
        return Err(ModelError::Domain(format!(
            "δ must lie in (0, π/√K), got {delta}"
        )));
    }
    if grid < 8 {
        return Err(ModelError::Domain(format!("grid needs at least 8 points, got {grid}")));
    }
    let central_value = model_eigenvalue(&ModelProblem::central(k, n, delta)?, tol)?;
    let samples: Vec<(f64, f64)> = admissible_offsets(k, delta, grid)
        .into_par_iter()
        .map(|a| {
            let lam = if (a + delta / 2.0).abs() < 1e-15 {
                central_value
            } else {
                model_eigenvalue(&ModelProblem::new(k, n, a, delta)?, tol)?
            };
            Ok((a, lam))
        })
        .collect::<Result<_, ModelError>>()?;
    let floor = central_value * (1.0 - MONOTONE_SLACK);
    let violations: Vec<(f64, f64)> = samples.iter().copied().filter(|&(_, l)| l < floor).collect();
    Ok(CentralMinimalReport {
        holds: violations.is_empty(),
        central_value,
        samples,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub holds: bool,
    /// `(d, λ(K, n, d, −d/2))`
    pub values: Vec<(f64, f64)>,
    /// Consecutive pairs `(d_i, d_{i+1})` where λ increased beyond the slack.
    pub violations: Vec<(f64, f64)>,
}

/// Checks that d ↦ λ(K, n, d, −d/2) is non-increasing along `d_grid`.
pub fn check_diameter_monotone(
    k: f64,
    n: u32,
    d_grid: &[f64],
    tol: f64,
) -> Result<MonotoneReport, ModelError> {
    if d_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ModelError::Domain("d_grid must be strictly ascending".into()));
    }
    let values: Vec<(f64, f64)> = d_grid
        .par_iter()
        .map(|&d| Ok((d, model_eigenvalue(&ModelProblem::central(k, n, d)?, tol)?)))
        .collect::<Result<_, ModelError>>()?;
    let violations = values
        .windows(2)
        .filter(|w| w[1].1 > w[0].1 * (1.0 + MONOTONE_SLACK))
        .map(|w| (w[0].0, w[1].0))
        .collect::<Vec<_>>();
    Ok(MonotoneReport {
        holds: violations.is_empty(),
        values,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-11;

    #[test]
    fn flat_model_is_free_problem() {
        let l = model_eigenvalue(&ModelProblem::new(0.0, 4, 0.0, PI).unwrap(), TOL).unwrap();
        assert!((l - 1.0).abs() < 1e-9);
        for &d in &[0.5, 1.0, 2.0, 3.0] {
            let l = model_eigenvalue(&ModelProblem::new(0.0, 3, 0.3, d).unwrap(), TOL).unwrap();
            let exact = PI * PI / (d * d);
            assert!(((l - exact) / exact).abs() < 1e-8, "δ = {d}");
        }
    }

    #[test]
    fn pole_guard() {
        assert!(ModelProblem::new(1.0, 3, -FRAC_PI_2, PI).is_err());
        assert!(ModelProblem::new(1.0, 3, -1.0, 2.6).is_err());
        assert!(ModelProblem::new(4.0, 3, -0.8, 1.0).is_err());
        assert!(ModelProblem::new(4.0, 3, -0.4, 0.8).is_ok());
        assert!(ModelProblem::new(-1.0, 3, 0.0, 1.0).is_err());
        assert!(ModelProblem::new(1.0, 1, 0.0, 1.0).is_err());
    }

    #[test]
    fn curvature_scaling() {
        // λ(K, n, δ, a) = K λ(1, n, √K δ, √K a)
        let base = model_eigenvalue(&ModelProblem::new(1.0, 4, -0.6, 1.0).unwrap(), TOL).unwrap();
        let scaled = model_eigenvalue(&ModelProblem::new(4.0, 4, -0.3, 0.5).unwrap(), TOL).unwrap();
        assert!(((scaled - 4.0 * base) / scaled).abs() < 1e-12);
    }

    #[test]
    fn reflection_symmetry() {
        let (a, d) = (-0.9, 1.3);
        let l1 = model_eigenvalue(&ModelProblem::new(1.0, 3, a, d).unwrap(), TOL).unwrap();
        let l2 = model_eigenvalue(&ModelProblem::new(1.0, 3, -a - d, d).unwrap(), TOL).unwrap();
        assert!(((l1 - l2) / l1).abs() < 1e-9);
    }

    #[test]
    fn near_full_interval_approaches_lichnerowicz() {
        let eps = 1e-4 * PI;
        let d = PI - 2.0 * eps;
        let l = model_eigenvalue(&ModelProblem::central(1.0, 3, d).unwrap(), 1e-10).unwrap();
        assert!((l - 3.0).abs() < 1e-3, "{l}");
    }

    #[test]
    fn offsets_are_symmetric_and_admissible() {
        let a = admissible_offsets(1.0, FRAC_PI_2, 9);
        assert_eq!(a.len(), 9);
        assert!((a[4] + FRAC_PI_4_F).abs() < 1e-15);
        for &x in &a {
            assert!(ModelProblem::new(1.0, 3, x, FRAC_PI_2).is_ok());
        }
    }
    const FRAC_PI_4_F: f64 = std::f64::consts::FRAC_PI_4;

    #[test]
    fn monotone_single_point_is_vacuous() {
        let r = check_diameter_monotone(1.0, 3, &[1.0], TOL).unwrap();
        assert!(r.holds);
        assert!(check_diameter_monotone(1.0, 3, &[2.0, 1.0], TOL).is_err());
    }
}
