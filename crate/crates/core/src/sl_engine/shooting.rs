//! Prüfer-phase shooting.
//!
//! With `v = r sin φ`, `v' = r cos φ` the drift equation becomes
//! `φ' = cos²φ + F sinφ cosφ + λ sin²φ`. A Neumann end means `φ ≡ π/2 (mod π)`.
//! The phase is integrated from both ends towards the midpoint `c`; mode `k`
//! is the root of `D(λ) - kπ` with `D = φ_left(c) - φ_right(c)`. Both lattices
//! `φ ∈ πZ` and `φ ∈ π/2 + πZ` are crossed upward only, so `D - kπ` changes
//! sign exactly once as λ increases (same ordering as the self-adjoint Prüfer
//! angle, which is monotone in λ).

use std::f64::consts::{FRAC_PI_2, PI};

use super::rk45::{Stepper, Tolerance};
use super::{
    check_count, frobenius_start, EndpointKind, Method, SLProblem, SlError, SpectrumResult,
};

/// Relative offset of the first integration point from a singular end.
const FROBENIUS_OFFSET: f64 = 1e-6;
/// Tolerance for the eigenfunction sampling pass, independent of `tol`.
const SAMPLING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Relative accuracy target for the eigenvalues.
    pub tol: f64,
    /// Integrator absolute/relative tolerance; defaults to `tol / 10`.
    pub integrator_tol: Option<f64>,
    /// Subdivisions of the initial eigenvalue window.
    pub scan_subdivisions: usize,
    /// The scan continues past the initial window up to this many windows.
    pub max_windows: usize,
    /// Intervals of the uniform eigenfunction sample grid (even).
    pub sample_intervals: usize,
}

impl ShootingOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            integrator_tol: None,
            scan_subdivisions: 200,
            max_windows: 64,
            sample_intervals: 512,
        }
    }

    fn integrator(&self) -> Tolerance {
        Tolerance::uniform(self.integrator_tol.unwrap_or(self.tol / 10.0))
    }
}

pub fn solve_neumann_shooting(
    problem: &SLProblem,
    count: usize,
    tol: f64,
) -> Result<SpectrumResult, SlError> {
    solve_neumann_shooting_with(problem, count, &ShootingOptions::new(tol))
}

pub fn solve_neumann_shooting_with(
    problem: &SLProblem,
    count: usize,
    opts: &ShootingOptions,
) -> Result<SpectrumResult, SlError> {
    problem.validate()?;
    check_count(count)?;
    if !(1e-12..=1e-6).contains(&opts.tol) {
        return Err(SlError::InvalidArgument(format!(
            "shooting tolerance must lie in [1e-12, 1e-6], got {}",
            opts.tol
        )));
    }
    if opts.sample_intervals < 8 || opts.sample_intervals % 2 != 0 || opts.scan_subdivisions == 0 {
        return Err(SlError::InvalidArgument(
            "sample_intervals must be even and >= 8; scan_subdivisions > 0".into(),
        ));
    }

    let shooter = Shooter::new(problem, opts.integrator());
    let mut eigenvalues = vec![0.0];
    if count > 1 {
        let brackets = shooter.scan(count - 1, opts)?;
        for (k, (lo, hi)) in brackets.into_iter().enumerate() {
            eigenvalues.push(shooter.refine(k + 1, lo, hi, opts.tol)?);
        }
    }

    let sampler = Shooter::new(problem, Tolerance::uniform(SAMPLING_TOL.min(opts.tol / 10.0)));
    let mut samples = Vec::with_capacity(count);
    let mut residual = 0.0f64;
    for &lambda in &eigenvalues {
        let (s, r) = sampler.sample(lambda, opts.sample_intervals)?;
        residual = residual.max(r);
        samples.push(s);
    }

    Ok(SpectrumResult {
        eigenvalues,
        eigenfunction_samples: samples,
        method: Method::Shooting,
        residual,
        mesh_size: opts.sample_intervals,
    })
}

struct Shooter<'a> {
    problem: &'a SLProblem,
    tol: Tolerance,
    mid: f64,
    offset: f64,
}

/// Start of an integration branch: position, `(v, v')`, and suggested first step.
struct Start {
    x: f64,
    v: f64,
    dv: f64,
    h0: f64,
}

impl<'a> Shooter<'a> {
    fn new(problem: &'a SLProblem, tol: Tolerance) -> Self {
        let offset = FROBENIUS_OFFSET * problem.length();
        Self {
            problem,
            tol,
            mid: 0.5 * (problem.left() + problem.right()),
            offset,
        }
    }

    fn left_start(&self, lambda: f64) -> Start {
        let len = self.problem.length();
        match self.problem.left_end() {
            EndpointKind::NeumannRegular => Start {
                x: self.problem.left(),
                v: 1.0,
                dv: 0.0,
                h0: 1e-4 * len,
            },
            EndpointKind::SingularPole { multiplicity } => {
                let (v, dv) = frobenius_start(lambda, multiplicity, self.offset);
                Start {
                    x: self.problem.left() + self.offset,
                    v,
                    dv,
                    h0: self.offset,
                }
            }
        }
    }

    fn right_start(&self, lambda: f64) -> Start {
        let len = self.problem.length();
        match self.problem.right_end() {
            EndpointKind::NeumannRegular => Start {
                x: self.problem.right(),
                v: 1.0,
                dv: 0.0,
                h0: 1e-4 * len,
            },
            EndpointKind::SingularPole { multiplicity } => {
                let (v, dvdt) = frobenius_start(lambda, multiplicity, self.offset);
                Start {
                    x: self.problem.right() - self.offset,
                    v,
                    dv: -dvdt,
                    h0: self.offset,
                }
            }
        }
    }

    fn phase(&self, start: &Start, lambda: f64) -> Result<f64, SlError> {
        let problem = self.problem;
        let rhs = |x: f64, y: &[f64; 1]| {
            let (s, c) = y[0].sin_cos();
            [c * c + problem.drift(x) * s * c + lambda * s * s]
        };
        let phi0 = if start.dv == 0.0 {
            FRAC_PI_2
        } else {
            start.v.atan2(start.dv)
        };
        let mut stepper = Stepper::new(self.tol, start.h0);
        Ok(stepper.advance(&rhs, start.x, [phi0], self.mid)?[0])
    }

    /// `D(λ) = φ_left(c) - φ_right(c)`.
    fn mismatch(&self, lambda: f64) -> Result<f64, SlError> {
        let left = self.phase(&self.left_start(lambda), lambda)?;
        let right = self.phase(&self.right_start(lambda), lambda)?;
        Ok(left - right)
    }

    /// Brackets for modes `1..=modes`.
    fn scan(&self, modes: usize, opts: &ShootingOptions) -> Result<Vec<(f64, f64)>, SlError> {
        let len = self.problem.length();
        let base = (PI / len).powi(2);
        let window = 4.0 * base * (1.0 + self.problem.max_abs_drift_derivative() * len * len);
        let step = window / opts.scan_subdivisions as f64;
        let max_steps = opts.scan_subdivisions * opts.max_windows;

        let mut brackets: Vec<Option<(f64, f64)>> = vec![None; modes];
        let mut prev = 0.0;
        let mut found = 0;
        for j in 1..=max_steps {
            let lambda = step * j as f64;
            let d = self.mismatch(lambda)?;
            for (k, slot) in brackets.iter_mut().enumerate() {
                if slot.is_none() && d > (k + 1) as f64 * PI {
                    *slot = Some((prev, lambda));
                    found += 1;
                }
            }
            if found == modes {
                return Ok(brackets.into_iter().map(|b| b.unwrap()).collect());
            }
            prev = lambda;
        }
        let mode = brackets.iter().position(|b| b.is_none()).unwrap_or(0) + 1;
        Err(SlError::BracketFailure {
            mode,
            searched_to: step * max_steps as f64,
        })
    }

    /// Illinois regula falsi on `D(λ) - kπ` inside `[lo, hi]`.
    fn refine(&self, k: usize, lo: f64, hi: f64, tol: f64) -> Result<f64, SlError> {
        let target = k as f64 * PI;
        let g = |lam: f64| self.mismatch(lam).map(|d| d - target);
        let (mut a, mut b) = (lo, hi);
        let mut ga = if a == 0.0 { -target } else { g(a)? };
        let mut gb = g(b)?;
        if !(ga <= 0.0 && gb > 0.0) {
            return Err(SlError::BracketFailure {
                mode: k,
                searched_to: hi,
            });
        }
        let mut side = 0i8;
        for iter in 0..400 {
            let width = b - a;
            if width <= 0.1 * tol * b.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            let mut c = if iter % 8 == 7 {
                0.5 * (a + b)
            } else {
                (a * gb - b * ga) / (gb - ga)
            };
            if !(c > a && c < b) {
                c = 0.5 * (a + b);
            }
            let gc = g(c)?;
            if gc == 0.0 {
                return Ok(c);
            }
            if gc > 0.0 {
                b = c;
                gb = gc;
                if side == 1 {
                    ga *= 0.5;
                }
                side = 1;
            } else {
                a = c;
                ga = gc;
                if side == -1 {
                    gb *= 0.5;
                }
                side = -1;
            }
        }
        Ok(if gb - ga != 0.0 {
            ((a * gb - b * ga) / (gb - ga)).clamp(a, b)
        } else {
            0.5 * (a + b)
        })
    }

    /// Samples the eigenfunction on a uniform grid and returns it with the
    /// interior ODE residual (fourth-order differences of the sampled `v'`).
    fn sample(&self, lambda: f64, intervals: usize) -> Result<(Vec<(f64, f64)>, f64), SlError> {
        let a = self.problem.left();
        let b = self.problem.right();
        let h = (b - a) / intervals as f64;
        let grid: Vec<f64> = (0..=intervals)
            .map(|i| if i == intervals { b } else { a + h * i as f64 })
            .collect();
        let half = intervals / 2;
        let problem = self.problem;
        let rhs = |x: f64, y: &[f64; 2]| [y[1], -problem.drift(x) * y[1] - lambda * y[0]];

        let mut v = vec![0.0; intervals + 1];
        let mut dv = vec![0.0; intervals + 1];

        let ls = self.left_start(lambda);
        let mut st = Stepper::new(self.tol, ls.h0);
        let (mut x, mut y) = (ls.x, [ls.v, ls.dv]);
        v[0] = 1.0;
        dv[0] = 0.0;
        for i in 1..=half {
            y = st.advance(&rhs, x, y, grid[i])?;
            x = grid[i];
            v[i] = y[0];
            dv[i] = y[1];
        }
        let left_mid = y;

        let rs = self.right_start(lambda);
        let mut st = Stepper::new(self.tol, rs.h0);
        let (mut x, mut y) = (rs.x, [rs.v, rs.dv]);
        let mut right = vec![[1.0, 0.0]; intervals + 1];
        for i in (half..intervals).rev() {
            y = st.advance(&rhs, x, y, grid[i])?;
            x = grid[i];
            right[i] = y;
        }

        // least-squares scale of the right branch onto the left at the midpoint
        let ell2 = if lambda > 0.0 { 1.0 / lambda } else { 1.0 };
        let rm = right[half];
        let denom = rm[0] * rm[0] + ell2 * rm[1] * rm[1];
        let scale = if denom > 0.0 {
            (left_mid[0] * rm[0] + ell2 * left_mid[1] * rm[1]) / denom
        } else {
            1.0
        };
        for i in half + 1..=intervals {
            v[i] = scale * right[i][0];
            dv[i] = scale * right[i][1];
        }

        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(peak > 0.0 && peak.is_finite()) {
            return Err(SlError::StiffIntegration { x: self.mid });
        }
        let first = v.iter().copied().find(|x| x.abs() > 1e-8 * peak).unwrap_or(1.0);
        let norm = first.signum() / peak;
        v.iter_mut().for_each(|x| *x *= norm);
        dv.iter_mut().for_each(|x| *x *= norm);

        let mut residual = 0.0f64;
        for i in 2..=intervals.saturating_sub(2) {
            let d2 = (-dv[i + 2] + 8.0 * dv[i + 1] - 8.0 * dv[i - 1] + dv[i - 2]) / (12.0 * h);
            let r = d2 + problem.drift(grid[i]) * dv[i] + lambda * v[i];
            residual = residual.max(r.abs());
        }

        Ok((grid.into_iter().zip(v).collect(), residual))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_problem_first_modes() {
        let p = SLProblem::free(0.0, PI).unwrap();
        let r = solve_neumann_shooting(&p, 3, 1e-10).unwrap();
        assert_eq!(r.eigenvalues[0], 0.0);
        assert!((r.eigenvalues[1] - 1.0).abs() < 1e-9);
        assert!((r.eigenvalues[2] - 4.0).abs() < 4e-9);
        assert!(r.residual < 1e-6);
    }

    #[test]
    fn sphere_radial_problem_through_poles() {
        let p = SLProblem::new(0.0, PI, |x: f64| 2.0 / x.tan())
            .unwrap()
            .with_endpoints(EndpointKind::pole(2.0), EndpointKind::pole(2.0));
        let r = solve_neumann_shooting(&p, 3, 1e-10).unwrap();
        assert!((r.eigenvalues[1] - 3.0).abs() < 1e-8, "{:?}", r.eigenvalues);
        assert!((r.eigenvalues[2] - 8.0).abs() < 1e-8, "{:?}", r.eigenvalues);
        assert!(r.residual < 1e-6, "residual {}", r.residual);
    }

    #[test]
    fn eigenfunction_matches_closed_form() {
        // cos x for F = cot x
        let p = SLProblem::new(0.0, PI, |x: f64| 1.0 / x.tan())
            .unwrap()
            .with_endpoints(EndpointKind::pole(1.0), EndpointKind::pole(1.0));
        let r = solve_neumann_shooting(&p, 2, 1e-10).unwrap();
        for &(x, v) in &r.eigenfunction_samples[1] {
            assert!((v - x.cos()).abs() < 1e-6, "x = {x}: {v}");
        }
    }

    #[test]
    fn rejects_tolerance_out_of_range() {
        let p = SLProblem::free(0.0, 1.0).unwrap();
        assert!(solve_neumann_shooting(&p, 2, 1e-3).is_err());
        assert!(solve_neumann_shooting(&p, 2, 1e-13).is_err());
    }

    #[test]
    fn scan_window_too_small_reports_bracket_failure() {
        let p = SLProblem::free(0.0, PI).unwrap();
        let mut opts = ShootingOptions::new(1e-8);
        opts.max_windows = 1;
        let err = solve_neumann_shooting_with(&p, 6, &opts).unwrap_err();
        assert!(matches!(err, SlError::BracketFailure { .. }), "{err:?}");
    }
}
