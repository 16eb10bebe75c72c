//! Finite-difference oracle.
//!
//! The drift operator is written in flux form `(p v')' / p` with
//! `p = exp(∫F)` and discretised on a vertex-centred grid, which gives a
//! symmetric generalised problem `K v = λ W v`. At a regular end the half cell
//! carries a zero flux (the ghost-point closure `v_{-1} = v_1`); at a singular
//! end `p ~ t^m` is integrated exactly over the half cell, which reproduces the
//! Frobenius condition `(m + 1) v''(0) = -λ v(0)`.

use super::tridiag::SymTridiagonal;
use super::{check_count, EndpointKind, Method, SLProblem, SlError, SpectrumResult, MIN_MESH};

// 5-point Gauss–Legendre on [-1, 1]
const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

fn gl5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    GL5_X
        .iter()
        .zip(GL5_W.iter())
        .map(|(x, w)| w * f(c + r * x))
        .sum::<f64>()
        * r
}

struct Discretisation {
    grid: Vec<f64>,
    /// `K v = λ W v` stored as the symmetric matrix `W^{-1/2} K W^{-1/2}`.
    matrix: SymTridiagonal,
    /// Flux coefficients `p_{i+1/2} / h`.
    flux: Vec<f64>,
    weight: Vec<f64>,
}

impl Discretisation {
    fn build(problem: &SLProblem, mesh: usize) -> Result<Self, SlError> {
        let a = problem.left();
        let b = problem.right();
        let n = mesh;
        let h = (b - a) / n as f64;
        let grid: Vec<f64> = (0..=n)
            .map(|i| if i == n { b } else { a + h * i as f64 })
            .collect();

        let poles: Vec<(f64, f64)> = [
            (a, problem.left_end().multiplicity()),
            (b, problem.right_end().multiplicity()),
        ]
        .into_iter()
        .filter_map(|(e, m)| m.map(|m| (e, m)))
        .collect();
        let log_pole = |x: f64| -> f64 { poles.iter().map(|(e, m)| m * (x - e).abs().ln()).sum() };

        // smooth part G = ∫ (F - Σ m/(x-e)) at nodes and half nodes
        let freg = |x: f64| problem.regular_drift(x);
        let mut g_node = vec![0.0; n + 1];
        let mut g_half = vec![0.0; n];
        for i in 0..n {
            let xm = 0.5 * (grid[i] + grid[i + 1]);
            g_half[i] = g_node[i] + gl5(freg, grid[i], xm);
            g_node[i + 1] = g_half[i] + gl5(freg, xm, grid[i + 1]);
        }
        if g_node.iter().any(|g| !g.is_finite()) {
            return Err(SlError::InvalidProblem(
                "drift is not integrable on the open interval".into(),
            ));
        }

        let log_flux: Vec<f64> = (0..n)
            .map(|i| g_half[i] + log_pole(0.5 * (grid[i] + grid[i + 1])) - h.ln())
            .collect();

        let cell_log_integral = |lo: f64, hi: f64| -> f64 { gl5(|x| log_pole(x).exp(), lo, hi).ln() };
        let mut log_weight = vec![0.0; n + 1];
        for i in 0..=n {
            let lo = if i == 0 { grid[0] } else { 0.5 * (grid[i - 1] + grid[i]) };
            let hi = if i == n { grid[n] } else { 0.5 * (grid[i] + grid[i + 1]) };
            let end = if i == 0 {
                Some((problem.left_end(), a, hi))
            } else if i == n {
                Some((problem.right_end(), b, lo))
            } else {
                None
            };
            let log_int = match end {
                Some((EndpointKind::SingularPole { multiplicity: m }, e, other)) => {
                    // ∫_0^{h/2} t^m dt times the remaining pole factors near the end
                    let half = (other - e).abs();
                    let probe = e + 0.5 * (other - e);
                    let others: f64 = poles
                        .iter()
                        .filter(|(pe, _)| *pe != e)
                        .map(|(pe, pm)| pm * (probe - pe).abs().ln())
                        .sum();
                    others + (m + 1.0) * half.ln() - (m + 1.0).ln()
                }
                _ => cell_log_integral(lo, hi),
            };
            log_weight[i] = g_node[i] + log_int;
        }

        let offset = log_flux.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let flux: Vec<f64> = log_flux.iter().map(|l| (l - offset).exp()).collect();
        let weight: Vec<f64> = log_weight.iter().map(|l| (l - offset).exp()).collect();
        if flux.iter().chain(weight.iter()).any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(SlError::NonConvergence(
                "degenerate finite-difference coefficients (mesh too coarse near a pole?)".into(),
            ));
        }

        let diag: Vec<f64> = (0..=n)
            .map(|i| {
                let left = if i > 0 { flux[i - 1] } else { 0.0 };
                let right = if i < n { flux[i] } else { 0.0 };
                (left + right) / weight[i]
            })
            .collect();
        let off: Vec<f64> = (0..n)
            .map(|i| -flux[i] / (weight[i] * weight[i + 1]).sqrt())
            .collect();

        Ok(Self {
            grid,
            matrix: SymTridiagonal::new(diag, off),
            flux,
            weight,
        })
    }

    /// `max_i |(K v)_i / W_i - λ v_i|` over interior nodes.
    fn residual(&self, v: &[f64], lambda: f64) -> f64 {
        let n = self.grid.len() - 1;
        (1..n)
            .map(|i| {
                let kv = self.flux[i - 1] * (v[i] - v[i - 1]) - self.flux[i] * (v[i + 1] - v[i]);
                (kv / self.weight[i] - lambda * v[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn normalise_samples(v: &mut [f64]) {
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return;
    }
    let first = v.iter().copied().find(|x| x.abs() > 1e-8 * peak).unwrap_or(1.0);
    let s = first.signum() / peak;
    v.iter_mut().for_each(|x| *x *= s);
}

/// Smallest `count` eigenvalues of the finite-difference discretisation on `mesh` cells.
pub fn solve_neumann_fd(
    problem: &SLProblem,
    count: usize,
    mesh: usize,
) -> Result<SpectrumResult, SlError> {
    problem.validate()?;
    check_count(count)?;
    if mesh < MIN_MESH {
        return Err(SlError::InvalidArgument(format!(
            "mesh must be at least {MIN_MESH}, got {mesh}"
        )));
    }
    let disc = Discretisation::build(problem, mesh)?;
    let eigenvalues = disc.matrix.smallest_eigenvalues(count)?;
    for w in eigenvalues.windows(2) {
        if w[1] < w[0] {
            return Err(SlError::NonConvergence("eigenvalues out of order".into()));
        }
    }

    let mut samples = Vec::with_capacity(count);
    let mut residual = 0.0f64;
    for &lambda in &eigenvalues {
        let u = disc.matrix.eigenvector(lambda)?;
        let mut v: Vec<f64> = u
            .iter()
            .zip(&disc.weight)
            .map(|(u, w)| u / w.sqrt())
            .collect();
        normalise_samples(&mut v);
        residual = residual.max(disc.residual(&v, lambda));
        samples.push(disc.grid.iter().copied().zip(v).collect());
    }

    Ok(SpectrumResult {
        eigenvalues,
        eigenfunction_samples: samples,
        method: Method::FiniteDifference,
        residual,
        mesh_size: mesh,
    })
}

/// Finite-difference eigenvalues on `mesh` and `2·mesh` cells plus their
/// Richardson extrapolation `(4 λ_fine - λ_coarse) / 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolated {
    pub coarse: SpectrumResult,
    pub fine: SpectrumResult,
    pub eigenvalues: Vec<f64>,
}

pub fn solve_neumann_fd_extrapolated(
    problem: &SLProblem,
    count: usize,
    mesh: usize,
) -> Result<Extrapolated, SlError> {
    let coarse = solve_neumann_fd(problem, count, mesh)?;
    let fine = solve_neumann_fd(problem, count, 2 * mesh)?;
    let eigenvalues = coarse
        .eigenvalues
        .iter()
        .zip(&fine.eigenvalues)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    Ok(Extrapolated {
        coarse,
        fine,
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cot_sphere(n: f64) -> SLProblem {
        SLProblem::new(0.0, PI, move |x: f64| (n - 1.0) / x.tan())
            .unwrap()
            .with_endpoints(EndpointKind::pole(n - 1.0), EndpointKind::pole(n - 1.0))
    }

    #[test]
    fn free_problem_spectrum() {
        let p = SLProblem::free(0.0, PI).unwrap();
        let r = solve_neumann_fd(&p, 2, 1024).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-9);
        assert!((r.eigenvalues[1] - 1.0).abs() < 1e-5);
        let e = solve_neumann_fd_extrapolated(&p, 3, 1024).unwrap();
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-9);
        assert!((e.eigenvalues[2] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn two_sphere_radial_problem() {
        let r = solve_neumann_fd_extrapolated(&cot_sphere(2.0), 2, 2048).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-8);
        assert!((r.eigenvalues[1] - 2.0).abs() < 1e-7, "{:?}", r.eigenvalues);
    }

    #[test]
    fn clifford_type_problem() {
        let p = SLProblem::new(0.0, FRAC_PI_2, |x: f64| 1.0 / x.tan() - x.tan())
            .unwrap()
            .with_endpoints(EndpointKind::pole(1.0), EndpointKind::pole(1.0));
        let r = solve_neumann_fd_extrapolated(&p, 2, 2048).unwrap();
        assert!((r.eigenvalues[1] - 8.0).abs() < 1e-6, "{:?}", r.eigenvalues);
    }

    #[test]
    fn high_multiplicity_poles_stay_real() {
        // m = 4 would break a symmetrised centred-drift stencil near the poles
        let r = solve_neumann_fd_extrapolated(&cot_sphere(5.0), 3, 2048).unwrap();
        assert!((r.eigenvalues[1] - 5.0).abs() < 1e-6, "{:?}", r.eigenvalues);
        assert!((r.eigenvalues[2] - 12.0).abs() < 1e-5, "{:?}", r.eigenvalues);
    }

    #[test]
    fn second_order_convergence() {
        let p = cot_sphere(3.0);
        let exact = 3.0;
        let e1 = (solve_neumann_fd(&p, 2, 256).unwrap().eigenvalues[1] - exact).abs();
        let e2 = (solve_neumann_fd(&p, 2, 512).unwrap().eigenvalues[1] - exact).abs();
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn samples_are_normalised_with_small_residual() {
        let r = solve_neumann_fd(&cot_sphere(2.0), 3, 512).unwrap();
        for s in &r.eigenfunction_samples {
            let peak = s.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
            assert!((peak - 1.0).abs() < 1e-12);
            assert_eq!(s.len(), 513);
        }
        assert!(r.residual < 1e-6, "residual {}", r.residual);
        // constant mode
        assert!(r.eigenfunction_samples[0].iter().all(|(_, v)| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn argument_checks() {
        let p = SLProblem::free(0.0, 1.0).unwrap();
        assert!(solve_neumann_fd(&p, 2, 32).is_err());
        assert!(solve_neumann_fd(&p, 0, 128).is_err());
        assert!(solve_neumann_fd(&p, 11, 128).is_err());
    }
}
