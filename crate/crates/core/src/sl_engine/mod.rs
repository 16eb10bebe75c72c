//! Neumann eigensolver for drift operators `v'' + F(x) v' = -λ v`.
//!
//! Two independent routes are provided: a Prüfer-phase shooting solver
//! ([`solve_neumann_shooting`]) and a finite-difference discretisation solved
//! by Sturm-sequence bisection ([`solve_neumann_fd`]). The second serves as the
//! oracle for the first.

mod fd;
pub(crate) mod rk45;
mod shooting;
mod tridiag;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fd::{solve_neumann_fd, solve_neumann_fd_extrapolated, Extrapolated};
pub use shooting::{solve_neumann_shooting, solve_neumann_shooting_with, ShootingOptions};
pub use tridiag::SymTridiagonal;

/// Largest number of eigenvalues either solver will return.
pub const MAX_COUNT: usize = 10;
/// Smallest accepted finite-difference mesh.
pub const MIN_MESH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid endpoint: {0}")]
    InvalidEndpoint(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("discrete eigensolve did not converge: {0}")]
    NonConvergence(String),
    #[error("no sign change of the shooting mismatch for mode {mode} below λ = {searched_to}")]
    BracketFailure { mode: usize, searched_to: f64 },
    #[error("integrator step underflow near x = {x}")]
    StiffIntegration { x: f64 },
}

pub type Drift = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Behaviour of the drift at an interval end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndpointKind {
    NeumannRegular,
    /// `F(x) ~ m / (x - endpoint)` near the endpoint, `m > 0`.
    SingularPole { multiplicity: f64 },
}

impl EndpointKind {
    pub fn pole(multiplicity: f64) -> Self {
        EndpointKind::SingularPole { multiplicity }
    }

    pub fn multiplicity(&self) -> Option<f64> {
        match *self {
            EndpointKind::NeumannRegular => None,
            EndpointKind::SingularPole { multiplicity } => Some(multiplicity),
        }
    }

    fn validate(&self, side: &str) -> Result<(), SlError> {
        if let EndpointKind::SingularPole { multiplicity } = *self {
            if !(multiplicity.is_finite() && multiplicity > 0.0) {
                return Err(SlError::InvalidEndpoint(format!(
                    "{side} singular endpoint needs a positive finite multiplicity, got {multiplicity}"
                )));
            }
        }
        Ok(())
    }
}

/// `v'' + F(x) v' = -λ v` on `[left, right]` with Neumann conditions at both ends.
#[derive(Clone)]
pub struct SLProblem {
    left: f64,
    right: f64,
    drift: Drift,
    drift_derivative: Option<Drift>,
    left_end: EndpointKind,
    right_end: EndpointKind,
}

impl fmt::Debug for SLProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SLProblem")
            .field("left", &self.left)
            .field("right", &self.right)
            .field("left_end", &self.left_end)
            .field("right_end", &self.right_end)
            .field("has_drift_derivative", &self.drift_derivative.is_some())
            .finish()
    }
}

impl SLProblem {
    /// Problem with regular Neumann ends.
    pub fn new<F>(left: f64, right: f64, drift: F) -> Result<Self, SlError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(left.is_finite() && right.is_finite() && left < right) {
            return Err(SlError::InvalidProblem(format!(
                "interval [{left}, {right}] is empty or not finite"
            )));
        }
        Ok(Self {
            left,
            right,
            drift: Arc::new(drift),
            drift_derivative: None,
            left_end: EndpointKind::NeumannRegular,
            right_end: EndpointKind::NeumannRegular,
        })
    }

    /// Drift-free problem `v'' = -λ v`.
    pub fn free(left: f64, right: f64) -> Result<Self, SlError> {
        Self::new(left, right, |_| 0.0).map(|p| p.with_drift_derivative(|_| 0.0))
    }

    pub fn with_endpoints(mut self, left_end: EndpointKind, right_end: EndpointKind) -> Self {
        self.left_end = left_end;
        self.right_end = right_end;
        self
    }

    pub fn with_drift_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.drift_derivative = Some(Arc::new(derivative));
        self
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }

    pub fn left_end(&self) -> EndpointKind {
        self.left_end
    }

    pub fn right_end(&self) -> EndpointKind {
        self.right_end
    }

    #[inline]
    pub fn drift(&self, x: f64) -> f64 {
        (self.drift)(x)
    }

    pub fn drift_derivative(&self, x: f64) -> f64 {
        match &self.drift_derivative {
            Some(d) => d(x),
            None => {
                let h = 1e-6 * self.length();
                ((self.drift)(x + h) - (self.drift)(x - h)) / (2.0 * h)
            }
        }
    }

    /// Drift with the declared pole terms `m / (x - e)` removed.
    pub(crate) fn regular_drift(&self, x: f64) -> f64 {
        let mut f = self.drift(x);
        if let Some(m) = self.left_end.multiplicity() {
            f -= m / (x - self.left);
        }
        if let Some(m) = self.right_end.multiplicity() {
            f -= m / (x - self.right);
        }
        f
    }

    pub(crate) fn validate(&self) -> Result<(), SlError> {
        self.left_end.validate("left")?;
        self.right_end.validate("right")
    }

    /// Largest `|F'|` over the interior, staying clear of singular ends.
    pub(crate) fn max_abs_drift_derivative(&self) -> f64 {
        let len = self.length();
        let lo = match self.left_end {
            EndpointKind::NeumannRegular => self.left,
            _ => self.left + 0.1 * len,
        };
        let hi = match self.right_end {
            EndpointKind::NeumannRegular => self.right,
            _ => self.right - 0.1 * len,
        };
        let samples = 64;
        (0..=samples)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / samples as f64;
                let x = x.clamp(self.left + 1e-9 * len, self.right - 1e-9 * len);
                self.drift_derivative(x).abs()
            })
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Shooting,
    FiniteDifference,
}

/// Eigenvalues (ascending) with sampled eigenfunctions and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// Per eigenvalue, `(x, v(x))` on a uniform grid with `max |v| = 1`.
    pub eigenfunction_samples: Vec<Vec<(f64, f64)>>,
    pub method: Method,
    /// Largest interior residual `|v'' + F v' + λ v|` over all sampled modes.
    pub residual: f64,
    pub mesh_size: usize,
}

impl SpectrumResult {
    /// First nonzero eigenvalue, if at least two were requested.
    pub fn gap(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }
}

fn check_count(count: usize) -> Result<(), SlError> {
    if count == 0 || count > MAX_COUNT {
        return Err(SlError::InvalidArgument(format!(
            "count must be in 1..={MAX_COUNT}, got {count}"
        )));
    }
    Ok(())
}

/// Frobenius start of the regular solution at distance `t` from a pole of
/// multiplicity `m`: `v ≈ 1 - λ t² / (2(m+1))`, returned with `dv/dt` taken
/// away from the pole.
#[inline]
pub(crate) fn frobenius_start(lambda: f64, m: f64, t: f64) -> (f64, f64) {
    let v = 1.0 - lambda * t * t / (2.0 * (m + 1.0));
    let dv = -lambda * t / (m + 1.0);
    (v, dv)
}
