//! Foliations with known first basic eigenvalue and leaf-space diameter.
//!
//! Codimension-one examples carry the transverse drift problem whose first
//! nonzero Neumann eigenvalue is the basic gap.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{best_bound, shi_zhang, BoundError, BoundInput, BoundResult};
use crate::psi_kernel::{cosine_profile, gradient_profile_check, Normalization, PsiError};
use crate::sl_engine::{solve_neumann_shooting, EndpointKind, SLProblem, SlError};

/// Endpoints of the rigidity grid stay this far from the extrema of u.
pub const RIGIDITY_OFFSET: f64 = 1e-6;
/// Relative tolerance for the saturation `|θ'|² = λ`.
pub const RIGIDITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZooError {
    #[error("invalid multiplicity: {0}")]
    InvalidMultiplicity(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Solver(#[from] SlError),
    #[error(transparent)]
    Psi(#[from] PsiError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftSpec {
    Zero,
    /// `c·cot t`
    Cot { c: f64 },
    /// `c1·cot t − c2·tan t`
    CotMinusTan { c1: f64, c2: f64 },
}

impl DriftSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            DriftSpec::Zero => 0.0,
            DriftSpec::Cot { c } => c / t.tan(),
            DriftSpec::CotMinusTan { c1, c2 } => c1 / t.tan() - c2 * t.tan(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            DriftSpec::Zero => 0.0,
            DriftSpec::Cot { c } => -c / t.sin().powi(2),
            DriftSpec::CotMinusTan { c1, c2 } => -c1 / t.sin().powi(2) - c2 / t.cos().powi(2),
        }
    }
}

/// Serializable description of a transverse drift problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub left: f64,
    pub right: f64,
    pub drift: DriftSpec,
    pub left_end: EndpointKind,
    pub right_end: EndpointKind,
}

impl Reduction {
    pub fn to_problem(&self) -> Result<SLProblem, ZooError> {
        let spec = self.drift;
        Ok(SLProblem::new(self.left, self.right, move |t| spec.eval(t))?
            .with_drift_derivative(move |t| spec.derivative(t))
            .with_endpoints(self.left_end, self.right_end))
    }

    /// First nonzero Neumann eigenvalue by shooting.
    pub fn first_eigenvalue(&self, tol: f64) -> Result<f64, ZooError> {
        Ok(solve_neumann_shooting(&self.to_problem()?, 2, tol)?.eigenvalues[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multiplicities {
    pub g: u32,
    pub m1: u32,
    pub m2: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoliationExample {
    pub name: String,
    pub ambient_dim: u32,
    #[serde(rename = "K_ambient")]
    pub k_ambient: f64,
    #[serde(rename = "known_lambda1B")]
    pub known_lambda1b: f64,
    pub known_diameter: f64,
    pub reduction: Option<Reduction>,
    pub multiplicity_data: Option<Multiplicities>,
}

impl FoliationExample {
    pub fn bound_input(&self) -> Result<BoundInput, ZooError> {
        Ok(BoundInput::new(self.ambient_dim, self.k_ambient, self.known_diameter)?)
    }

    /// Every bound (model included when admissible) for this example's data.
    pub fn bounds(&self, tol: f64) -> Result<Vec<BoundResult>, ZooError> {
        Ok(best_bound(&self.bound_input()?, true, tol)?)
    }
}

/// Hopf circle action on S^{2m+1} with leaf space CP^m.
pub fn hopf_example(n_complex: u32) -> Result<FoliationExample, ZooError> {
    if n_complex < 1 {
        return Err(ZooError::InvalidArgument("n_complex must be >= 1".into()));
    }
    Ok(FoliationExample {
        name: format!("hopf_s{}", 2 * n_complex + 1),
        ambient_dim: 2 * n_complex + 1,
        k_ambient: 1.0,
        known_lambda1b: 2.0 * (2 * n_complex + 2) as f64,
        known_diameter: FRAC_PI_2,
        reduction: None,
        multiplicity_data: None,
    })
}

/// Isoparametric foliation of the unit sphere S^n with `g` principal curvatures.
///
/// For `g = 1` the leaves are geodesic spheres and `m1 = m2 = n − 1` is
/// recorded regardless of the arguments. For `g = 2`, `n = m1 + m2 + 1` is
/// enforced. For `g ∈ {3, 4, 6}` only the closed-form data is produced.
pub fn isoparametric_example(g: u32, n: u32, m1: u32, m2: u32) -> Result<FoliationExample, ZooError> {
    if ![1, 2, 3, 4, 6].contains(&g) {
        return Err(ZooError::InvalidArgument(format!("g must be one of 1, 2, 3, 4, 6, got {g}")));
    }
    if n < 2 {
        return Err(ZooError::InvalidArgument(format!("n must be >= 2, got {n}")));
    }
    let (mult, reduction) = match g {
        1 => {
            let m = (n - 1) as f64;
            let pole = EndpointKind::pole(m);
            let red = Reduction {
                left: 0.0,
                right: PI,
                drift: DriftSpec::Cot { c: m },
                left_end: pole,
                right_end: pole,
            };
            (Multiplicities { g, m1: n - 1, m2: n - 1 }, Some(red))
        }
        2 => {
            if m1 == 0 || m2 == 0 || m1 + m2 + 1 != n {
                return Err(ZooError::InvalidMultiplicity(format!(
                    "g = 2 needs m1, m2 >= 1 with m1 + m2 + 1 = n, got m1 = {m1}, m2 = {m2}, n = {n}"
                )));
            }
            let red = Reduction {
                left: 0.0,
                right: FRAC_PI_2,
                drift: DriftSpec::CotMinusTan { c1: m1 as f64, c2: m2 as f64 },
                left_end: EndpointKind::pole(m1 as f64),
                right_end: EndpointKind::pole(m2 as f64),
            };
            (Multiplicities { g, m1, m2 }, Some(red))
        }
        _ => (Multiplicities { g, m1, m2 }, None),
    };
    Ok(FoliationExample {
        name: format!("isoparametric_g{g}_s{n}_m{}_{}", mult.m1, mult.m2),
        ambient_dim: n,
        k_ambient: 1.0,
        known_lambda1b: (g * (g + n - 1)) as f64,
        known_diameter: PI / g as f64,
        reduction,
        multiplicity_data: Some(mult),
    })
}

/// Flat mapping torus whose leaf space is a circle of circumference 2π/√λ.
///
/// The reduction is the Neumann problem on half the circle, whose spectrum
/// `{k²λ}` coincides with the even part of the periodic one.
pub fn mapping_torus_example(lambda: f64) -> Result<FoliationExample, ZooError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(ZooError::InvalidArgument(format!("λ must be positive, got {lambda}")));
    }
    let d = PI / lambda.sqrt();
    Ok(FoliationExample {
        name: format!("mapping_torus_lambda_{lambda}"),
        ambient_dim: 2,
        k_ambient: 0.0,
        known_lambda1b: lambda,
        known_diameter: d,
        reduction: Some(Reduction {
            left: 0.0,
            right: d,
            drift: DriftSpec::Zero,
            left_end: EndpointKind::NeumannRegular,
            right_end: EndpointKind::NeumannRegular,
        }),
        multiplicity_data: None,
    })
}

/// The fixtures exercised by the verification suites.
pub fn standard_zoo() -> Vec<FoliationExample> {
    let mut zoo = Vec::new();
    for m in 1..=3 {
        zoo.push(hopf_example(m).expect("valid"));
    }
    for n in [2, 3, 5] {
        zoo.push(isoparametric_example(1, n, 0, 0).expect("valid"));
    }
    for (m1, m2) in [(1, 1), (1, 2), (2, 2)] {
        zoo.push(isoparametric_example(2, m1 + m2 + 1, m1, m2).expect("valid"));
    }
    for (g, n, m1, m2) in [(3, 4, 1, 1), (3, 7, 2, 2), (4, 9, 2, 2), (4, 7, 1, 2), (6, 7, 1, 1), (6, 13, 2, 2)] {
        zoo.push(isoparametric_example(g, n, m1, m2).expect("valid"));
    }
    for lambda in [1.0, 4.0, PI * PI] {
        zoo.push(mapping_torus_example(lambda).expect("valid"));
    }
    zoo
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub holds: bool,
    pub min_margin: f64,
    pub worst_s: f64,
}

fn margin_report(s_grid: &[f64], mut margin: impl FnMut(f64) -> f64) -> Result<InequalityReport, ZooError> {
    if s_grid.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(ZooError::InvalidArgument("s grid must lie in (0, 1)".into()));
    }
    let (worst_s, min_margin) = s_grid
        .iter()
        .map(|&s| (s, margin(s)))
        .fold((f64::NAN, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    Ok(InequalityReport {
        holds: min_margin >= -1e-12,
        min_margin,
        worst_s,
    })
}

/// `[1 − 4s(1−s)]g² + (g − s)(n − 1) ≥ 0` on every grid point.
pub fn verify_isoparametric_inequality(g: u32, n: u32, s_grid: &[f64]) -> Result<InequalityReport, ZooError> {
    if g < 1 || n < 2 {
        return Err(ZooError::InvalidArgument(format!("need g >= 1 and n >= 2, got g = {g}, n = {n}")));
    }
    let (g, n) = (g as f64, n as f64);
    margin_report(s_grid, |s| (1.0 - 4.0 * s * (1.0 - s)) * g * g + (g - s) * (n - 1.0))
}

/// `λ₁^B − (4s(1−s)π²/d² + s(n−1)K) ≥ 0` for a Hopf fibration on every grid point.
pub fn verify_hopf_inequality(n_complex: u32, s_grid: &[f64]) -> Result<InequalityReport, ZooError> {
    let ex = hopf_example(n_complex)?;
    let input = ex.bound_input()?;
    let mut err = None;
    let report = margin_report(s_grid, |s| match shi_zhang(&input, s) {
        Ok(b) => ex.known_lambda1b - b.value,
        Err(e) => {
            err = Some(e);
            f64::NEG_INFINITY
        }
    })?;
    match err {
        Some(e) => Err(e.into()),
        None => Ok(report),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub holds: bool,
    pub points: usize,
    pub max_deviation: f64,
}

fn rigidity_grid(lambda: f64, grid_points: usize) -> Result<Vec<f64>, ZooError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(ZooError::InvalidArgument(format!("λ must be positive, got {lambda}")));
    }
    if grid_points < 2 {
        return Err(ZooError::InvalidArgument("need at least 2 grid points".into()));
    }
    let lo = RIGIDITY_OFFSET;
    let hi = PI / lambda.sqrt() - RIGIDITY_OFFSET;
    Ok((0..grid_points)
        .map(|j| lo + (hi - lo) * j as f64 / (grid_points - 1) as f64)
        .collect())
}

/// Checks `|∇ asin u|² = λ` for `u(t) = −cos(√λ t) + shift` along half the circle.
pub fn rigidity_certificate_shifted(lambda: f64, grid_points: usize, shift: f64) -> Result<RigidityReport, ZooError> {
    let grid = rigidity_grid(lambda, grid_points)?;
    let norm = Normalization::new(1.0, 0.0)?;
    let r = gradient_profile_check(lambda, &norm, cosine_profile(lambda, shift), &grid)?;
    Ok(RigidityReport {
        holds: r.saturated(RIGIDITY_TOL),
        points: r.points,
        max_deviation: r.max_deviation,
    })
}

pub fn rigidity_certificate(lambda: f64, grid_points: usize) -> Result<RigidityReport, ZooError> {
    rigidity_certificate_shifted(lambda, grid_points, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{zhong_yang, BoundName};

    fn uniform_s(points: usize) -> Vec<f64> {
        (1..=points).map(|j| j as f64 / (points + 1) as f64).collect()
    }

    #[test]
    fn hopf_data() {
        let h = hopf_example(1).unwrap();
        assert_eq!((h.ambient_dim, h.known_lambda1b, h.known_diameter), (3, 8.0, FRAC_PI_2));
        assert_eq!(hopf_example(2).unwrap().known_lambda1b, 12.0);
        assert!(hopf_example(0).is_err());
        assert!(verify_hopf_inequality(1, &uniform_s(99)).unwrap().holds);
    }

    #[test]
    fn hopf_margin_matches_rearranged_form() {
        for s in uniform_s(49) {
            let r = verify_hopf_inequality(1, &[s]).unwrap();
            let rearranged = 2.0 * (2.0 - s) + 4.0 * (1.0 - 4.0 * s * (1.0 - s));
            assert!((r.min_margin - rearranged).abs() < 1e-12);
        }
    }

    #[test]
    fn isoparametric_data_and_reductions() {
        let e = isoparametric_example(1, 2, 0, 0).unwrap();
        assert_eq!((e.known_lambda1b, e.known_diameter), (2.0, PI));
        assert!((e.reduction.unwrap().first_eigenvalue(1e-10).unwrap() - 2.0).abs() < 1e-8);

        let e = isoparametric_example(2, 3, 1, 1).unwrap();
        assert_eq!((e.known_lambda1b, e.known_diameter), (8.0, FRAC_PI_2));
        assert!((e.reduction.unwrap().first_eigenvalue(1e-10).unwrap() - 8.0).abs() < 1e-7);

        let e = isoparametric_example(4, 9, 3, 4).unwrap();
        assert_eq!((e.known_lambda1b, e.known_diameter), (48.0, PI / 4.0));
        assert!(e.reduction.is_none());

        assert!(matches!(isoparametric_example(2, 5, 1, 1), Err(ZooError::InvalidMultiplicity(_))));
        assert!(isoparametric_example(5, 5, 1, 1).is_err());
    }

    #[test]
    fn isoparametric_inequality() {
        let r = verify_isoparametric_inequality(1, 2, &[0.5]).unwrap();
        assert!((r.min_margin - 0.5).abs() < 1e-15);
        assert!(verify_isoparametric_inequality(1, 7, &uniform_s(99)).unwrap().holds);
        assert!(verify_isoparametric_inequality(6, 13, &uniform_s(99)).unwrap().holds);
        assert!(verify_isoparametric_inequality(1, 2, &[1.0]).is_err());
    }

    #[test]
    fn mapping_torus() {
        let e = mapping_torus_example(1.0).unwrap();
        assert!((e.known_diameter - PI).abs() < 1e-15);
        let zy = zhong_yang(&e.bound_input().unwrap()).value;
        assert!((zy - 1.0).abs() < 1e-12);
        let e = mapping_torus_example(4.0).unwrap();
        let spec = solve_neumann_shooting(&e.reduction.unwrap().to_problem().unwrap(), 3, 1e-10).unwrap();
        assert!((spec.eigenvalues[1] - 4.0).abs() < 1e-8 && (spec.eigenvalues[2] - 16.0).abs() < 1e-7);
        assert!((mapping_torus_example(PI * PI).unwrap().known_diameter - 1.0).abs() < 1e-15);
        assert!(mapping_torus_example(0.0).is_err());
    }

    #[test]
    fn reduction_round_trips_through_json() {
        let e = isoparametric_example(2, 4, 1, 2).unwrap();
        let back: FoliationExample = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn rigidity() {
        assert!(rigidity_certificate(1.0, 101).unwrap().holds);
        assert!(rigidity_certificate(9.0, 1001).unwrap().holds);
        let bad = rigidity_certificate_shifted(1.0, 101, 0.01).unwrap();
        assert!(!bad.holds && bad.max_deviation > 1e-3);
    }

    #[test]
    fn hopf_top_bound_is_strict() {
        for m in 1..=3 {
            let h = hopf_example(m).unwrap();
            let b = h.bounds(1e-10).unwrap();
            assert_eq!(b[0].name, BoundName::Model);
            assert!(b[0].value < h.known_lambda1b - 1.0);
        }
    }
}
