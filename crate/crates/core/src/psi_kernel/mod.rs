//! The barrier function ψ used in the refined diameter estimate, with its ODE
//! check, the binomial series coefficients, the barrier integral `∫₀^{π/2} ψ²`,
//! and the gradient estimate `|∇θ|² ≤ λ(1 + a ψ(θ))`.

mod dd;
pub mod quadrature;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::OnceLock;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use dd::Dd;

/// Low word of π/2 (`FRAC_PI_2 + FRAC_PI_2_LO ≈ π/2` to ~32 digits).
const FRAC_PI_2_LO: f64 = 6.123_233_995_736_766e-17;
/// Below this distance from ±π/2, ψ is evaluated from its expansion.
pub const SERIES_SWITCH: f64 = 1e-4;
/// Largest `k` accepted by [`series_coefficient`].
pub const SERIES_CAP: u32 = 30;
/// Nodes of the fixed Gauss–Legendre rule used as the second quadrature.
pub const GAUSS_LEGENDRE_NODES: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PsiError {
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("quadrature did not reach tolerance {tol:e} within the subdivision budget")]
    QuadratureFailure { tol: f64 },
    #[error("series coefficient {k} exceeds the exact-arithmetic cap {cap}")]
    Overflow { k: u32, cap: u32 },
}

/// ψ(θ) = (4/π)(θ sec²θ + tan θ) − 2 tan θ sec θ, with ψ(±π/2) = ±1.
pub fn psi(theta: f64) -> Result<f64, PsiError> {
    if !theta.is_finite() || theta.abs() > FRAC_PI_2 {
        return Err(PsiError::Domain(format!("psi needs |θ| <= π/2, got {theta}")));
    }
    let a = theta.abs();
    if a == FRAC_PI_2 {
        return Ok(theta.signum());
    }
    let value = if a <= FRAC_PI_4 {
        let (s, c) = a.sin_cos();
        let sec = 1.0 / c;
        let tan = s * sec;
        4.0 / PI * (a * sec * sec + tan) - 2.0 * tan * sec
    } else {
        let h = (FRAC_PI_2 - a) + FRAC_PI_2_LO;
        if h < SERIES_SWITCH {
            psi_near_half_pi(h)
        } else {
            // ψ(π/2 - h) = 2/(1 + cos h) - (4/π)(2h - sin 2h) / (2 sin²h)
            let sh = h.sin();
            2.0 / (1.0 + h.cos()) - 4.0 / PI * x_minus_sin(2.0 * h) / (2.0 * sh * sh)
        }
    };
    Ok(theta.signum() * value)
}

/// Expansion of ψ(π/2 − h) through h⁶.
pub fn psi_near_half_pi(h: f64) -> f64 {
    let h2 = h * h;
    let even = 1.0 + h2 * (0.25 + h2 * (1.0 / 24.0 + h2 * (17.0 / 2880.0)));
    let odd = h * (2.0 / 3.0 + h2 * (4.0 / 45.0 + h2 * (4.0 / 315.0)));
    even - 4.0 / PI * odd
}

/// `x - sin x` without cancellation for small `x`.
fn x_minus_sin(x: f64) -> f64 {
    if x.abs() >= 0.5 {
        return x - x.sin();
    }
    let x2 = x * x;
    let mut term = x * x2 / 6.0;
    let mut sum = term;
    let mut k = 3.0;
    while term.abs() > 1e-18 * sum.abs() {
        term *= -x2 / ((k + 1.0) * (k + 2.0));
        sum += term;
        k += 2.0;
    }
    sum
}

/// (ψ, ψ', ψ'') from the hand-differentiated closed form, in double-double.
fn psi_derivatives_dd(theta: f64) -> (Dd, Dd, Dd, Dd, Dd) {
    let th = Dd::from_f64(theta);
    let (sin, cos) = th.sin_cos();
    let s = Dd::ONE / cos;
    let t = sin / cos;
    let s2 = s * s;
    let k = dd::FRAC_4_PI;
    let two = Dd::from_f64(2.0);
    // ψ   = (4/π)(θ s² + t) − 2 t s
    let psi = k * (th * s2 + t) - two * t * s;
    // ψ'  = (4/π)(2 s² + 2 θ s² t) − 2 (s³ + s t²)
    let d1 = k * (two * s2 + two * th * s2 * t) - two * (s2 * s + s * t * t);
    // ψ'' = (4/π)(6 s² t + 4 θ s² t² + 2 θ s⁴) − 2 (5 s³ t + s t³)
    let d2 = k
        * (Dd::from_f64(6.0) * s2 * t
            + Dd::from_f64(4.0) * th * s2 * t * t
            + two * th * s2 * s2)
        - two * (Dd::from_f64(5.0) * s2 * s * t + s * t * t * t);
    (psi, d1, d2, s, t)
}

/// Largest |θ| accepted by [`psi_ode_residual`].
pub const RESIDUAL_LIMIT: f64 = FRAC_PI_2 - 1e-3;

/// `|ψ'' − 2 tanθ ψ' − 2 sec²θ ψ + 2 tanθ secθ|`.
pub fn psi_ode_residual(theta: f64) -> Result<f64, PsiError> {
    psi_ode_residual_with_offset(theta, 0.0)
}

/// Same residual with ψ replaced by ψ + `offset` (fault injection).
pub fn psi_ode_residual_with_offset(theta: f64, offset: f64) -> Result<f64, PsiError> {
    if !theta.is_finite() || theta.abs() > RESIDUAL_LIMIT {
        return Err(PsiError::Domain(format!(
            "residual needs |θ| <= π/2 - 1e-3, got {theta}"
        )));
    }
    let (psi, d1, d2, s, t) = psi_derivatives_dd(theta);
    let psi = psi + Dd::from_f64(offset);
    let two = Dd::from_f64(2.0);
    let r = d2 - two * t * d1 - two * s * s * psi + two * t * s;
    Ok(r.to_f64().abs())
}

/// (4k−1)!!/(4k)!!, the coefficient of x^{2k} in (1/√(1+x) + 1/√(1−x)) / 2.
pub fn series_coefficient(k: u32) -> Result<Ratio<u128>, PsiError> {
    if k > SERIES_CAP {
        return Err(PsiError::Overflow { k, cap: SERIES_CAP });
    }
    // (2m−1)!!/(2m)!! = C(2m, m) / 4^m with m = 2k
    let m = 2 * k as u128;
    let mut binom: u128 = 1;
    for i in 0..m {
        binom = binom * (2 * m - i) / (i + 1);
    }
    let denom: u128 = 1u128 << (2 * m);
    Ok(Ratio::new(binom, denom))
}

/// `2 Σ_{k ≤ terms} coeff(k) x^{2k}`.
pub fn series_partial_sum(x: f64, terms: u32) -> Result<f64, PsiError> {
    let mut sum = 0.0;
    for k in 0..=terms {
        let c = series_coefficient(k)?;
        sum += (*c.numer() as f64 / *c.denom() as f64) * x.powi(2 * k as i32);
    }
    Ok(2.0 * sum)
}

fn psi_squared(theta: f64) -> f64 {
    let p = psi(theta).expect("quadrature nodes lie in [0, π/2]");
    p * p
}

/// `∫₀^{π/2} ψ²(θ) dθ` by adaptive Simpson.
pub fn barrier_integral(quad_tol: f64) -> Result<f64, PsiError> {
    if !(1e-12..=1e-6).contains(&quad_tol) {
        return Err(PsiError::Domain(format!(
            "quadrature tolerance must lie in [1e-12, 1e-6], got {quad_tol}"
        )));
    }
    quadrature::adaptive_simpson(&psi_squared, 0.0, FRAC_PI_2, quad_tol, 48)
        .ok_or(PsiError::QuadratureFailure { tol: quad_tol })
}

/// Same integral by a fixed 256-node Gauss–Legendre rule.
pub fn barrier_integral_gauss_legendre() -> f64 {
    quadrature::gauss_legendre_integrate(&psi_squared, 0.0, FRAC_PI_2, GAUSS_LEGENDRE_NODES)
}

/// Barrier integral at the tightest tolerance, computed once per process.
pub fn barrier_constant() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| barrier_integral(1e-12).expect("ψ² is smooth on [0, π/2]"))
}

/// `((π + (3/4) a² I) / d)²` with `a = (1−k)/(1+k)`.
pub fn refined_zhong_yang(d: f64, k: f64) -> Result<f64, PsiError> {
    if !(d.is_finite() && d > 0.0) {
        return Err(PsiError::Domain(format!("diameter must be positive, got {d}")));
    }
    if !(k > 0.0 && k <= 1.0) {
        return Err(PsiError::Domain(format!("k must lie in (0, 1], got {k}")));
    }
    let a = (1.0 - k) / (1.0 + k);
    let root = (PI + 0.75 * a * a * barrier_constant()) / d;
    Ok(root * root)
}

/// Bookkeeping for the normalised eigenfunction
/// `v_ε = (u − (1−k)/2) / ((1+ε)(1+k)/2)` of an eigenfunction with
/// `max u = 1`, `min u = −k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub k: f64,
    pub epsilon: f64,
    pub a_eps: f64,
    /// θ_ε = asin v_ε ranges over [−π/2 + δ, π/2 − δ].
    pub delta_angle: f64,
}

impl Normalization {
    pub fn new(k: f64, epsilon: f64) -> Result<Self, PsiError> {
        if !(k > 0.0 && k <= 1.0) {
            return Err(PsiError::Domain(format!("k must lie in (0, 1], got {k}")));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(PsiError::Domain(format!("ε must be >= 0, got {epsilon}")));
        }
        let a_eps = (1.0 - k) / (1.0 + k) / (1.0 + epsilon);
        let delta_angle = if epsilon == 0.0 {
            0.0
        } else {
            FRAC_PI_2 - (1.0 / (1.0 + epsilon)).asin()
        };
        Ok(Self {
            k,
            epsilon,
            a_eps,
            delta_angle,
        })
    }

    fn centre(&self) -> f64 {
        (1.0 - self.k) / 2.0
    }

    fn spread(&self) -> f64 {
        (1.0 + self.epsilon) * (1.0 + self.k) / 2.0
    }

    pub fn normalize(&self, u: f64) -> f64 {
        (u - self.centre()) / self.spread()
    }
}

/// One sample of an eigenfunction profile `u(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub u: f64,
    pub du: f64,
    /// `1 − u²`, supplied separately so it stays accurate where `|u| → 1`.
    pub one_minus_u2: f64,
}

impl ProfileSample {
    pub fn plain(u: f64, du: f64) -> Self {
        Self {
            u,
            du,
            one_minus_u2: (1.0 - u) * (1.0 + u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub points: usize,
    /// `max |(|θ'|² − λ(1 + a_ε ψ(θ))) / λ|`: zero when the estimate is saturated.
    pub max_deviation: f64,
    /// `|θ'|² ≤ λ(1 + a_ε ψ(θ))` at every point (relative slack 1e-9).
    pub estimate_holds: bool,
}

impl GradientReport {
    pub fn saturated(&self, tol: f64) -> bool {
        self.max_deviation <= tol
    }
}

/// Checks `|θ_ε'|² ≤ λ(1 + a_ε ψ(θ_ε))` along a profile sampled at `t_grid`.
pub fn gradient_profile_check<P>(
    lambda: f64,
    norm: &Normalization,
    profile: P,
    t_grid: &[f64],
) -> Result<GradientReport, PsiError>
where
    P: Fn(f64) -> ProfileSample,
{
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(PsiError::Domain(format!("λ must be positive, got {lambda}")));
    }
    let spread = norm.spread();
    let centre = norm.centre();
    let mut max_dev = 0.0f64;
    let mut holds = true;
    for &t in t_grid {
        let s = profile(t);
        let v = (s.u - centre) / spread;
        let dv = s.du / spread;
        // 1 − v² = (spread² − (u − centre)²) / spread²
        let gap = if centre == 0.0 {
            (spread * spread - 1.0 + s.one_minus_u2) / (spread * spread)
        } else {
            (1.0 - v) * (1.0 + v)
        };
        if !(gap > 0.0) || v.abs() >= 1.0 {
            max_dev = f64::INFINITY;
            holds = false;
            continue;
        }
        let grad2 = dv * dv / gap;
        let theta = v.asin();
        let bound = lambda * (1.0 + norm.a_eps * psi(theta)?);
        max_dev = max_dev.max(((grad2 - bound) / lambda).abs());
        if grad2 > bound * (1.0 + 1e-9) {
            holds = false;
        }
    }
    Ok(GradientReport {
        points: t_grid.len(),
        max_deviation: max_dev,
        estimate_holds: holds,
    })
}

/// Samples of `u(t) = −cos(√λ t)` plus a constant `shift`.
pub fn cosine_profile(lambda: f64, shift: f64) -> impl Fn(f64) -> ProfileSample {
    let w = lambda.sqrt();
    move |t: f64| {
        let (s, c) = (w * t).sin_cos();
        if shift == 0.0 {
            ProfileSample {
                u: -c,
                du: w * s,
                one_minus_u2: s * s,
            }
        } else {
            ProfileSample::plain(shift - c, w * s)
        }
    }
}

/// Gradient estimate for the exemplar `u(t) = −cos(√λ t)` at the given
/// angles `θ_ε` (which must lie inside the normalised range).
pub fn gradient_estimate_check(
    lambda: f64,
    norm: &Normalization,
    theta_grid: &[f64],
) -> Result<GradientReport, PsiError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(PsiError::Domain(format!("λ must be positive, got {lambda}")));
    }
    if norm.k != 1.0 {
        return Err(PsiError::Domain(
            "the cosine exemplar has min u = -1, so k must be 1".into(),
        ));
    }
    let limit = FRAC_PI_2 - norm.delta_angle;
    let w = lambda.sqrt();
    let mut t_grid = Vec::with_capacity(theta_grid.len());
    for &theta in theta_grid {
        if !(theta.abs() < limit) {
            return Err(PsiError::Domain(format!(
                "θ = {theta} outside the open range (−{limit}, {limit})"
            )));
        }
        // v = u / (1 + ε) = sin θ  ⇒  −cos(√λ t) = (1 + ε) sin θ
        let u = (1.0 + norm.epsilon) * theta.sin();
        let t = if norm.epsilon == 0.0 {
            (theta + FRAC_PI_2) / w
        } else {
            (-u).acos() / w
        };
        t_grid.push(t);
    }
    gradient_profile_check(lambda, norm, cosine_profile(lambda, 0.0), &t_grid)
}
