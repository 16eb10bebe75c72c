//! Closed-form lower bounds for the first basic eigenvalue and their aggregation.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model_ode::{model_eigenvalue, ModelError, ModelProblem};
use crate::psi_kernel::{refined_zhong_yang, PsiError};

/// Stand-in for the unattained supremum at s → 1.
pub const BOUNDARY_S: f64 = 1.0 - 1e-9;
/// Relative slack used when checking that the model dominates the closed forms.
pub const HIERARCHY_SLACK: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("invalid bound input: {0}")]
    Domain(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Psi(#[from] PsiError),
    #[error("bound hierarchy violated: {0}")]
    Hierarchy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInput {
    pub n: u32,
    #[serde(rename = "K")]
    pub k_curv: f64,
    pub d: f64,
}

impl BoundInput {
    pub fn new(n: u32, k_curv: f64, d: f64) -> Result<Self, BoundError> {
        if n < 2 {
            return Err(BoundError::Domain(format!("n must be >= 2, got {n}")));
        }
        if !(k_curv.is_finite() && k_curv >= 0.0) {
            return Err(BoundError::Domain(format!("K must be finite and >= 0, got {k_curv}")));
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(BoundError::Domain(format!("d must be finite and > 0, got {d}")));
        }
        if k_curv > 0.0 && d > PI / k_curv.sqrt() {
            return Err(BoundError::Domain(format!(
                "d = {d} exceeds the Bonnet–Myers diameter π/√K = {}",
                PI / k_curv.sqrt()
            )));
        }
        Ok(Self { n, k_curv, d })
    }

    /// Maximal diameter π/√K, or ∞ when K = 0.
    pub fn max_diameter(&self) -> f64 {
        if self.k_curv > 0.0 {
            PI / self.k_curv.sqrt()
        } else {
            f64::INFINITY
        }
    }

    fn a(&self) -> f64 {
        PI * PI / (self.d * self.d)
    }

    fn b(&self) -> f64 {
        (self.n - 1) as f64 * self.k_curv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    ZhongYang,
    Lichnerowicz,
    LiType,
    ShiZhang,
    ShiZhangOptimal,
    RefinedZy,
    Model,
}

impl BoundName {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundName::ZhongYang => "zhong_yang",
            BoundName::Lichnerowicz => "lichnerowicz",
            BoundName::LiType => "li_type",
            BoundName::ShiZhang => "shi_zhang",
            BoundName::ShiZhangOptimal => "shi_zhang_optimal",
            BoundName::RefinedZy => "refined_zy",
            BoundName::Model => "model",
        }
    }
}

impl fmt::Display for BoundName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub name: BoundName,
    /// The free parameter of the bound when it has one (s, or k for refined_zy).
    pub parameter: Option<f64>,
    pub value: f64,
    pub valid: bool,
    pub note: String,
}

impl BoundResult {
    fn new(name: BoundName, value: f64, valid: bool, note: impl Into<String>) -> Self {
        Self {
            name,
            parameter: None,
            value,
            valid,
            note: note.into(),
        }
    }

    fn with_parameter(mut self, p: f64) -> Self {
        self.parameter = Some(p);
        self
    }
}

/// λ ≥ π²/d², valid under Ric ≥ 0.
pub fn zhong_yang(input: &BoundInput) -> BoundResult {
    BoundResult::new(BoundName::ZhongYang, input.a(), true, "Ric >= 0")
}

/// λ ≥ nK, valid only for K > 0.
pub fn lichnerowicz(input: &BoundInput) -> BoundResult {
    let valid = input.k_curv > 0.0;
    let note = if valid { "Ric >= (n-1)K, K > 0" } else { "requires K > 0" };
    BoundResult::new(BoundName::Lichnerowicz, input.n as f64 * input.k_curv, valid, note)
}

/// λ ≥ 4s(1−s)π²/d² + s(n−1)K for s ∈ (0, 1).
pub fn shi_zhang(input: &BoundInput, s: f64) -> Result<BoundResult, BoundError> {
    if !(s > 0.0 && s < 1.0) {
        return Err(BoundError::Domain(format!("s must lie in (0, 1), got {s}")));
    }
    Ok(BoundResult::new(BoundName::ShiZhang, shi_zhang_value(input, s), true, "Ric >= (n-1)K")
        .with_parameter(s))
}

fn shi_zhang_value(input: &BoundInput, s: f64) -> f64 {
    4.0 * s * (1.0 - s) * input.a() + s * input.b()
}

/// The s = 1/2 member, π²/d² + (n−1)K/2.
pub fn li_type(input: &BoundInput) -> BoundResult {
    BoundResult::new(BoundName::LiType, input.a() + input.b() / 2.0, true, "s = 1/2").with_parameter(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalS {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub s0: f64,
    pub regime: Regime,
    pub s_star: f64,
    pub bound: f64,
    pub note: String,
}

/// Maximises b(s) = 4s(1−s)A + sB over s ∈ (0, 1).
pub fn optimal_s(input: &BoundInput) -> OptimalS {
    let a = input.a();
    let b = input.b();
    let s0 = (4.0 * a + b) / (8.0 * a);
    let mut notes = Vec::new();
    if input.n == 2 {
        notes.push("n = 2 uses the n >= 3 algebra unchanged");
    }
    let (regime, s_star, bound) = if s0 < 1.0 {
        (Regime::Interior, s0, (4.0 * a + b).powi(2) / (16.0 * a))
    } else {
        notes.push("supremum approached as s -> 1, not attained");
        (Regime::Boundary, BOUNDARY_S, b)
    };
    OptimalS {
        a,
        b,
        s0,
        regime,
        s_star,
        bound,
        note: notes.join("; "),
    }
}

pub fn shi_zhang_optimal(input: &BoundInput) -> BoundResult {
    let opt = optimal_s(input);
    let regime = match opt.regime {
        Regime::Interior => "interior optimum",
        Regime::Boundary => "boundary regime",
    };
    let note = if opt.note.is_empty() {
        regime.to_string()
    } else {
        format!("{regime}; {}", opt.note)
    };
    BoundResult::new(BoundName::ShiZhangOptimal, opt.bound, true, note).with_parameter(opt.s_star)
}

/// ((π + ¾a²I)/d)² for a normalised eigenfunction with minimum −k.
pub fn refined_zy(input: &BoundInput, k: f64) -> Result<BoundResult, BoundError> {
    let value = refined_zhong_yang(input.d, k)?;
    Ok(BoundResult::new(BoundName::RefinedZy, value, true, "Ric >= 0, eigenfunction min = -k")
        .with_parameter(k))
}

pub fn model_bound(input: &BoundInput, tol: f64) -> Result<BoundResult, BoundError> {
    let problem = ModelProblem::central(input.k_curv, input.n, input.d)?;
    let value = model_eigenvalue(&problem, tol)?;
    Ok(BoundResult::new(BoundName::Model, value, true, "central model interval"))
}

/// All applicable bounds, sorted by decreasing value.
pub fn best_bound(input: &BoundInput, use_model: bool, tol: f64) -> Result<Vec<BoundResult>, BoundError> {
    let mut out = vec![
        zhong_yang(input),
        lichnerowicz(input),
        li_type(input),
        shi_zhang_optimal(input),
    ];
    if use_model {
        let at_pole = input.k_curv > 0.0 && input.d >= input.max_diameter();
        if at_pole {
            out[1].note = "d = π/√K: model skipped, Lichnerowicz is sharp here".into();
        } else {
            let model = model_bound(input, tol)?;
            check_hierarchy(&model, &out)?;
            out.push(model);
        }
    }
    out.sort_by(|x, y| y.value.total_cmp(&x.value));
    Ok(out)
}

fn check_hierarchy(model: &BoundResult, closed: &[BoundResult]) -> Result<(), BoundError> {
    let floor = model.value * (1.0 + HIERARCHY_SLACK);
    for b in closed.iter().filter(|b| b.valid) {
        let dominated = matches!(
            b.name,
            BoundName::ZhongYang | BoundName::LiType | BoundName::ShiZhangOptimal
        );
        if dominated && b.value > floor {
            return Err(BoundError::Hierarchy(format!(
                "{} = {} exceeds model = {}",
                b.name, b.value, model.value
            )));
        }
    }
    let get = |n: BoundName| closed.iter().find(|b| b.name == n).map(|b| b.value);
    if let (Some(opt), Some(li)) = (get(BoundName::ShiZhangOptimal), get(BoundName::LiType)) {
        if li > opt * (1.0 + 1e-12) {
            return Err(BoundError::Hierarchy(format!("li_type = {li} exceeds optimum = {opt}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn input(n: u32, k: f64, d: f64) -> BoundInput {
        BoundInput::new(n, k, d).unwrap()
    }

    fn grid_max(inp: &BoundInput, points: usize) -> f64 {
        (1..points)
            .map(|j| shi_zhang_value(inp, j as f64 / points as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn closed_forms() {
        assert_eq!(zhong_yang(&input(3, 0.0, PI)).value, 1.0);
        assert!((zhong_yang(&input(3, 1.0, FRAC_PI_2)).value - 4.0).abs() < 1e-14);
        for g in [1.0, 2.0, 3.0, 4.0, 6.0] {
            assert!((zhong_yang(&input(3, 1.0, PI / g)).value - g * g).abs() < 1e-12);
        }
        let l = lichnerowicz(&input(3, 1.0, 1.0));
        assert_eq!((l.value, l.valid), (3.0, true));
        let l = lichnerowicz(&input(3, 0.0, 1.0));
        assert_eq!((l.value, l.valid), (0.0, false));
        let sz = shi_zhang(&input(3, 1.0, FRAC_PI_2), 0.5).unwrap();
        assert!((sz.value - 5.0).abs() < 1e-13);
    }

    #[test]
    fn input_validation() {
        assert!(BoundInput::new(3, 1.0, 4.0).is_err());
        assert!(BoundInput::new(3, 1.0, PI).is_ok());
        assert!(BoundInput::new(1, 1.0, 1.0).is_err());
        assert!(BoundInput::new(3, -1.0, 1.0).is_err());
        assert!(BoundInput::new(3, 0.0, 0.0).is_err());
        for s in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(shi_zhang(&input(3, 1.0, 1.0), s).is_err());
        }
    }

    #[test]
    fn optimal_s_regimes() {
        let o = optimal_s(&input(3, 1.0, FRAC_PI_2));
        assert_eq!(o.regime, Regime::Interior);
        assert!((o.s0 - 0.5625).abs() < 1e-15);
        assert!((o.bound - 5.0625).abs() < 1e-13);
        assert!((grid_max(&input(3, 1.0, FRAC_PI_2), 1_000_000) - o.bound).abs() < 1e-9);

        let o = optimal_s(&input(4, 0.0, 2.0));
        assert_eq!(o.s0, 0.5);
        assert!((o.bound - PI * PI / 4.0).abs() < 1e-14);

        let o = optimal_s(&input(5, 1.0, PI));
        assert_eq!(o.regime, Regime::Boundary);
        assert_eq!(o.bound, 4.0);
        assert_eq!(o.s_star, BOUNDARY_S);
        assert!(!o.note.is_empty());

        assert!(optimal_s(&input(2, 1.0, 1.0)).note.contains("n = 2"));
    }

    #[test]
    fn best_bound_flat_and_model() {
        let r = best_bound(&input(3, 0.0, PI), false, 1e-10).unwrap();
        assert_eq!(r[0].value, 1.0);
        assert!(r.iter().any(|b| b.name == BoundName::ZhongYang && b.value == 1.0));

        let r = best_bound(&input(3, 1.0, FRAC_PI_2), true, 1e-10).unwrap();
        assert_eq!(r[0].name, BoundName::Model);
        assert!(r[0].value >= 5.0625);
        assert!(r.windows(2).all(|w| w[0].value >= w[1].value));
        assert!(r.iter().all(|b| b.value <= 8.0));
    }

    #[test]
    fn best_bound_at_bonnet_myers_diameter() {
        let r = best_bound(&input(3, 1.0, PI), true, 1e-10).unwrap();
        assert!(r.iter().all(|b| b.name != BoundName::Model));
        assert_eq!(r[0].name, BoundName::Lichnerowicz);
        assert_eq!(r[0].value, 3.0);
    }

    #[test]
    fn hierarchy_violation_is_reported() {
        let fake = BoundResult::new(BoundName::Model, 1.0, true, "");
        let closed = vec![zhong_yang(&input(3, 0.0, 1.0))];
        assert!(matches!(check_hierarchy(&fake, &closed), Err(BoundError::Hierarchy(_))));
    }

    #[test]
    fn refined_reduces_to_zhong_yang_at_k_one() {
        let inp = input(3, 0.0, 2.0);
        assert_eq!(refined_zy(&inp, 1.0).unwrap().value, zhong_yang(&inp).value);
        assert!(refined_zy(&inp, 0.5).unwrap().value > zhong_yang(&inp).value);
    }

    fn arb_input() -> impl Strategy<Value = BoundInput> {
        (2u32..=10, 0.0f64..=1.0, 0.05f64..=0.999).prop_map(|(n, k, frac)| {
            let d = if k > 0.0 { frac * PI / k.sqrt() } else { frac * 10.0 };
            BoundInput::new(n, k, d).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn half_is_li_type(inp in arb_input()) {
            let v = shi_zhang(&inp, 0.5).unwrap().value;
            let expect = PI * PI / (inp.d * inp.d) + (inp.n - 1) as f64 * inp.k_curv / 2.0;
            prop_assert!((v - expect).abs() <= 1e-12 * expect.max(1.0));
        }

        #[test]
        fn optimum_dominates_every_s(inp in arb_input(), s in 0.001f64..0.999) {
            let o = optimal_s(&inp);
            prop_assert!(shi_zhang_value(&inp, s) <= o.bound * (1.0 + 1e-12));
        }

        #[test]
        fn interior_optimum_matches_expansion(inp in arb_input()) {
            let o = optimal_s(&inp);
            if o.regime == Regime::Interior {
                let (n, k, d) = (inp.n as f64, inp.k_curv, inp.d);
                let expansion = PI * PI / (d * d) + (n - 1.0) * k / 2.0
                    + (n - 1.0).powi(2) * k * k * d * d / (16.0 * PI * PI);
                prop_assert!((o.bound - expansion).abs() <= 1e-12 * o.bound);
                prop_assert!((shi_zhang_value(&inp, o.s_star) - o.bound).abs() <= 1e-12 * o.bound);
            } else {
                prop_assert!(o.s0 >= 1.0);
                prop_assert_eq!(o.bound, o.b);
            }
        }

        #[test]
        fn bounds_monotone_in_d_and_k(inp in arb_input(), shrink in 0.5f64..1.0, grow in 1.0f64..2.0) {
            let smaller_d = BoundInput::new(inp.n, inp.k_curv, inp.d * shrink).unwrap();
            let k2 = inp.k_curv * grow;
            let values = |i: &BoundInput| {
                [zhong_yang(i).value, lichnerowicz(i).value, li_type(i).value, shi_zhang_optimal(i).value]
            };
            let base = values(&inp);
            for (x, y) in values(&smaller_d).iter().zip(base.iter()) {
                prop_assert!(*x >= y * (1.0 - 1e-12));
            }
            if let Ok(bigger_k) = BoundInput::new(inp.n, k2, inp.d) {
                for (x, y) in values(&bigger_k).iter().zip(base.iter()) {
                    prop_assert!(*x >= y * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn flat_supremum_is_zhong_yang() {
        for d in [0.3, 1.0, PI, 7.0] {
            let inp = input(4, 0.0, d);
            let sup = grid_max(&inp, 1_000_000);
            let zy = zhong_yang(&inp).value;
            assert!(sup <= zy && zy <= sup + 1e-6);
        }
    }
}
