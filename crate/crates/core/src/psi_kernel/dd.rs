//! Minimal double-double arithmetic (about 32 significant digits).
//!
//! Only what the ψ residual needs: + - * /, and sin/cos on [-π/2, π/2].

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const FRAC_PI_2: Dd = Dd {
    hi: 1.570_796_326_794_896_6,
    lo: 6.123_233_995_736_766e-17,
};
pub const FRAC_4_PI: Dd = Dd {
    hi: 1.273_239_544_735_162_8,
    lo: -7.871_470_670_072_994e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn scale(self, k: f64) -> Self {
        self * Dd::from_f64(k)
    }

    fn taylor_sin_cos(x: Dd) -> (Dd, Dd) {
        // |x| <= π/4: terms fall below 1e-34 well before k = 30
        let x2 = x * x;
        let mut sin = x;
        let mut cos = Dd::ONE;
        let mut term_s = x;
        let mut term_c = Dd::ONE;
        let mut k = 1.0;
        loop {
            term_c = -(term_c * x2) / Dd::from_f64(k * (k + 1.0));
            term_s = -(term_s * x2) / Dd::from_f64((k + 1.0) * (k + 2.0));
            cos = cos + term_c;
            sin = sin + term_s;
            k += 2.0;
            if term_c.hi.abs() < 1e-34 && term_s.hi.abs() < 1e-34 {
                break;
            }
        }
        (sin, cos)
    }

    /// `(sin x, cos x)` for `|x| <= π/2`.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let a = self.abs();
        let sign = if self.hi < 0.0 { -1.0 } else { 1.0 };
        if a.hi <= std::f64::consts::FRAC_PI_4 {
            let (s, c) = Self::taylor_sin_cos(a);
            (s.scale(sign), c)
        } else {
            let h = FRAC_PI_2 - a;
            let (sh, ch) = Self::taylor_sin_cos(h);
            (ch.scale(sign), sh)
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_third_times_three() {
        let third = Dd::ONE / Dd::from_f64(3.0);
        let back = third * Dd::from_f64(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn pythagoras_and_f64_agreement() {
        for &x in &[0.0, 0.1, -0.7, 0.785, 1.2, -1.5, 1.570_796_3] {
            let (s, c) = Dd::from_f64(x).sin_cos();
            let one = s * s + c * c - Dd::ONE;
            assert!(one.to_f64().abs() < 1e-30, "x = {x}");
            assert!((s.to_f64() - x.sin()).abs() < 2e-16);
            assert!((c.to_f64() - x.cos()).abs() < 2e-16);
        }
    }

    #[test]
    fn cos_near_half_pi_keeps_relative_accuracy() {
        // cos(π/2 - 1e-3) = sin(1e-3), computed from the f64 argument
        let x = std::f64::consts::FRAC_PI_2 - 1e-3;
        let (_, c) = Dd::from_f64(x).sin_cos();
        let h = FRAC_PI_2 - Dd::from_f64(x);
        let expected = h.to_f64().sin();
        assert!(((c.to_f64() - expected) / expected).abs() < 1e-15);
    }
}
