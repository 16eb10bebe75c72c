//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.
//!
//! Integration runs in either direction; the sign of `x_end - x` decides.

use super::SlError;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

// 5th-order weights (also the last stage row, FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Tolerance {
    pub fn uniform(tol: f64) -> Self {
        let tol = tol.max(1e-14);
        Self { atol: tol, rtol: tol }
    }
}

/// Integrator state carried between successive calls so that a sequence of
/// short segments does not restart the step-size search each time.
#[derive(Debug, Clone, Copy)]
pub struct Stepper {
    tol: Tolerance,
    h: f64,
    pub steps: usize,
}

impl Stepper {
    pub fn new(tol: Tolerance, initial_step: f64) -> Self {
        Self {
            tol,
            h: initial_step.abs(),
            steps: 0,
        }
    }

    /// Advances `y` from `x` to `x_end`, landing exactly on `x_end`.
    pub fn advance<const N: usize, F>(
        &mut self,
        f: &F,
        x: f64,
        y: [f64; N],
        x_end: f64,
    ) -> Result<[f64; N], SlError>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let span = x_end - x;
        if span == 0.0 {
            return Ok(y);
        }
        let dir = span.signum();
        let mut x = x;
        let mut y = y;
        let mut k1 = f(x, &y);
        let mut h = self.h.min(span.abs());
        if h <= 0.0 || !h.is_finite() {
            h = 1e-3 * span.abs();
        }
        loop {
            let remaining = (x_end - x).abs();
            if remaining <= 0.0 {
                break;
            }
            let mut last = false;
            if h >= remaining {
                h = remaining;
                last = true;
            }
            let min_h = 16.0 * f64::EPSILON * x.abs().max(remaining).max(1e-300);
            if h < min_h {
                return Err(SlError::StiffIntegration { x });
            }
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Err(SlError::StiffIntegration { x });
            }

            let hs = dir * h;
            let k2 = f(x + C2 * hs, &lin(&y, hs, &[(A21, &k1)]));
            let k3 = f(x + C3 * hs, &lin(&y, hs, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                x + C4 * hs,
                &lin(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                x + C5 * hs,
                &lin(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                x + hs,
                &lin(
                    &y,
                    hs,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = lin(
                &y,
                hs,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            let x_new = if last { x_end } else { x + hs };
            let k7 = f(x_new, &y_new);

            let mut err = 0.0_f64;
            let mut finite = true;
            for i in 0..N {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
                let r = (e / scale).abs();
                if !r.is_finite() || !y_new[i].is_finite() {
                    finite = false;
                }
                err = err.max(r);
            }

            if finite && err <= 1.0 {
                x = x_new;
                y = y_new;
                k1 = k7;
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last {
                    self.h = h * factor;
                }
                h *= factor;
                if last {
                    break;
                }
            } else {
                let factor = if finite {
                    (0.9 * err.powf(-0.25)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                h *= factor;
            }
        }
        Ok(y)
    }
}

#[inline]
fn lin<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_forward_and_back() {
        let f = |_x: f64, y: &[f64; 1]| [-y[0]];
        let mut s = Stepper::new(Tolerance::uniform(1e-12), 0.1);
        let y = s.advance(&f, 0.0, [1.0], 2.0).unwrap();
        assert!((y[0] - (-2.0f64).exp()).abs() < 1e-11);
        let mut s = Stepper::new(Tolerance::uniform(1e-12), 0.1);
        let y = s.advance(&f, 2.0, y, 0.0).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_segments() {
        let f = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut s = Stepper::new(Tolerance::uniform(1e-12), 0.01);
        let mut y = [0.0, 1.0];
        let mut x = 0.0;
        for i in 1..=100 {
            let xn = i as f64 * 0.05;
            y = s.advance(&f, x, y, xn).unwrap();
            x = xn;
        }
        assert!((y[0] - 5.0f64.sin()).abs() < 1e-10);
        assert!((y[1] - 5.0f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn blow_up_reports_stiffness() {
        // y' = y^2 from y(0) = 1 explodes at x = 1.
        let f = |_x: f64, y: &[f64; 1]| [y[0] * y[0]];
        let mut s = Stepper::new(Tolerance::uniform(1e-10), 0.1);
        assert!(matches!(
            s.advance(&f, 0.0, [1.0], 2.0),
            Err(SlError::StiffIntegration { .. })
        ));
    }
}
