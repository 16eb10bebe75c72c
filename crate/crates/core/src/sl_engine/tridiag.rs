use super::SlError;

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `count` smallest eigenvalues, ascending, by bisection to working precision.
    pub fn smallest_eigenvalues(&self, count: usize) -> Result<Vec<f64>, SlError> {
        if count > self.dim() {
            return Err(SlError::InvalidArgument(format!(
                "requested {count} eigenvalues of a {}-dimensional matrix",
                self.dim()
            )));
        }
        let (glo, ghi) = self.gershgorin();
        if !(glo.is_finite() && ghi.is_finite()) {
            return Err(SlError::NonConvergence("matrix has non-finite entries".into()));
        }
        let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
        let mut out = Vec::with_capacity(count);
        let mut lo_floor = glo - 1e-12 * scale;
        for k in 0..count {
            // invariant: count_below(lo) <= k < count_below(hi)
            let mut lo = lo_floor;
            let mut hi = ghi + 1e-12 * scale;
            let mut iter = 0;
            while hi - lo > 2.0 * f64::EPSILON * (lo.abs().max(hi.abs())) + f64::MIN_POSITIVE {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                iter += 1;
                if iter > 2000 {
                    return Err(SlError::NonConvergence(format!(
                        "bisection for eigenvalue {k} did not terminate"
                    )));
                }
            }
            let value = 0.5 * (lo + hi);
            out.push(value);
            lo_floor = lo;
        }
        Ok(out)
    }

    /// Eigenvector for an (accurate) eigenvalue by inverse iteration; unit 2-norm.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>, SlError> {
        let n = self.dim();
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs()).max(1.0);
        let shift = lambda + 64.0 * f64::EPSILON * scale;
        // deterministic, generic start vector
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.25 * ((i as f64) * 0.754_877_666).sin())
            .collect();
        normalize(&mut x);
        for _ in 0..3 {
            x = self.solve_shifted(shift, &x)?;
            normalize(&mut x);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SlError::NonConvergence(
                "inverse iteration produced non-finite entries".into(),
            ));
        }
        Ok(x)
    }

    /// `y = (A - shift I) x`
    pub fn mul_shifted(&self, shift: f64, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = (self.diag[i] - shift) * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `(A - shift I) y = b` by Gaussian elimination with partial pivoting.
    fn solve_shifted(&self, shift: f64, b: &[f64]) -> Result<Vec<f64>, SlError> {
        let n = self.dim();
        if n == 1 {
            let d = self.diag[0] - shift;
            let d = if d == 0.0 { f64::EPSILON } else { d };
            return Ok(vec![b[0] / d]);
        }
        // Row i holds (u0, u1, u2) at columns i, i+1, i+2 after elimination.
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut rhs = b.to_vec();
        let tiny = f64::EPSILON * self.gershgorin().1.abs().max(1.0);

        // current working row (a, b, c) at columns i, i+1, i+2
        let mut a = self.diag[0] - shift;
        let mut bb = self.off[0];
        let mut cc = 0.0;
        let mut r = rhs[0];
        for i in 0..n - 1 {
            let sub = self.off[i];
            let next_d = self.diag[i + 1] - shift;
            let next_u = if i + 2 < n { self.off[i + 1] } else { 0.0 };
            let next_r = rhs[i + 1];
            if sub.abs() > a.abs() {
                // swap rows: pivot row is row i+1
                let m = a / sub;
                u0[i] = sub;
                u1[i] = next_d;
                u2[i] = next_u;
                rhs[i] = next_r;
                a = bb - m * next_d;
                bb = cc - m * next_u;
                cc = 0.0;
                r -= m * next_r;
            } else {
                let piv = if a == 0.0 { tiny } else { a };
                let m = sub / piv;
                u0[i] = piv;
                u1[i] = bb;
                u2[i] = cc;
                rhs[i] = r;
                a = next_d - m * bb;
                bb = next_u - m * cc;
                cc = 0.0;
                r = next_r - m * r;
            }
        }
        u0[n - 1] = if a == 0.0 { tiny } else { a };
        rhs[n - 1] = r;

        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            if i + 1 < n {
                s -= u1[i] * y[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * y[i + 2];
            }
            y[i] = s / u0[i];
        }
        Ok(y)
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn sample(n: usize) -> SymTridiagonal {
        let diag = (0..n).map(|i| 2.0 + 0.3 * (i as f64).cos()).collect();
        let off = (0..n - 1).map(|i| -1.0 + 0.1 * (i as f64 * 1.7).sin()).collect();
        SymTridiagonal::new(diag, off)
    }

    #[test]
    fn bisection_matches_dense_symmetric_eigen() {
        let t = sample(40);
        let mut m = DMatrix::zeros(40, 40);
        for i in 0..40 {
            m[(i, i)] = t.diag[i];
            if i + 1 < 40 {
                m[(i, i + 1)] = t.off[i];
                m[(i + 1, i)] = t.off[i];
            }
        }
        let mut dense: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        let ours = t.smallest_eigenvalues(6).unwrap();
        for (a, b) in ours.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn inverse_iteration_gives_eigenvector() {
        let t = sample(50);
        let vals = t.smallest_eigenvalues(3).unwrap();
        for &lam in &vals {
            let v = t.eigenvector(lam).unwrap();
            let r = t.mul_shifted(lam, &v);
            let rmax = r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            assert!(rmax < 1e-12, "residual {rmax}");
        }
    }

    #[test]
    fn too_many_requested() {
        assert!(sample(4).smallest_eigenvalues(5).is_err());
    }
}
