//! Real polynomials with companion-matrix root finding.

use crate::error::{Error, Result};
use nalgebra::linalg::Schur;
use nalgebra::DMatrix;

/// Polynomial with coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative.
    pub fn eval_d(&self, x: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for &c in self.coeffs.iter().rev() {
            d = d * x + v;
            v = v * x + c;
        }
        (v, d)
    }

    pub fn derivative(&self) -> Poly {
        let c = self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect();
        Poly::new(c)
    }

    /// Drops leading coefficients that are negligible against the largest one.
    fn trimmed(&self) -> Vec<f64> {
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c.last().is_some_and(|&x| x.abs() <= 1e-15 * scale) {
            c.pop();
        }
        c
    }

    pub fn degree(&self) -> usize {
        self.trimmed().len().saturating_sub(1)
    }

    /// Sign of the polynomial as `x -> +inf`.
    pub fn sign_at_infinity(&self) -> f64 {
        self.trimmed().last().copied().unwrap_or(0.0).signum()
    }

    /// All real roots, sorted, with multiple roots reported once.
    pub fn real_roots(&self) -> Result<Vec<f64>> {
        let c = self.trimmed();
        let n = c.len() - 1;
        if n == 0 {
            return Ok(Vec::new());
        }
        // The unbounded QR iteration can stall on symmetric root patterns;
        // retry with the variable shifted if it does not converge.
        let eig = [0.0, 0.377, -0.613, 1.129]
            .iter()
            .find_map(|&s| {
                let q = Poly::new(c.to_vec()).shifted(s);
                let schur = Schur::try_new(companion(q.coeffs()), f64::EPSILON, 10_000)?;
                Some(schur.complex_eigenvalues().map(|z| z + s))
            })
            .ok_or_else(|| Error::RootFinding("companion QR did not converge".into()))?;
        if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::RootFinding("non-finite companion eigenvalue".into()));
        }
        let mut roots: Vec<f64> = eig
            .iter()
            .filter(|z| z.im.abs() <= 1e-6 * z.norm().max(1.0))
            .map(|z| self.polish(z.re))
            .collect();
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
        // Near-double roots can leave a spurious candidate that is not a zero.
        let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        roots.retain(|&r| self.eval(r).abs() <= 1e-6 * scale * r.abs().max(1.0).powi(n as i32));
        Ok(roots)
    }

    /// Coefficients of `p(x + s)`.
    pub fn shifted(&self, s: f64) -> Poly {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                c[j] += s * c[j + 1];
            }
        }
        Poly::new(c)
    }

    /// Newton refinement, falling back on the starting value if it diverges.
    pub fn polish(&self, x0: f64) -> f64 {
        let mut x = x0;
        let mut best = (self.eval(x0).abs(), x0);
        for _ in 0..60 {
            let (v, d) = self.eval_d(x);
            if v.abs() < best.0 {
                best = (v.abs(), x);
            }
            if v == 0.0 || d == 0.0 {
                break;
            }
            let step = v / d;
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let v = self.eval(x).abs();
        if v <= best.0 {
            x
        } else {
            best.1
        }
    }

    /// Quotient of division by `(x - r)`, dropping the remainder.
    pub fn deflate(&self, r: f64) -> Poly {
        let n = self.coeffs.len();
        if n <= 1 {
            return Poly::new(vec![0.0]);
        }
        let mut q = vec![0.0; n - 1];
        let mut acc = 0.0;
        for i in (1..n).rev() {
            acc = acc * r + self.coeffs[i];
            q[i - 1] = acc;
        }
        Poly::new(q)
    }

    /// Real roots inside the closed interval `[lo, hi]`.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        Ok(self.real_roots()?.into_iter().filter(|&r| r >= lo && r <= hi).collect())
    }
}

fn companion(c: &[f64]) -> DMatrix<f64> {
    let n = c.len() - 1;
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    m
}
