//! Complex polynomials in ascending-degree coefficient form.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::json::Cx;
use crate::linalg::{self, re, CMat};

/// `coeffs[k]` multiplies `s^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Cx>", into = "Vec<Cx>")]
pub struct Poly {
    pub coeffs: Vec<Complex64>,
}

impl From<Vec<Cx>> for Poly {
    fn from(v: Vec<Cx>) -> Self {
        Poly::new(v.into_iter().map(Complex64::from).collect())
    }
}

impl From<Poly> for Vec<Cx> {
    fn from(p: Poly) -> Self {
        p.coeffs.into_iter().map(Cx::from).collect()
    }
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&x| re(x)).collect())
    }

    pub fn zero() -> Self {
        Poly::new(vec![])
    }

    pub fn one() -> Self {
        Poly::new(vec![re(1.0)])
    }

    /// Monic polynomial `∏ (s − r_k)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = vec![re(1.0)];
        for r in roots {
            let mut q = vec![re(0.0); p.len() + 1];
            for (k, a) in p.iter().enumerate() {
                q[k + 1] += a;
                q[k] -= a * r;
            }
            p = q;
        }
        Poly::new(p)
    }

    /// Characteristic polynomial `det(sI − M)`, rebuilt from the eigenvalues of `M`.
    pub fn characteristic(m: &CMat) -> Result<Self> {
        Ok(Poly::from_roots(&linalg::eigenvalues(m)?))
    }

    /// Nominal degree, i.e. `coeffs.len() - 1`; may include zero leading terms.
    pub fn len_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree after dropping exact zero leading coefficients.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|z| *z != re(0.0))
    }

    pub fn leading(&self) -> Complex64 {
        self.degree().map(|d| self.coeffs[d]).unwrap_or(re(0.0))
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(re(0.0))
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(re(0.0), |acc, a| acc * s + a)
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Poly::new(self.coeffs.iter().map(|a| a * k).collect())
    }

    /// Drops leading coefficients with modulus ≤ `tol`.
    pub fn trimmed(&self, tol: f64) -> Self {
        let keep = self.coeffs.iter().rposition(|z| z.norm() > tol).map_or(0, |d| d + 1);
        Poly::new(self.coeffs[..keep].to_vec())
    }

    /// Roots via eigenvalues of the companion matrix. Leading coefficient must be nonzero.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let d = match self.degree() {
            None | Some(0) => return Ok(Vec::new()),
            Some(d) => d,
        };
        let lead = self.coeffs[d];
        let mut comp = CMat::zeros(d, d);
        for i in 0..d - 1 {
            comp[(i, i + 1)] = re(1.0);
        }
        for j in 0..d {
            comp[(d - 1, j)] = -self.coeffs[j] / lead;
        }
        linalg::eigenvalues(&comp)
    }

    /// Polynomial long division, `self = q·div + r` with `deg r < deg div`.
    pub fn div_rem(&self, div: &Poly) -> (Poly, Poly) {
        let dd = div.degree().expect("division by zero polynomial");
        let lead = div.coeffs[dd];
        let mut r = self.coeffs.clone();
        let nd = match self.degree() {
            Some(d) if d >= dd => d,
            _ => return (Poly::zero(), self.clone()),
        };
        let mut q = vec![re(0.0); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let f = r[k + dd] / lead;
            q[k] = f;
            for j in 0..=dd {
                r[k + j] -= f * div.coeffs[j];
            }
            r[k + dd] = re(0.0);
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    pub fn max_abs_diff(&self, other: &Poly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![re(0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}
