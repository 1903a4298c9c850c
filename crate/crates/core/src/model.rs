//! Passive linear quantum systems `(Ω, C)`.
//!
//! The mean dynamics are
//!
//! ```text
//! d⟨a⟩/dt = A⟨a⟩ − C†β(t),    ⟨b_out⟩ = C⟨a⟩ + β(t),    A = −iΩ − ½C†C,
//! ```
//!
//! so the input matrix is always `B = −C†`, and the transfer function is
//! `Ξ(s) = I − C(sI − A)⁻¹C†`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{matrix_to_rows, rows_to_matrix, Cx};
use crate::linalg::{self, re, CMat, CVec, I};
use crate::par::{self, Execution};
use crate::poly::Poly;
use crate::realization::RationalTF;

/// Relative Hermiticity tolerance on `Ω`.
pub const HERMIT_REL_TOL: f64 = 1e-12;
/// Absolute floor for the Hermiticity tolerance.
pub const HERMIT_ABS_FLOOR: f64 = 1e-14;
/// Resolvent singularity threshold, relative to `1 + |s|`.
pub const RESOLVENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemFile", into = "SystemFile")]
pub struct PassiveSystem {
    omega: CMat,
    c: CMat,
}

/// On-disk layout of a system: `{"n", "m", "omega", "c"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub n: usize,
    pub m: usize,
    pub omega: Vec<Vec<Cx>>,
    pub c: Vec<Vec<Cx>>,
}

impl TryFrom<SystemFile> for PassiveSystem {
    type Error = Error;

    fn try_from(f: SystemFile) -> Result<Self> {
        if f.omega.len() != f.n || f.c.len() != f.m {
            return Err(Error::DimensionMismatch(format!(
                "declared n = {}, m = {} but omega has {} rows and c has {}",
                f.n,
                f.m,
                f.omega.len(),
                f.c.len()
            )));
        }
        let omega = rows_to_matrix(&f.omega, f.n)?;
        let c = rows_to_matrix(&f.c, f.n)?;
        PassiveSystem::new(omega, c)
    }
}

impl From<PassiveSystem> for SystemFile {
    fn from(s: PassiveSystem) -> Self {
        SystemFile {
            n: s.n(),
            m: s.m(),
            omega: matrix_to_rows(&s.omega),
            c: matrix_to_rows(&s.c),
        }
    }
}

impl PassiveSystem {
    /// Validates and builds a system from `Ω` (n×n Hermitian) and `C` (m×n, m ≤ n).
    pub fn new(omega: CMat, c: CMat) -> Result<Self> {
        let n = omega.nrows();
        if n == 0 || omega.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "omega must be square and nonempty, got {}x{}",
                omega.nrows(),
                omega.ncols()
            )));
        }
        if c.ncols() != n || c.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "c must be m x {n} with m >= 1, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        if c.nrows() > n {
            return Err(Error::TooManyFields { m: c.nrows(), n });
        }
        if omega.iter().chain(c.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let deviation = linalg::hermitian_deviation(&omega);
        let tol = (HERMIT_REL_TOL * linalg::max_abs(&omega)).max(HERMIT_ABS_FLOOR);
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(PassiveSystem { omega, c })
    }

    /// Real-valued convenience constructor (row-major slices).
    pub fn from_real(n: usize, omega: &[f64], m: usize, c: &[f64]) -> Result<Self> {
        if omega.len() != n * n || c.len() != m * n {
            return Err(Error::DimensionMismatch("slice length does not match n, m".into()));
        }
        let omega = CMat::from_row_iterator(n, n, omega.iter().map(|&x| re(x)));
        let c = CMat::from_row_iterator(m, n, c.iter().map(|&x| re(x)));
        PassiveSystem::new(omega, c)
    }

    pub fn n(&self) -> usize {
        self.omega.nrows()
    }

    pub fn m(&self) -> usize {
        self.c.nrows()
    }

    pub fn omega(&self) -> &CMat {
        &self.omega
    }

    pub fn c(&self) -> &CMat {
        &self.c
    }

    pub fn drift_matrix(&self) -> DriftMatrix {
        let cc = self.c.adjoint() * &self.c;
        DriftMatrix {
            a: &self.omega * (-I) - cc * re(0.5),
        }
    }

    /// `Ξ(s) = I − C(sI − A)⁻¹C†`.
    pub fn transfer_at(&self, s: Complex64) -> Result<CMat> {
        let a = self.drift_matrix().a;
        let eigs = linalg::eigenvalues(&a)?;
        self.transfer_with(&a, &eigs, s)
    }

    /// Evaluates `Ξ` at many points, sharing one eigen-decomposition.
    pub fn transfer_batch(&self, points: &[Complex64], exec: Execution) -> Result<Vec<CMat>> {
        let a = self.drift_matrix().a;
        let eigs = linalg::eigenvalues(&a)?;
        par::try_map_indexed(points.len(), exec, |k| self.transfer_with(&a, &eigs, points[k]))
    }

    fn transfer_with(&self, a: &CMat, eigs: &[Complex64], s: Complex64) -> Result<CMat> {
        let gap = eigs.iter().map(|l| (s - l).norm()).fold(f64::INFINITY, f64::min);
        if gap < RESOLVENT_TOL * (1.0 + s.norm()) {
            return Err(Error::SingularResolvent { s });
        }
        let n = self.n();
        let resolvent = CMat::identity(n, n) * s - a;
        let x = linalg::solve(&resolvent, &self.c.adjoint())?;
        Ok(CMat::identity(self.m(), self.m()) - &self.c * x)
    }

    /// Rational form of `Ξ(s)` over the common denominator `det(sI − A)`.
    ///
    /// Each numerator is itself a characteristic polynomial: by the matrix
    /// determinant lemma `det(sI − A − C_j†C_i) = det(sI − A)(1 − C_i(sI − A)⁻¹C_j†)`,
    /// so `num_ii = det(sI − A − C_i†C_i)` and `num_ij = det(sI − A − C_j†C_i) − det(sI − A)`.
    pub fn transfer_rational(&self) -> Result<RationalTF> {
        let a = self.drift_matrix().a;
        let n = self.n();
        let m = self.m();
        let den = Poly::characteristic(&a)?;
        let mut num = vec![vec![Poly::zero(); m]; m];
        for (i, row) in num.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let ci = self.c.row(i);
                let cj = self.c.row(j);
                let perturbed = &a + cj.adjoint() * ci;
                let p = Poly::characteristic(&perturbed)?;
                *entry = if i == j {
                    p
                } else {
                    let mut d = &p - &den;
                    d.coeffs[n] = re(0.0);
                    d
                };
            }
        }
        RationalTF::new(m, den, num)
    }

    /// Integrates the coherent-mean dynamics with fixed-step RK4 on `t_grid`.
    pub fn simulate_means<F>(&self, beta: F, t_grid: &[f64], initial_mean: &CVec) -> Result<MeanTrajectory>
    where
        F: Fn(f64) -> CVec,
    {
        if t_grid.len() < 2 {
            return Err(Error::EmptyGrid);
        }
        if let Some(k) = t_grid.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotoneGrid(k + 1));
        }
        if initial_mean.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "initial mean has length {}, expected {}",
                initial_mean.len(),
                self.n()
            )));
        }
        let a = self.drift_matrix().a;
        let b = self.c.adjoint() * re(-1.0);
        let input = |t: f64| -> Result<CVec> {
            let v = beta(t);
            if v.len() != self.m() {
                return Err(Error::DimensionMismatch(format!(
                    "input has length {}, expected {}",
                    v.len(),
                    self.m()
                )));
            }
            Ok(v)
        };
        let rhs = |x: &CVec, u: &CVec| -> CVec { &a * x + &b * u };

        let mut traj = MeanTrajectory {
            times: t_grid.to_vec(),
            input_means: Vec::with_capacity(t_grid.len()),
            system_means: Vec::with_capacity(t_grid.len()),
            output_means: Vec::with_capacity(t_grid.len()),
        };
        let mut x = initial_mean.clone();
        let mut u = input(t_grid[0])?;
        for k in 0..t_grid.len() {
            traj.output_means.push(&self.c * &x + &u);
            traj.system_means.push(x.clone());
            traj.input_means.push(u.clone());
            if k + 1 == t_grid.len() {
                break;
            }
            let t = t_grid[k];
            let h = t_grid[k + 1] - t;
            let u_mid = input(t + 0.5 * h)?;
            let u_next = input(t + h)?;
            let k1 = rhs(&x, &u);
            let k2 = rhs(&(&x + &k1 * re(0.5 * h)), &u_mid);
            let k3 = rhs(&(&x + &k2 * re(0.5 * h)), &u_mid);
            let k4 = rhs(&(&x + &k3 * re(h)), &u_next);
            x += (k1 + k2 * re(2.0) + k3 * re(2.0) + k4) * re(h / 6.0);
            u = u_next;
        }
        Ok(traj)
    }
}

/// `A = −iΩ − ½C†C`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftMatrix {
    pub a: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanTrajectory {
    pub times: Vec<f64>,
    pub input_means: Vec<CVec>,
    pub system_means: Vec<CVec>,
    pub output_means: Vec<CVec>,
}
