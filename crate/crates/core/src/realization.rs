//! Reconstruction of `(Ω, C)` from a transfer function.
//!
//! Two routes are provided:
//!
//! * **Classical realization.** Build the companion triple `(A₀, B₀, C₀)`,
//!   solve `P A₀ + A₀†P + C₀†C₀ = 0` for `P = T†T`, factor
//!   `P = U₀ΛU₀†` and map back through `T = U√ΛU₀†`. The consistency
//!   condition `P B₀ = −C₀†` detects transfer functions that no passive
//!   system can produce.
//! * **Direct reconstruction.** For single-input systems coupled at one
//!   node, read off `(θ, Ω₁₁, λ̃ᵢ, |E′ᵢ|)` from the coefficients of `Ξ(s)`.
//!   Every "limit at infinity" is evaluated exactly on polynomial
//!   coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::Cx;
use crate::linalg::{self, re, CMat, CVec, I};
use crate::model::PassiveSystem;
use crate::poly::Poly;

/// Monic-denominator tolerance.
pub const MONIC_TOL: f64 = 1e-12;
/// Relative tolerance on `P B₀ + C₀†` and on realness of recovered quantities.
pub const PASSIVITY_REL_TOL: f64 = 1e-8;
/// Poles closer than this (relative to the spectral scale) count as repeated.
pub const SIMPLE_POLE_TOL: f64 = 1e-7;
/// Lyapunov residual bound relative to `‖Q‖_max`.
pub const LYAPUNOV_REL_RESIDUAL: f64 = 1e-10;

/// Rational matrix `Ξ(s) = num(s)/den(s)` with a shared monic denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TfFile", into = "TfFile")]
pub struct RationalTF {
    pub m: usize,
    pub den: Poly,
    pub num: Vec<Vec<Poly>>,
}

/// On-disk layout: `{"m", "den": [c...], "num": [[[c...]]]}`, ascending coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfFile {
    pub m: usize,
    pub den: Vec<Cx>,
    pub num: Vec<Vec<Vec<Cx>>>,
}

impl TryFrom<TfFile> for RationalTF {
    type Error = Error;
    fn try_from(f: TfFile) -> Result<Self> {
        let num = f
            .num
            .into_iter()
            .map(|row| row.into_iter().map(Poly::from).collect())
            .collect();
        RationalTF::new(f.m, Poly::from(f.den), num)
    }
}

impl From<RationalTF> for TfFile {
    fn from(tf: RationalTF) -> Self {
        TfFile {
            m: tf.m,
            den: tf.den.into(),
            num: tf
                .num
                .into_iter()
                .map(|row| row.into_iter().map(Vec::<Cx>::from).collect())
                .collect(),
        }
    }
}

impl RationalTF {
    pub fn new(m: usize, den: Poly, num: Vec<Vec<Poly>>) -> Result<Self> {
        if m == 0 || num.len() != m || num.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch(format!("numerator must be {m}x{m}")));
        }
        let n = den.len_degree().ok_or(Error::NonMonic)?;
        if (den.coeffs[n] - re(1.0)).norm() > MONIC_TOL {
            return Err(Error::NonMonic);
        }
        let mut den = den;
        den.coeffs[n] = re(1.0);
        for p in num.iter().flatten() {
            if p.coeffs.iter().skip(n + 1).any(|z| z.norm() > 0.0) {
                return Err(Error::InvalidInput("numerator degree exceeds denominator degree".into()));
            }
        }
        let num = num
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|mut p| {
                        p.coeffs.resize(n + 1, re(0.0));
                        p
                    })
                    .collect()
            })
            .collect();
        Ok(RationalTF { m, den, num })
    }

    pub fn siso(num: Poly, den: Poly) -> Result<Self> {
        RationalTF::new(1, den, vec![vec![num]])
    }

    /// Degree of the common denominator.
    pub fn order(&self) -> usize {
        self.den.coeffs.len() - 1
    }

    pub fn is_siso(&self) -> bool {
        self.m == 1
    }

    pub fn eval(&self, s: Complex64) -> CMat {
        let d = self.den.eval(s);
        CMat::from_fn(self.m, self.m, |i, j| self.num[i][j].eval(s) / d)
    }

    /// `Ξ(∞)`: the `sⁿ` coefficients of the numerators.
    pub fn feedthrough(&self) -> CMat {
        let n = self.order();
        CMat::from_fn(self.m, self.m, |i, j| self.num[i][j].coeff(n))
    }

    /// Strictly proper part `N_ij = num_ij − Ξ_ij(∞)·den`, degree ≤ n − 1.
    pub fn strictly_proper(&self) -> Vec<Vec<Poly>> {
        let n = self.order();
        let d = self.feedthrough();
        (0..self.m)
            .map(|i| {
                (0..self.m)
                    .map(|j| {
                        let mut p = &self.num[i][j] - &self.den.scale(d[(i, j)]);
                        p.coeffs.truncate(n);
                        p
                    })
                    .collect()
            })
            .collect()
    }

    fn siso_parts(&self) -> Result<(&Poly, &Poly)> {
        if !self.is_siso() {
            return Err(Error::NotSiso);
        }
        Ok((&self.num[0][0], &self.den))
    }

    /// Removes numerator/denominator root pairs closer than `tol · max(1, |root|)`.
    pub fn cancel_common_factors(&self, tol: f64) -> Result<RationalTF> {
        let (num, den) = self.siso_parts()?;
        let num_t = num.trimmed(0.0);
        let lead = num_t.leading();
        if lead.norm() == 0.0 {
            return RationalTF::siso(Poly::zero(), Poly::one());
        }
        let mut zeros = num_t.roots()?;
        let mut poles = den.roots()?;
        let mut k = 0;
        while k < poles.len() {
            let p = poles[k];
            let best = zeros
                .iter()
                .enumerate()
                .map(|(i, z)| (i, (z - p).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((i, d)) if d <= tol * p.norm().max(1.0) => {
                    zeros.swap_remove(i);
                    poles.swap_remove(k);
                }
                _ => k += 1,
            }
        }
        RationalTF::siso(Poly::from_roots(&zeros).scale(lead), Poly::from_roots(&poles))
    }
}

/// `Ξ(s) = D + C₀(sI − A₀)⁻¹B₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalRealization {
    pub a0: CMat,
    pub b0: CMat,
    pub c0: CMat,
    /// Feedthrough `Ξ(∞)`; the identity for transfer functions of passive systems.
    pub d: CMat,
}

impl ClassicalRealization {
    pub fn eval(&self, s: Complex64) -> Result<CMat> {
        let n = self.a0.nrows();
        let x = linalg::solve(&(CMat::identity(n, n) * s - &self.a0), &self.b0)?;
        Ok(&self.d + &self.c0 * x)
    }
}

/// Factorization `P = T†T = U₀ΛU₀†`, `T₀ = √Λ U₀†`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFactorization {
    pub p: CMat,
    /// Eigenvalues of `P`, descending.
    pub lambda: Vec<f64>,
    pub u0: CMat,
    pub t0: CMat,
}

/// Identifiable parameters of a SISO system coupled at a single node.
///
/// The phases of `E′` are pure gauge and are not part of the parametrization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalParams {
    pub theta: f64,
    pub omega11: f64,
    /// Eigenvalues of the uncoupled block, ascending.
    pub lambdas: Vec<f64>,
    /// `|E′ᵢ|`, aligned with `lambdas`.
    pub e_abs: Vec<f64>,
}

impl CanonicalParams {
    /// Number of real parameters, `2n`.
    pub fn len(&self) -> usize {
        2 + self.lambdas.len() + self.e_abs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Arrowhead matrix `[[Ω₁₁, |E′|], [|E′|ᵀ, diag(λ̃)]]`.
    pub fn arrowhead(&self) -> CMat {
        let n = 1 + self.lambdas.len();
        let mut h = CMat::zeros(n, n);
        h[(0, 0)] = re(self.omega11);
        for (k, (&l, &e)) in self.lambdas.iter().zip(&self.e_abs).enumerate() {
            h[(k + 1, k + 1)] = re(l);
            h[(0, k + 1)] = re(e);
            h[(k + 1, 0)] = re(e);
        }
        h
    }
}

/// Knobs for the reconstruction routines.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReconstructOptions {
    /// Absolute tolerance on `P B₀ + C₀†`, on `Ξ(∞) − I`, and on the
    /// imaginary parts of quantities that must be real. `None` uses
    /// `PASSIVITY_REL_TOL` times the natural scale.
    pub passivity_tol: Option<f64>,
}

impl ReconstructOptions {
    pub fn with_tol(tol: f64) -> Self {
        ReconstructOptions { passivity_tol: Some(tol) }
    }

    fn tol(&self, scale: f64) -> f64 {
        self.passivity_tol.unwrap_or(PASSIVITY_REL_TOL * scale.max(1.0))
    }
}

/// Companion-form realization of a SISO transfer function.
pub fn companion_realization(tf: &RationalTF) -> Result<ClassicalRealization> {
    let (_, den) = tf.siso_parts()?;
    let n = tf.order();
    if n == 0 {
        return Err(Error::InvalidInput("transfer function has no dynamics".into()));
    }
    if (den.coeffs[n] - re(1.0)).norm() > MONIC_TOL {
        return Err(Error::NonMonic);
    }
    let strict = &tf.strictly_proper()[0][0];
    let mut a0 = CMat::zeros(n, n);
    for i in 0..n - 1 {
        a0[(i, i + 1)] = re(1.0);
    }
    for j in 0..n {
        a0[(n - 1, j)] = -den.coeffs[j];
    }
    let mut b0 = CMat::zeros(n, 1);
    b0[(n - 1, 0)] = re(1.0);
    let c0 = CMat::from_fn(1, n, |_, j| strict.coeff(j));
    Ok(ClassicalRealization { a0, b0, c0, d: tf.feedthrough() })
}

/// Solves `P A + A† P + Q = 0` for Hurwitz `A` by complex Bartels–Stewart.
pub fn solve_lyapunov(a: &CMat, q: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if a.ncols() != n || q.shape() != (n, n) {
        return Err(Error::DimensionMismatch("Lyapunov operands must be square and equal".into()));
    }
    let abscissa = linalg::spectral_abscissa(a)?;
    if !(abscissa < 0.0) {
        return Err(Error::NotHurwitz { abscissa });
    }
    let q_scale = linalg::max_abs(q);
    if linalg::hermitian_deviation(q) > 1e-12 * q_scale.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidInput("Q must be Hermitian".into()));
    }
    let (u, t) = linalg::schur(a)?;
    let solve_once = |rhs: &CMat| -> Result<CMat> {
        let f = u.adjoint() * rhs * &u;
        let y = triangular_lyapunov(&t, &f)?;
        Ok(linalg::hermitize(&(&u * y * u.adjoint())))
    };
    let mut p = solve_once(q)?;
    // one step of iterative refinement on the residual
    let residual = |p: &CMat| -> CMat { p * a + a.adjoint() * p + q };
    let r = residual(&p);
    if linalg::max_abs(&r) > 0.0 {
        p += solve_once(&r)?;
    }
    let res = linalg::max_abs(&residual(&p));
    if res > LYAPUNOV_REL_RESIDUAL * q_scale.max(f64::MIN_POSITIVE) && res > 0.0 {
        return Err(Error::SolverSingular(format!("Lyapunov residual {res:e} too large")));
    }
    Ok(p)
}

/// Solves `Y T + T† Y + F = 0` with `T` upper triangular, column by column.
fn triangular_lyapunov(t: &CMat, f: &CMat) -> Result<CMat> {
    let n = t.nrows();
    let mut y = CMat::zeros(n, n);
    for j in 0..n {
        let mut rhs = CVec::from_fn(n, |i, _| -f[(i, j)]);
        for k in 0..j {
            let tkj = t[(k, j)];
            for i in 0..n {
                rhs[i] -= y[(i, k)] * tkj;
            }
        }
        // (T† + t_jj I) y_j = rhs, lower triangular
        for i in 0..n {
            let mut acc = rhs[i];
            for l in 0..i {
                acc -= t[(l, i)].conj() * y[(l, j)];
            }
            let diag = t[(i, i)].conj() + t[(j, j)];
            if diag.norm() == 0.0 {
                return Err(Error::SolverSingular("λ̄ᵢ + λⱼ = 0".into()));
            }
            y[(i, j)] = acc / diag;
        }
    }
    Ok(y)
}

/// Maps a classical realization to a passive system.
///
/// `u` picks the representative of the equivalence class (identity when `None`).
pub fn reconstruct_passive(
    real: &ClassicalRealization,
    u: Option<&CMat>,
    opts: ReconstructOptions,
) -> Result<(PassiveSystem, GaugeFactorization)> {
    let n = real.a0.nrows();
    let m = real.c0.nrows();
    let tol = opts.tol(linalg::max_abs(&real.c0));
    let d_res = linalg::max_abs_diff(&real.d, &CMat::identity(m, m));
    if d_res > opts.passivity_tol.unwrap_or(PASSIVITY_REL_TOL) {
        return Err(Error::NotPassiveTf { residual: d_res });
    }
    let q = real.c0.adjoint() * &real.c0;
    let p = solve_lyapunov(&real.a0, &q)?;
    let consistency = linalg::max_abs(&(&p * &real.b0 + real.c0.adjoint()));
    if consistency > tol {
        return Err(Error::NotPassiveTf { residual: consistency });
    }
    let (lambda, u0) = linalg::hermitian_eigh(&p);
    if lambda.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotMinimal);
    }
    let sqrt_l = CMat::from_diagonal(&CVec::from_iterator(n, lambda.iter().map(|l| re(l.sqrt()))));
    let inv_sqrt_l = CMat::from_diagonal(&CVec::from_iterator(n, lambda.iter().map(|l| re(1.0 / l.sqrt()))));
    let rotated = u0.adjoint() * &real.a0 * &u0;
    let similar = &sqrt_l * &rotated * &inv_sqrt_l;
    let omega0 = (&similar - &inv_sqrt_l * rotated.adjoint() * &sqrt_l) * (I * 0.5);
    let c = &real.c0 * &u0 * &inv_sqrt_l;
    let (omega, c) = match u {
        None => (omega0, c),
        Some(u) => {
            if u.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!("gauge must be {n}x{n}")));
            }
            let deviation = linalg::unitarity_deviation(u);
            if deviation > crate::identifiability::UNITARY_TOL {
                return Err(Error::NotUnitary { deviation });
            }
            (u * omega0 * u.adjoint(), c * u.adjoint())
        }
    };
    let sys = PassiveSystem::new(linalg::hermitize(&omega), c)?;
    let t0 = &sqrt_l * u0.adjoint();
    Ok((sys, GaugeFactorization { p, lambda, u0, t0 }))
}

/// Reads `(θ, Ω₁₁, λ̃ᵢ, |E′ᵢ|)` off a SISO transfer function.
///
/// With `Ξ = 1 + N/D`, `θ = −lead(N)`; dividing `D` by the monic `Ñ = N/lead(N)`
/// gives `D/Ñ = s + (iΩ₁₁ + θ/2) + r/Ñ`, and `Ξ̃ = r/Ñ = Σ |E′ᵢ|²/(s + iλ̃ᵢ)`.
pub fn direct_reconstruction(tf: &RationalTF, opts: ReconstructOptions) -> Result<CanonicalParams> {
    let (_, den) = tf.siso_parts()?;
    let n = tf.order();
    if n == 0 {
        return Err(Error::InvalidInput("transfer function has no dynamics".into()));
    }
    let feed = tf.feedthrough()[(0, 0)];
    let feed_tol = opts.passivity_tol.unwrap_or(PASSIVITY_REL_TOL);
    if (feed - re(1.0)).norm() > feed_tol {
        return Err(Error::NotPassiveTf { residual: (feed - re(1.0)).norm() });
    }
    let strict = &tf.strictly_proper()[0][0];
    let lead = strict.coeff(n - 1);
    let theta_c = -lead;
    let tol = opts.tol(theta_c.norm());
    if theta_c.re <= 0.0 || theta_c.im.abs() > tol {
        return Err(Error::NotPassiveTf { residual: (theta_c - re(theta_c.norm())).norm() });
    }
    let theta = theta_c.re;
    let monic = strict.scale(re(1.0) / lead);
    let (quotient, remainder) = den.div_rem(&monic);
    let q0 = quotient.coeff(0);
    let omega11_c = (q0 - theta * 0.5) * (-I);
    if omega11_c.im.abs() > tol {
        return Err(Error::NotPassiveTf { residual: omega11_c.im.abs() });
    }
    let omega11 = omega11_c.re;

    let poles = monic.roots()?;
    let scale = poles.iter().map(|p| p.norm()).fold(1.0, f64::max);
    for (i, a) in poles.iter().enumerate() {
        for b in &poles[i + 1..] {
            if (a - b).norm() < SIMPLE_POLE_TOL * scale {
                return Err(Error::DegenerateSpectrum(*a, *b));
            }
        }
    }
    let dmonic = monic.derivative();
    let residue_tol = opts.tol(theta);
    let mut modes = Vec::with_capacity(poles.len());
    for p in &poles {
        let r = remainder.eval(*p) / dmonic.eval(*p);
        if r.re < -residue_tol || r.im.abs() > residue_tol {
            return Err(Error::NegativeResidue(r));
        }
        let lambda = I * p;
        if lambda.im.abs() > tol * scale {
            return Err(Error::NotPassiveTf { residual: lambda.im.abs() });
        }
        modes.push((lambda.re, r.re.max(0.0).sqrt()));
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(CanonicalParams {
        theta,
        omega11,
        lambdas: modes.iter().map(|m| m.0).collect(),
        e_abs: modes.iter().map(|m| m.1).collect(),
    })
}

/// Spectrum of `Ω` implied by canonical parameters, ascending.
pub fn eigenvalues_from_canonical(p: &CanonicalParams) -> Vec<f64> {
    linalg::hermitian_eigenvalues(&p.arrowhead())
}

/// Leading-moment stage of MIMO reconstruction.
///
/// Returns `C̃₀`, the positive square root of `C̃C̃† = lim s(I − Ξ)`, and
/// `ŨΩ₁₁Ũ† = i C̃₀⁻¹M₁C̃₀⁻¹ + (i/2)C̃₀²`, where `M₁ = CAC†` is the second
/// expansion coefficient of `I − Ξ` at infinity.
pub fn mimo_coupling_gram(tf: &RationalTF) -> Result<(CMat, CMat)> {
    let n = tf.order();
    let m = tf.m;
    if n < m {
        return Err(Error::RankDeficientCoupling);
    }
    let strict = tf.strictly_proper();
    let an1 = tf.den.coeff(n - 1);
    // N/D = h₁/s + h₂/s² + …, h₁ = N_{n−1}, h₂ = N_{n−2} − a_{n−1}h₁
    let h1 = CMat::from_fn(m, m, |i, j| strict[i][j].coeff(n - 1));
    let h2 = CMat::from_fn(m, m, |i, j| {
        let lower = if n >= 2 { strict[i][j].coeff(n - 2) } else { re(0.0) };
        lower - an1 * strict[i][j].coeff(n - 1)
    });
    let m0 = -h1;
    let m1 = -h2;
    let gram = linalg::hermitize(&m0);
    let w = linalg::hermitian_eigenvalues(&gram);
    let top = w.last().copied().unwrap_or(0.0);
    if w[0] <= 1e-12 * top.max(f64::MIN_POSITIVE) || top <= 0.0 {
        return Err(Error::RankDeficientCoupling);
    }
    let c0 = linalg::hermitian_sqrt(&gram);
    let c0_inv = c0
        .clone()
        .try_inverse()
        .ok_or(Error::RankDeficientCoupling)?;
    let block = (&c0_inv * m1 * &c0_inv) * I + (&c0 * &c0) * (I * 0.5);
    Ok((c0, linalg::hermitize(&block)))
}
