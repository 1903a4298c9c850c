//! Dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Largest entry modulus, `‖M‖_max`.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * re(0.5)
}

/// `‖T†T − I‖_max`.
pub fn unitarity_deviation(t: &CMat) -> f64 {
    let n = t.ncols();
    max_abs_diff(&(t.adjoint() * t), &CMat::identity(n, n))
}

/// Complex Schur form `M = Q T Q†` with `T` upper triangular.
pub fn schur(m: &CMat) -> Result<(CMat, CMat)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((CMat::zeros(0, 0), CMat::zeros(0, 0)));
    }
    let s = Schur::try_new(m.clone(), f64::EPSILON, 1000 * n.max(10))
        .ok_or_else(|| Error::SolverSingular("Schur iteration did not converge".into()))?;
    Ok(s.unpack())
}

/// Eigenvalues of a general complex matrix, taken from the diagonal of its Schur form.
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let (_, t) = schur(m)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Max real part of the spectrum.
pub fn spectral_abscissa(m: &CMat) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Hermitian eigendecomposition `M = V diag(w) V†`.
///
/// Eigenvalues are sorted in descending order. Each eigenvector is rescaled
/// so that its largest-modulus component is real and positive, which makes the
/// factorization deterministic for non-degenerate spectra.
pub fn hermitian_eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut vecs = CMat::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[j]);
        let col = eig.eigenvectors.column(j);
        let pivot = col
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(re(1.0));
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { re(1.0) };
        for i in 0..n {
            vecs[(i, k)] = col[i] * phase;
        }
    }
    (vals, vecs)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut w: Vec<f64> = SymmetricEigen::new(hermitize(m)).eigenvalues.iter().copied().collect();
    w.sort_by(f64::total_cmp);
    w
}

/// Singular values, descending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(m.clone(), false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Default SVD rank threshold: `σ_max · max(rows, cols) · 1e-12`.
pub fn default_rank_tol(m: &CMat) -> f64 {
    let smax = singular_values(m).first().copied().unwrap_or(0.0);
    smax * m.nrows().max(m.ncols()) as f64 * 1e-12
}

pub fn numerical_rank(m: &CMat, tol: f64) -> usize {
    singular_values(m).iter().filter(|&&s| s > tol).count()
}

/// Moore-Penrose pseudo-inverse with relative cutoff.
pub fn pinv(m: &CMat) -> Result<CMat> {
    let tol = default_rank_tol(m);
    SVD::new(m.clone(), true, true)
        .pseudo_inverse(tol)
        .map_err(|e| Error::SolverSingular(e.to_string()))
}

/// Solve `M x = b` by LU with partial pivoting.
pub fn solve(m: &CMat, b: &CMat) -> Result<CMat> {
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::SolverSingular("singular linear system".into()))
}

/// Positive square root of a Hermitian positive semidefinite matrix.
pub fn hermitian_sqrt(m: &CMat) -> CMat {
    let (w, v) = hermitian_eigh(m);
    let d = CMat::from_diagonal(&CVec::from_iterator(w.len(), w.iter().map(|&x| re(x.max(0.0).sqrt()))));
    &v * d * v.adjoint()
}

/// Sorts complex numbers lexicographically by (re, im); used to compare spectra.
pub fn sort_complex(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Max distance between two spectra under optimal greedy matching.
///
/// Each entry of `a` is paired with the closest unused entry of `b`.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("equal lengths");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Max distance between two sorted real spectra.
pub fn real_spectrum_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_is_sorted_and_phase_fixed() {
        let m = CMat::from_row_slice(2, 2, &[re(2.0), c(0.0, 1.0), c(0.0, -1.0), re(2.0)]);
        let (w, v) = hermitian_eigh(&m);
        assert!((w[0] - 3.0).abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12);
        for k in 0..2 {
            let pivot = v.column(k).iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
            assert!(pivot.im.abs() < 1e-12 && pivot.re > 0.0);
        }
        let rec = &v * CMat::from_diagonal(&CVec::from_vec(vec![re(w[0]), re(w[1])])) * v.adjoint();
        assert!(max_abs_diff(&rec, &m) < 1e-12);
    }

    #[test]
    fn rank_of_outer_product() {
        let u = CMat::from_column_slice(3, 1, &[re(1.0), c(0.0, 2.0), re(-1.0)]);
        let m = &u * u.adjoint();
        assert_eq!(numerical_rank(&m, default_rank_tol(&m)), 1);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = CMat::from_row_slice(2, 2, &[re(4.0), c(1.0, 1.0), c(1.0, -1.0), re(3.0)]);
        let r = hermitian_sqrt(&m);
        assert!(max_abs_diff(&(&r * &r), &m) < 1e-12);
    }

    #[test]
    fn spectrum_matching_is_order_free() {
        let a = [re(1.0), re(-1.0), c(0.0, 2.0)];
        let b = [c(0.0, 2.0), re(1.0), re(-1.0)];
        assert!(spectrum_distance(&a, &b) < 1e-15);
    }
}
