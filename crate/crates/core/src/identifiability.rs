//! Markov-parameter identifiability tests and unitary equivalence of minimal systems.
//!
//! Two minimal passive systems share a transfer function exactly when
//! `Ω₂ = TΩ₁T†`, `C₂ = C₁T†` for a unitary `T`. The unitary is recovered
//! from the observability stacks, which satisfy `𝓞₂ = 𝓞₁T†`.

use serde::{Deserialize, Serialize};

use crate::analysis::{self, observability_matrix};
use crate::error::{Error, Result};
use crate::linalg::{self, re, CMat};
use crate::model::PassiveSystem;

/// Relative tolerance used when the caller does not supply one.
pub const DEFAULT_REL_TOL: f64 = 1e-8;
/// Unitarity required of a gauge passed to [`gauge_transform`].
pub const UNITARY_TOL: f64 = 1e-10;

/// `params[k] = C Ωᵏ C†` for `k = 0..=kmax`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovSequence {
    #[serde(with = "markov_serde")]
    pub params: Vec<CMat>,
    pub kmax: usize,
}

mod markov_serde {
    use super::*;
    use crate::json::{matrix_to_rows, rows_to_matrix, Cx};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(matrix_to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMat>, D::Error> {
        let raw: Vec<Vec<Vec<Cx>>> = Vec::deserialize(d)?;
        raw.iter()
            .map(|rows| rows_to_matrix(rows, rows.first().map_or(0, Vec::len)))
            .collect::<Result<_>>()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    #[serde(with = "crate::json::opt_cmat")]
    pub gauge: Option<CMat>,
    /// Largest deviation among unitarity, `Ω₂ − TΩ₁T†` and `C₂ − C₁T†`; for
    /// inequivalent systems, the largest Markov-parameter mismatch.
    pub residual: f64,
}

fn moments(c: &CMat, generator: &CMat, kmax: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(kmax + 1);
    let mut right = c.adjoint();
    for _ in 0..=kmax {
        out.push(c * &right);
        right = generator * right;
    }
    out
}

pub fn markov_sequence(sys: &PassiveSystem, kmax: usize) -> MarkovSequence {
    MarkovSequence {
        params: moments(sys.c(), sys.omega(), kmax),
        kmax,
    }
}

/// `C Aᵏ C†` for `k = 0..=kmax`; the expansion coefficients of `Ξ(s)` at infinity.
pub fn drift_markov_sequence(sys: &PassiveSystem, kmax: usize) -> Vec<CMat> {
    moments(sys.c(), &sys.drift_matrix().a, kmax)
}

/// Largest mismatch between two moment sequences, each term measured
/// against `tol` (absolute) or `DEFAULT_REL_TOL · max(1, ‖M_k‖)`.
/// Returns whether any term differs, and the largest absolute difference.
fn compare_moments(a: &[CMat], b: &[CMat], tol: Option<f64>) -> (bool, f64) {
    let mut differs = false;
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let diff = linalg::max_abs_diff(x, y);
        let scale = 1.0_f64.max(linalg::max_abs(x)).max(linalg::max_abs(y));
        let bound = tol.unwrap_or(DEFAULT_REL_TOL * scale);
        if diff > bound {
            differs = true;
        }
        worst = worst.max(diff);
    }
    (differs, worst)
}

fn check_ports(sys1: &PassiveSystem, sys2: &PassiveSystem) -> Result<()> {
    if sys1.m() != sys2.m() {
        return Err(Error::DimensionMismatch(format!(
            "systems have {} and {} fields",
            sys1.m(),
            sys2.m()
        )));
    }
    Ok(())
}

/// True iff some `C Ωᵏ C†` with `k ≤ kmax` differs by more than the tolerance.
/// `kmax` defaults to `2·max(n₁, n₂)`.
pub fn markov_distinguishable(
    sys1: &PassiveSystem,
    sys2: &PassiveSystem,
    kmax: Option<usize>,
    tol: Option<f64>,
) -> Result<bool> {
    check_ports(sys1, sys2)?;
    let kmax = kmax.unwrap_or(2 * sys1.n().max(sys2.n()));
    let (differs, _) = compare_moments(
        &markov_sequence(sys1, kmax).params,
        &markov_sequence(sys2, kmax).params,
        tol,
    );
    Ok(differs)
}

/// Same test on `C Aᵏ C†`; agreement up to `k = 2n` certifies equal transfer functions.
pub fn transfer_distinguishable(
    sys1: &PassiveSystem,
    sys2: &PassiveSystem,
    kmax: Option<usize>,
    tol: Option<f64>,
) -> Result<bool> {
    check_ports(sys1, sys2)?;
    let kmax = kmax.unwrap_or(2 * sys1.n().max(sys2.n()));
    let (differs, _) = compare_moments(
        &drift_markov_sequence(sys1, kmax),
        &drift_markov_sequence(sys2, kmax),
        tol,
    );
    Ok(differs)
}

/// `(TΩT†, CT†)`.
pub fn gauge_transform(sys: &PassiveSystem, t: &CMat) -> Result<PassiveSystem> {
    if t.nrows() != sys.n() || t.ncols() != sys.n() {
        return Err(Error::DimensionMismatch(format!(
            "gauge is {}x{}, system has {} modes",
            t.nrows(),
            t.ncols(),
            sys.n()
        )));
    }
    let deviation = linalg::unitarity_deviation(t);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let omega = linalg::hermitize(&(t * sys.omega() * t.adjoint()));
    PassiveSystem::new(omega, sys.c() * t.adjoint())
}

/// Decides equivalence of two minimal systems and recovers the gauge `T`.
///
/// `tol` is a relative tolerance (default `1e-8`) applied to the Markov
/// comparison and to the residual of the recovered relations.
pub fn find_gauge(sys1: &PassiveSystem, sys2: &PassiveSystem, tol: Option<f64>) -> Result<EquivalenceVerdict> {
    check_ports(sys1, sys2)?;
    if !analysis::is_minimal(sys1)? || !analysis::is_minimal(sys2)? {
        return Err(Error::NotMinimal);
    }
    let rel = tol.unwrap_or(DEFAULT_REL_TOL);
    if sys1.n() != sys2.n() {
        return Ok(EquivalenceVerdict { equivalent: false, gauge: None, residual: f64::INFINITY });
    }
    let n = sys1.n();
    let m = sys1.m();
    let kmax = 2 * n;
    let mk1 = drift_markov_sequence(sys1, kmax);
    let mk2 = drift_markov_sequence(sys2, kmax);
    let mut mismatch: f64 = 0.0;
    let mut differs = false;
    for (x, y) in mk1.iter().zip(&mk2) {
        let scale = 1.0_f64.max(linalg::max_abs(x)).max(linalg::max_abs(y));
        let d = linalg::max_abs_diff(x, y) / scale;
        mismatch = mismatch.max(d);
        differs |= d > rel;
    }
    if differs {
        return Ok(EquivalenceVerdict { equivalent: false, gauge: None, residual: mismatch });
    }

    // Rescale block k of both stacks by ρ^{-k}; the relation 𝓞₂ = 𝓞₁T† is unchanged.
    let a1 = sys1.drift_matrix().a;
    let a2 = sys2.drift_matrix().a;
    let rho = 1.0_f64.max(a1.norm()).max(a2.norm());
    let mut o1 = observability_matrix(sys1);
    let mut o2 = observability_matrix(sys2);
    for k in 0..=n {
        let f = re(rho.powi(-(k as i32)));
        for r in k * m..(k + 1) * m {
            o1.row_mut(r).scale_mut(f.re);
            o2.row_mut(r).scale_mut(f.re);
        }
    }
    let t_dag = linalg::pinv(&o1)? * &o2;
    let t = t_dag.adjoint();

    let omega_scale = 1.0_f64.max(linalg::max_abs(sys1.omega()));
    let c_scale = 1.0_f64.max(linalg::max_abs(sys1.c()));
    let unitary_res = linalg::unitarity_deviation(&t);
    let omega_res = linalg::max_abs_diff(sys2.omega(), &(&t * sys1.omega() * &t_dag)) / omega_scale;
    let c_res = linalg::max_abs_diff(sys2.c(), &(sys1.c() * &t_dag)) / c_scale;
    let residual = unitary_res.max(omega_res).max(c_res);
    Ok(EquivalenceVerdict {
        equivalent: residual <= rel,
        gauge: Some(t),
        residual,
    })
}
