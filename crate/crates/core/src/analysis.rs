//! Controllability, observability, minimality and stability of passive systems.
//!
//! For passive systems the two rank conditions coincide, and a minimal
//! system is always Hurwitz; [`StructureReport`] records all of them so the
//! equivalences can be checked rather than assumed.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{self, re, CMat};
use crate::model::PassiveSystem;

/// Eigenvalues within this (relative) distance of the imaginary axis count as marginal.
pub const HURWITZ_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub controllable: bool,
    pub observable: bool,
    pub minimal: bool,
    pub hurwitz: bool,
    pub ctrb_rank: usize,
    pub obsv_rank: usize,
    pub spectral_abscissa: f64,
}

/// `−[C†, AC†, …, AⁿC†]`, an n×(n+1)m matrix.
pub fn controllability_matrix(sys: &PassiveSystem) -> CMat {
    let n = sys.n();
    let m = sys.m();
    let a = sys.drift_matrix().a;
    let mut out = CMat::zeros(n, (n + 1) * m);
    let mut block = sys.c().adjoint() * re(-1.0);
    for k in 0..=n {
        out.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = &a * block;
    }
    out
}

/// `[C; CA; …; CAⁿ]`, an (n+1)m×n matrix.
pub fn observability_matrix(sys: &PassiveSystem) -> CMat {
    let n = sys.n();
    let m = sys.m();
    let a = sys.drift_matrix().a;
    let mut out = CMat::zeros((n + 1) * m, n);
    let mut block = sys.c().clone();
    for k in 0..=n {
        out.view_mut((k * m, 0), (m, n)).copy_from(&block);
        block *= &a;
    }
    out
}

/// Rank and stability summary. `rank_tol = None` uses
/// `σ_max · max(rows, cols) · 1e-12` per matrix.
pub fn structure_report(sys: &PassiveSystem, rank_tol: Option<f64>) -> Result<StructureReport> {
    let n = sys.n();
    let ctrb = controllability_matrix(sys);
    let obsv = observability_matrix(sys);
    let ctrb_rank = linalg::numerical_rank(&ctrb, rank_tol.unwrap_or_else(|| linalg::default_rank_tol(&ctrb)));
    // full column rank is the meaningful condition for the tall stack
    let obsv_rank = linalg::numerical_rank(&obsv, rank_tol.unwrap_or_else(|| linalg::default_rank_tol(&obsv)));
    let a = sys.drift_matrix().a;
    let spectral_abscissa = linalg::spectral_abscissa(&a)?;
    let controllable = ctrb_rank == n;
    let observable = obsv_rank == n;
    Ok(StructureReport {
        controllable,
        observable,
        minimal: controllable && observable,
        hurwitz: spectral_abscissa < -HURWITZ_MARGIN * linalg::max_abs(&a).max(1.0),
        ctrb_rank,
        obsv_rank,
        spectral_abscissa,
    })
}

pub fn is_minimal(sys: &PassiveSystem) -> Result<bool> {
    Ok(structure_report(sys, None)?.minimal)
}
