//! Graph-structured Hamiltonians and the infection criterion.
//!
//! `Ω = Σ_{(i,j)∈E} ω_ij (e_i e_jᵀ + e_j e_iᵀ)` with real weights, coupled to the
//! fields through the accessible vertex set. Infection rule: start with the
//! accessible vertices infected; an infected vertex with exactly one
//! non-infected neighbour infects it. If every vertex ends up infected and the
//! system is minimal, `Ω` is identifiable up to the sign of each edge weight.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};
use crate::json::{matrix_to_rows, rows_to_matrix, Cx};
use crate::linalg::{self, re, CMat};
use crate::model::PassiveSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkFile", into = "NetworkFile")]
pub struct NetworkModel {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    accessible: Vec<usize>,
    coupling: CMat,
    detunings: Option<Vec<f64>>,
}

/// On-disk layout (0-based indices).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub accessible: Vec<usize>,
    pub coupling: Vec<Vec<Cx>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detunings: Option<Vec<f64>>,
}

impl TryFrom<NetworkFile> for NetworkModel {
    type Error = Error;
    fn try_from(f: NetworkFile) -> Result<Self> {
        let coupling = rows_to_matrix(&f.coupling, f.n)?;
        NetworkModel::new(f.n, f.edges, f.accessible, coupling, f.detunings)
    }
}

impl From<NetworkModel> for NetworkFile {
    fn from(net: NetworkModel) -> Self {
        NetworkFile {
            n: net.n,
            edges: net.edges,
            accessible: net.accessible,
            coupling: matrix_to_rows(&net.coupling),
            detunings: net.detunings,
        }
    }
}

impl NetworkModel {
    pub fn new(
        n: usize,
        edges: Vec<(usize, usize, f64)>,
        accessible: Vec<usize>,
        coupling: CMat,
        detunings: Option<Vec<f64>>,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidNetwork(msg));
        if n == 0 {
            return invalid("network has no vertices".into());
        }
        let mut seen = BTreeSet::new();
        for &(i, j, w) in &edges {
            if i >= n || j >= n {
                return invalid(format!("edge ({i}, {j}) out of range"));
            }
            if i == j {
                return invalid(format!("self-loop at vertex {i}"));
            }
            if !w.is_finite() {
                return invalid(format!("edge ({i}, {j}) has non-finite weight"));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return invalid(format!("duplicate edge ({i}, {j})"));
            }
        }
        let mut acc: Vec<usize> = accessible.clone();
        acc.sort_unstable();
        acc.dedup();
        if acc.is_empty() {
            return invalid("accessible set is empty".into());
        }
        if acc.len() != accessible.len() || acc.iter().any(|&v| v >= n) {
            return invalid("accessible set has duplicates or out-of-range vertices".into());
        }
        if coupling.ncols() != n || coupling.nrows() == 0 || coupling.nrows() > n {
            return invalid(format!(
                "coupling must be m x {n} with 1 <= m <= {n}, got {}x{}",
                coupling.nrows(),
                coupling.ncols()
            ));
        }
        for j in (0..n).filter(|j| acc.binary_search(j).is_err()) {
            if coupling.column(j).iter().any(|z| z.norm() != 0.0) {
                return invalid(format!("coupling has support on inaccessible vertex {j}"));
            }
        }
        let cc = coupling.adjoint() * &coupling;
        let restricted = CMat::from_fn(acc.len(), acc.len(), |a, b| cc[(acc[a], acc[b])]);
        let w = linalg::hermitian_eigenvalues(&restricted);
        let top = w.last().copied().unwrap_or(0.0);
        if !(w[0] > 1e-12 * top) {
            return invalid("coupling is not strictly positive on the accessible subspace".into());
        }
        if let Some(d) = &detunings {
            if d.len() != n || d.iter().any(|x| !x.is_finite()) {
                return invalid("detunings must be n finite reals".into());
            }
        }
        Ok(NetworkModel { n, edges, accessible: acc, coupling, detunings })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn accessible(&self) -> &[usize] {
        &self.accessible
    }

    pub fn coupling(&self) -> &CMat {
        &self.coupling
    }

    /// Diagonal detunings are an extension of the purely off-diagonal edge model.
    pub fn has_detunings(&self) -> bool {
        self.detunings.as_ref().is_some_and(|d| d.iter().any(|&x| x != 0.0))
    }

    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, _) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn omega(&self) -> CMat {
        let mut omega = CMat::zeros(self.n, self.n);
        for &(i, j, w) in &self.edges {
            omega[(i, j)] += re(w);
            omega[(j, i)] += re(w);
        }
        if let Some(d) = &self.detunings {
            for (k, &x) in d.iter().enumerate() {
                omega[(k, k)] += re(x);
            }
        }
        omega
    }

    pub fn to_system(&self) -> PassiveSystem {
        PassiveSystem::new(self.omega(), self.coupling.clone()).expect("network invariants imply a valid system")
    }

    /// Same graph and coupling with new edge weights (in edge order).
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::DimensionMismatch("one weight per edge".into()));
        }
        let edges = self.edges.iter().zip(weights).map(|(&(i, j, _), &w)| (i, j, w)).collect();
        NetworkModel::new(self.n, edges, self.accessible.clone(), self.coupling.clone(), self.detunings.clone())
    }
}

pub fn omega_from_network(net: &NetworkModel) -> PassiveSystem {
    net.to_system()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOrder {
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfectionStep {
    pub infected: usize,
    pub via: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfectionTrace {
    pub infecting: bool,
    pub scan_order: ScanOrder,
    pub steps: Vec<InfectionStep>,
    pub residual: Vec<usize>,
}

pub fn infection_closure(net: &NetworkModel) -> InfectionTrace {
    infection_closure_ordered(net, ScanOrder::Ascending)
}

pub fn infection_closure_ordered(net: &NetworkModel, order: ScanOrder) -> InfectionTrace {
    let adj = net.neighbours();
    let mut infected = vec![false; net.n];
    for &v in &net.accessible {
        infected[v] = true;
    }
    let scan: Vec<usize> = match order {
        ScanOrder::Ascending => (0..net.n).collect(),
        ScanOrder::Descending => (0..net.n).rev().collect(),
    };
    let mut steps = Vec::new();
    loop {
        let mut progress = false;
        for &v in &scan {
            if !infected[v] {
                continue;
            }
            let mut clean = adj[v].iter().filter(|&&w| !infected[w]);
            if let (Some(&w), None) = (clean.next(), clean.next()) {
                infected[w] = true;
                steps.push(InfectionStep { infected: w, via: v });
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    let residual: Vec<usize> = (0..net.n).filter(|&v| !infected[v]).collect();
    InfectionTrace { infecting: residual.is_empty(), scan_order: order, steps, residual }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NotApplicableReason {
    NotInfecting,
    NotMinimal,
}

/// Outcome of the infection criterion. `NotApplicable` makes no claim
/// about identifiability either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason")]
pub enum InfectionVerdict {
    IdentifiableByInfection,
    NotApplicable(NotApplicableReason),
}

pub fn infection_identifiability_verdict(net: &NetworkModel, rank_tol: Option<f64>) -> Result<InfectionVerdict> {
    if !infection_closure(net).infecting {
        return Ok(InfectionVerdict::NotApplicable(NotApplicableReason::NotInfecting));
    }
    if !analysis::structure_report(&net.to_system(), rank_tol)?.minimal {
        return Ok(InfectionVerdict::NotApplicable(NotApplicableReason::NotMinimal));
    }
    Ok(InfectionVerdict::IdentifiableByInfection)
}
