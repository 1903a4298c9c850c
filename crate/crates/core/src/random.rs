//! Random ensembles of Hermitian matrices, unitaries, and passive systems.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{c, re, CMat};
use crate::model::PassiveSystem;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2)
}

pub fn hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = ginibre(n, n, rng);
    (&g + g.adjoint()) * re(0.5)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase of `R`'s diagonal removed).
pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let qr = ginibre(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { re(1.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `diag(I_k, V)` with `V` Haar on the remaining `n − k` modes; leaves any `C`
/// supported on the first `k` modes invariant (`CT† = C`).
pub fn block_unitary<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> CMat {
    let mut t = CMat::identity(n, n);
    if n > k {
        let v = unitary(n - k, rng);
        t.view_mut((k, k), (n - k, n - k)).copy_from(&v);
    }
    t
}

/// Random Hermitian `Ω` and Gaussian `C` (m×n).
pub fn passive_system<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> PassiveSystem {
    PassiveSystem::new(hermitian(n, rng), ginibre(m, n, rng)).expect("random system is valid")
}

/// Random system with `C` supported on the first `support` modes.
pub fn passive_system_with_support<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    support: usize,
    rng: &mut R,
) -> PassiveSystem {
    let mut cm = CMat::zeros(m, n);
    cm.view_mut((0, 0), (m, support)).copy_from(&ginibre(m, support, rng));
    PassiveSystem::new(hermitian(n, rng), cm).expect("random system is valid")
}

/// SISO system with `C = (√θ, 0, …, 0)` and random real-symmetric or Hermitian `Ω`.
pub fn siso_first_node<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> PassiveSystem {
    let mut cm = CMat::zeros(1, n);
    cm[(0, 0)] = re(theta.sqrt());
    PassiveSystem::new(hermitian(n, rng), cm).expect("random system is valid")
}
