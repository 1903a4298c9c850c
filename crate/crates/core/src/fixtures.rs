//! Reference systems used throughout the tests and the CLI examples:
//! a three-node chain, a three-node tree with a detuned branch, a four-node
//! ring, and the two-node SISO transfer function `1 + c₁s/(s² + a₁s + a₀)`.
//! In every network only node 0 is coupled, with `C = [√(2κ), 0, …]`.

use crate::linalg::{re, CMat};
use crate::model::PassiveSystem;
use crate::network::NetworkModel;
use crate::poly::Poly;
use crate::realization::RationalTF;

fn first_node_coupling(n: usize, kappa: f64) -> CMat {
    let mut c = CMat::zeros(1, n);
    c[(0, 0)] = re((2.0 * kappa).sqrt());
    c
}

pub fn chain3_network(kappa: f64, t1: f64, t2: f64) -> NetworkModel {
    NetworkModel::new(3, vec![(0, 1, t1), (1, 2, t2)], vec![0], first_node_coupling(3, kappa), None)
        .expect("valid chain")
}

pub fn tree3_network(kappa: f64, t1: f64, t2: f64, delta: f64) -> NetworkModel {
    NetworkModel::new(
        3,
        vec![(0, 1, t1), (0, 2, t2)],
        vec![0],
        first_node_coupling(3, kappa),
        Some(vec![0.0, delta, 0.0]),
    )
    .expect("valid tree")
}

pub fn ring4_network(kappa: f64, t: [f64; 4]) -> NetworkModel {
    NetworkModel::new(
        4,
        vec![(0, 1, t[0]), (0, 2, t[1]), (1, 3, t[2]), (2, 3, t[3])],
        vec![0],
        first_node_coupling(4, kappa),
        None,
    )
    .expect("valid ring")
}

pub fn chain3(kappa: f64, t1: f64, t2: f64) -> PassiveSystem {
    chain3_network(kappa, t1, t2).to_system()
}

pub fn tree3(kappa: f64, t1: f64, t2: f64, delta: f64) -> PassiveSystem {
    tree3_network(kappa, t1, t2, delta).to_system()
}

pub fn ring4(kappa: f64, t: [f64; 4]) -> PassiveSystem {
    ring4_network(kappa, t).to_system()
}

/// `Ξ(s) = 1 + c₁s/(s² + a₁s + a₀)`, stored as `(s² + (a₁ + c₁)s + a₀)/(s² + a₁s + a₀)`.
pub fn two_node_tf(a0: f64, a1: f64, c1: f64) -> RationalTF {
    let den = Poly::from_real(&[a0, a1, 1.0]);
    let num = Poly::from_real(&[a0, a1 + c1, 1.0]);
    RationalTF::siso(num, den).expect("valid two-node transfer function")
}
