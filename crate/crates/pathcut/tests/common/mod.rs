//! Shared helpers for the integration suites: seeded random instances and
//! independent oracles (exhaustive cut scan, dense mixer exponential).
#![allow(dead_code)] // each test target uses a different subset

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use pathcut::graph::{ArcLabel, Graph, Weight};
use pathcut::sim::MixerTopology;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random instance with <= 8 vertices, <= `max_arcs` arcs, integer weights
/// 1..=10. Parallel arcs allowed, self-loops excluded.
pub fn random_instance(rng: &mut ChaCha8Rng, max_arcs: usize) -> Graph {
    loop {
        let n = rng.gen_range(2..=8u32);
        let m = rng.gen_range(1..=max_arcs);
        let mut lines = vec![format!("v {n}")];
        let mut label = 0;
        for _ in 0..m * 4 {
            if label == m {
                break;
            }
            let tail = rng.gen_range(1..=n);
            let head = rng.gen_range(1..=n);
            if tail == head {
                continue;
            }
            label += 1;
            lines.push(format!("a {label} {tail} {head} {}", rng.gen_range(1..=10)));
        }
        if label == 0 {
            continue;
        }
        let s = rng.gen_range(1..=n);
        let t = rng.gen_range(1..=n);
        if s == t {
            continue;
        }
        lines.push(format!("s {s}"));
        lines.push(format!("t {t}"));
        if let Ok(g) = Graph::parse(&lines.join("\n")) {
            return g;
        }
    }
}

/// Instances suitable for exhaustive cross-validation: an s-t path exists,
/// path enumeration is complete, and the feasible space is small.
pub fn random_connected_instance(rng: &mut ChaCha8Rng, max_feasible: u128) -> Graph {
    loop {
        let g = random_instance(rng, 14);
        if !g.has_st_path() {
            continue;
        }
        let paths = g.enumerate_paths(4096);
        if !paths.complete() || paths.is_empty() {
            continue;
        }
        let feasible: u128 = paths.iter().map(|p| p.len() as u128).product();
        if feasible <= max_feasible {
            return g;
        }
    }
}

/// Minimum total weight over ALL arc subsets whose removal disconnects the
/// source from the sink: the 2^|E| reference oracle.
pub fn exhaustive_min_cut_value(g: &Graph) -> Weight {
    let m = g.arcs().len();
    assert!(m <= 20, "exhaustive scan is for small instances");
    let mut best: Option<Weight> = None;
    for mask in 0u32..1 << m {
        let labels: BTreeSet<ArcLabel> = g
            .arcs()
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> *i & 1 == 1)
            .map(|(_, a)| a.label)
            .collect();
        let value = g.weight_of(&labels);
        if best.as_ref().is_some_and(|b| value >= *b) {
            continue;
        }
        if !g.remove_arcs(&labels).unwrap().has_st_path() {
            best = Some(value);
        }
    }
    best.expect("removing every arc always disconnects")
}

/// Dense matrix of the ring-mixer Hamiltonian (sum of XY bond terms) on the
/// full 2^n space of one register.
pub fn ring_mixer_matrix(n: usize) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    for (u, v) in MixerTopology::Ring.bonds(n) {
        let mu = 1usize << (n - 1 - u);
        let mv = 1usize << (n - 1 - v);
        for index in 0..dim {
            if index & mu == 0 && index & mv != 0 {
                let partner = index ^ mu ^ mv;
                h[(index, partner)] += 1.0;
                h[(partner, index)] += 1.0;
            }
        }
    }
    h
}

/// Exact `exp(-i * beta * H)` applied to `psi` via symmetric
/// eigendecomposition: the dense reference the Trotterized mixer converges
/// to.
pub fn exact_mixer_evolution(h: &DMatrix<f64>, beta: f64, psi: &[Complex64]) -> Vec<Complex64> {
    let eigen = nalgebra::SymmetricEigen::new(h.clone());
    let dim = psi.len();
    // coefficients in the eigenbasis
    let mut coeffs = vec![Complex64::ZERO; dim];
    for k in 0..dim {
        for i in 0..dim {
            coeffs[k] += eigen.eigenvectors[(i, k)] * psi[i];
        }
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= Complex64::from_polar(1.0, -beta * eigen.eigenvalues[k]);
    }
    let mut out = vec![Complex64::ZERO; dim];
    for i in 0..dim {
        for k in 0..dim {
            out[i] += eigen.eigenvectors[(i, k)] * coeffs[k];
        }
    }
    out
}
