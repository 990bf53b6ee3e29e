//! Encoding invariants on randomized instances: deduplicated costs, decode
//! monotonicity, oracle agreement, and Pauli faithfulness.

mod common;

use std::collections::BTreeSet;

use pathcut::encoding::{self, Configuration, QubitLayout};
use pathcut::graph::{Graph, Weight};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent cost route: walk every (path, position) pair with a set bit,
/// union the labels, sum weights from the graph.
fn set_union_cost(c: &Configuration, layout: &QubitLayout, g: &Graph) -> Weight {
    let mut labels = BTreeSet::new();
    for (i, path) in layout.paths().iter().enumerate() {
        for (j, &label) in path.arc_labels().iter().enumerate() {
            if c.bits()[layout.offsets()[i] + j] {
                labels.insert(label);
            }
        }
    }
    Weight::sum(labels.iter().map(|&l| &g.arc(l).unwrap().weight))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cost_deduplicates_overlapping_selections(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_connected_instance(&mut rng, 1 << 20);
        let layout = QubitLayout::new(g.enumerate_paths(4096)).unwrap();
        let n = layout.total_qubits();
        for _ in 0..16 {
            let bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
            let c = Configuration::new(bits);
            let direct = encoding::cost(&c, &layout, &g).unwrap();
            prop_assert_eq!(direct, set_union_cost(&c, &layout, &g));
        }
    }

    #[test]
    fn decode_is_monotone_under_extra_bits(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_connected_instance(&mut rng, 1 << 20);
        let layout = QubitLayout::new(g.enumerate_paths(4096)).unwrap();
        let n = layout.total_qubits();
        let mut bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.2)).collect();
        let before = encoding::decode(&Configuration::new(bits.clone()), &layout).unwrap();
        let flip = rng.gen_range(0..n);
        bits[flip] = true;
        let after = encoding::decode(&Configuration::new(bits), &layout).unwrap();
        prop_assert!(before.is_subset(&after));
    }
}

#[test]
fn feasible_configurations_decode_to_bounded_hitting_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE1);
    for _ in 0..10 {
        let g = common::random_connected_instance(&mut rng, 1 << 16);
        let layout = QubitLayout::new(g.enumerate_paths(4096)).unwrap();
        // a random feasible configuration
        let ones: Vec<usize> = (0..layout.register_count())
            .map(|i| layout.qubit_index(i, rng.gen_range(1..=layout.register_len(i))))
            .collect();
        let c = Configuration::from_ones(layout.total_qubits(), &ones);
        assert!(encoding::is_feasible(&c, &layout).unwrap());
        let decoded = encoding::decode(&c, &layout).unwrap();
        assert!(decoded.len() <= layout.register_count());
        for path in layout.paths().iter() {
            assert!(path.arc_labels().iter().any(|l| decoded.contains(l)));
        }
    }
}

#[test]
fn brute_force_minimum_matches_max_flow_on_complete_enumerations() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE2);
    for _ in 0..10 {
        let g = common::random_connected_instance(&mut rng, 1 << 16);
        let layout = QubitLayout::new(g.enumerate_paths(4096)).unwrap();
        let (best, config) = encoding::brute_force_min(&layout, &g).unwrap();
        assert!(encoding::is_feasible(&config, &layout).unwrap());
        assert_eq!(best, g.max_flow_min_cut().value);
    }
}

#[test]
fn pauli_terms_reproduce_costs_on_full_scans() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE3);
    let mut checked = 0;
    while checked < 8 {
        let g = common::random_connected_instance(&mut rng, 1 << 12);
        let layout = QubitLayout::new(g.enumerate_paths(4096)).unwrap();
        let n = layout.total_qubits();
        if n > 14 {
            continue;
        }
        checked += 1;
        let compiled = encoding::pauli_cost_terms(&layout, &g).unwrap().compile(n).unwrap();
        let diag = encoding::DiagonalCost::new(&layout, &g).unwrap();
        for b in 0..1u64 << n {
            assert!((compiled.evaluate_index(b) - diag.cost_f64(b)).abs() < 1e-9);
        }
    }
}
