//! End-to-end properties of the iterative loop on randomized instances:
//! soundness, the min-cut lower bound, determinism, and single-round
//! completeness in oracle mode.

mod common;

use num_complex::Complex64;
use pathcut::encoding::{self, DiagonalCost, QubitLayout};
use pathcut::objective::{EvalMode, ObjectiveKind, ObjectiveSpec};
use pathcut::optimize::{OptimizerConfig, PowellConfig};
use pathcut::sim::{self, AnsatzParams, MixerTopology, WarmStart};
use pathcut::solver::{self, Extraction, IterativeConfig, PathSelection};
use pathcut::vqa::{AnsatzTemplate, WarmStartPolicy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn base_config(batch: usize, budget: usize, seed: u64) -> IterativeConfig {
    IterativeConfig {
        batch_size: batch,
        selection: PathSelection::OverlapGreedy,
        candidate_cap: solver::DEFAULT_CANDIDATE_CAP,
        template: AnsatzTemplate::default(),
        warm_policy: WarmStartPolicy::CheapestArc,
        objective: ObjectiveSpec { kind: ObjectiveKind::Expectation, eval: EvalMode::ExactDistribution },
        optimizer: OptimizerConfig::Powell(PowellConfig {
            bounds: pathcut::optimize::angle_bounds(1),
            budget,
            tol: 1e-2,
            max_sweeps: 2,
        }),
        extraction: Extraction::ExactArgmax,
        seed,
    }
}

#[test]
fn iterative_cuts_are_sound_and_bounded_below() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5A01);
    let mut checked = 0;
    while checked < 20 {
        let g = common::random_connected_instance(&mut rng, 1 << 12);
        if QubitLayout::new(g.enumerate_paths(4096)).unwrap().total_qubits() > 22 {
            continue;
        }
        checked += 1;
        let result = solver::solve_iterative(&g, &base_config(2, 60, 0xF00 + checked as u64)).unwrap();
        // the accumulated cut disconnects the original graph
        assert!(!g.remove_arcs(&result.total_cut).unwrap().has_st_path());
        // never below the exact optimum
        assert!(result.total_cost >= result.oracle_value);
        assert_eq!(
            result.total_cost,
            result.oracle_value.checked_add(&result.oracle_gap).unwrap()
        );
        // progress: at most one round per arc
        assert!(result.rounds.len() <= g.arcs().len());
    }
}

#[test]
fn iterative_runs_are_deterministic() {
    let g = pathcut::instances::g10();
    let cfg = base_config(3, 120, 0xBEEF);
    let a = solver::solve_iterative(&g, &cfg).unwrap();
    let b = solver::solve_iterative(&g, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sampled_extraction_is_also_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5A02);
    let mut checked = 0;
    while checked < 8 {
        let g = common::random_connected_instance(&mut rng, 1 << 10);
        if QubitLayout::new(g.enumerate_paths(4096)).unwrap().total_qubits() > 20 {
            continue;
        }
        checked += 1;
        let mut cfg = base_config(2, 40, 0xAB0 + checked as u64);
        cfg.extraction = Extraction::BestSampled { shots: 512 };
        let result = solver::solve_iterative(&g, &cfg).unwrap();
        assert!(!g.remove_arcs(&result.total_cut).unwrap().has_st_path());
        assert!(result.total_cost >= result.oracle_value);
    }
}

/// Oracle mode: warm-start at the brute-force optimum, full batch, exact
/// argmax. The spike already sits on the optimum, so the extraction must
/// return exactly the min-cut value.
#[test]
fn full_batch_oracle_mode_recovers_the_exact_cut() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5A03);
    let mut checked = 0;
    while checked < 20 {
        let g = common::random_connected_instance(&mut rng, 1 << 12);
        let layout = QubitLayout::new(g.enumerate_paths(4096)).unwrap();
        if layout.total_qubits() > 22 {
            continue;
        }
        checked += 1;
        let mut cfg = base_config(layout.paths().len(), 24, 0xC0 + checked as u64);
        cfg.warm_policy = WarmStartPolicy::Oracle;
        let result = solver::solve_iterative(&g, &cfg).unwrap();
        assert_eq!(result.total_cost, result.oracle_value, "gap on {g:?}");
        assert_eq!(result.oracle_gap, pathcut::graph::Weight::ZERO);
    }
}

/// Independent completeness route with no optimizer in the loop: spread the
/// warm start over the whole feasible set, verify full support, and check
/// that argmax extraction equals the brute-force optimum.
#[test]
fn full_support_extraction_equals_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5A04);
    let mut checked = 0;
    while checked < 20 {
        let g = common::random_connected_instance(&mut rng, 1 << 10);
        let layout = QubitLayout::new(g.enumerate_paths(4096)).unwrap();
        let n = layout.total_qubits();
        if n > 18 {
            continue;
        }
        checked += 1;
        let diag = DiagonalCost::new(&layout, &g).unwrap();

        // uniform superposition over the feasible set: support is everything
        let feasible: Vec<u64> = (0..1u64 << n).filter(|&b| diag.is_feasible_index(b)).collect();
        let amp = Complex64::new(1.0 / (feasible.len() as f64).sqrt(), 0.0);
        let mut amps = vec![Complex64::ZERO; 1 << n];
        for &b in &feasible {
            amps[b as usize] = amp;
        }
        let state = sim::StateVector::from_amplitudes(n, amps).unwrap();
        let dist = sim::exact_distribution(&state, &layout, &g).unwrap();
        assert_eq!(dist.per_bitstring().unwrap().len(), feasible.len());

        let (arcs, cost) = solver::extract_solution(&dist, &layout, &g).unwrap();
        let (brute, _) = encoding::brute_force_min(&layout, &g).unwrap();
        assert_eq!(cost, brute);
        assert_eq!(cost, g.max_flow_min_cut().value);
        assert!(!g.remove_arcs(&arcs).unwrap().has_st_path());
    }
}

/// A trained state's support always yields a hitting set of its batch, so
/// every round removes at least one arc even under tiny budgets.
#[test]
fn rounds_always_make_progress() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5A05);
    let mut checked = 0;
    while checked < 10 {
        let g = common::random_connected_instance(&mut rng, 1 << 10);
        if QubitLayout::new(g.enumerate_paths(4096)).unwrap().total_qubits() > 20 {
            continue;
        }
        checked += 1;
        let result = solver::solve_iterative(&g, &base_config(1, 2, checked as u64)).unwrap();
        for round in &result.rounds {
            assert!(!round.selected.is_empty());
        }
    }
}

/// Warm starts built from small angles around a classical solution produce a
/// first generation concentrated near that solution's cost.
#[test]
fn ga_warm_seeding_concentrates_the_first_generation() {
    let g = pathcut::instances::g7();
    let layout = QubitLayout::new(g.enumerate_paths(16)).unwrap();
    let warm_cost = 5.0; // cheapest-arc warm configuration

    let spec = ObjectiveSpec { kind: ObjectiveKind::Expectation, eval: EvalMode::ExactDistribution };
    let mut evaluator = pathcut::vqa::Evaluator::new(
        layout.clone(),
        g.clone(),
        vec![1; 5],
        AnsatzTemplate::default(),
        spec,
    )
    .unwrap();
    let dim = evaluator.dim();
    let mut ga = pathcut::optimize::GaConfig::angles(dim, 0x6A);
    ga.budget = 16; // exactly one generation
    ga.population = 16;
    ga.seeds = pathcut::vqa::jittered_seeds(dim, 16, 0.08, 0x6B);
    let trace = pathcut::optimize::ga_minimize(evaluator.objective(), &ga).unwrap();

    // first-generation best distribution is concentrated near the warm cost
    let best_theta = trace.best().theta.clone();
    let dist = evaluator.exact_distribution_for(&best_theta).unwrap();
    let near_mass: f64 = dist
        .support()
        .iter()
        .filter(|(c, _)| (c.to_f64() - warm_cost).abs() < 1e-9)
        .map(|(_, m)| m)
        .sum();
    assert!(near_mass > 0.9, "mass at the warm cost was only {near_mass}");
}

/// Warm starting the ansatz at a known optimum with zero angles gives the
/// optimal cut without any optimization at all.
#[test]
fn zero_angle_oracle_warm_start_needs_no_training() {
    let g = pathcut::instances::g7();
    let layout = QubitLayout::new(g.enumerate_paths(64)).unwrap();
    let positions = pathcut::vqa::warm_positions(&WarmStartPolicy::Oracle, &layout, &g).unwrap();
    let warm = WarmStart::basis_only(positions, &layout, MixerTopology::Ring);
    let params = AnsatzParams {
        warm_start: warm,
        layers: vec![],
        topology: MixerTopology::Ring,
        trotter_sweeps: 1,
    };
    let state = sim::run_ansatz(&layout, &g, &params).unwrap();
    let dist = sim::exact_distribution(&state, &layout, &g).unwrap();
    let (arcs, cost) = solver::extract_solution(&dist, &layout, &g).unwrap();
    assert_eq!(cost, g.max_flow_min_cut().value);
    assert!(!g.remove_arcs(&arcs).unwrap().has_st_path());
}
