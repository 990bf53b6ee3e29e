//! Iterative batchwise resolution: select a few overlapping paths, solve the
//! induced subproblem variationally, remove the chosen arcs, and repeat until
//! the source is disconnected. Per-round qubit count is the batch's total
//! path length only, which is what keeps large instances tractable.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use serde::Serialize;
use thiserror::Error;

use crate::encoding::{Configuration, DiagonalCost, EncodingError, QubitLayout};
use crate::graph::{ArcLabel, Graph, GraphError, Path, PathSet, VertexId, Weight};
use crate::objective::ObjectiveSpec;
use crate::optimize::{OptimError, OptimizationTrace, OptimizerConfig};
use crate::sim;
use crate::vqa::{self, AnsatzTemplate, Evaluator, VqaError, WarmStartPolicy};

/// Default cap on how many shortest simple paths batch selection enumerates.
pub const DEFAULT_CANDIDATE_CAP: usize = 256;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("graph has no source-to-sink path")]
    NoPath,
    #[error("distribution retains no per-bitstring probabilities")]
    MissingBitstrings,
    #[error("distribution support is empty")]
    EmptySupport,
    #[error("distribution support contains infeasible bitstring {0}")]
    InfeasibleSupport(String),
    #[error("round {round} failed: {source}")]
    Round { round: usize, partial: Vec<RoundRecord>, source: Box<SolverError> },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Vqa(#[from] VqaError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error("sanity check failed: accumulated cut does not disconnect the original graph")]
    Unsound,
}

/// How the selected paths of one round are drawn from the candidate list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathSelection {
    /// Seed with the shortest path, then greedily add the candidate sharing
    /// the most arcs with the already-selected set.
    OverlapGreedy,
    /// First `k` candidates in (length, label-sequence) order.
    ShortestFirst,
}

/// How the round's arc set is read off the trained distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Extraction {
    /// Decode the best bitstring among sampled shots.
    BestSampled { shots: u64 },
    /// Decode the global best bitstring in the exact support.
    ExactArgmax,
}

#[derive(Debug, Clone)]
pub struct IterativeConfig {
    pub batch_size: usize,
    pub selection: PathSelection,
    pub candidate_cap: usize,
    pub template: AnsatzTemplate,
    pub warm_policy: WarmStartPolicy,
    pub objective: ObjectiveSpec,
    pub optimizer: OptimizerConfig,
    pub extraction: Extraction,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub paths: Vec<Vec<ArcLabel>>,
    pub qubits: usize,
    /// The arcs removed this round.
    #[serde(rename = "PS")]
    pub selected: Vec<ArcLabel>,
    pub round_cost: Weight,
    pub residual_arcs: usize,
    pub objective_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterativeResult {
    pub rounds: Vec<RoundRecord>,
    pub total_cut: BTreeSet<ArcLabel>,
    pub total_cost: Weight,
    pub oracle_value: Weight,
    pub oracle_gap: Weight,
}

/// Up to `cap` shortest simple s-t paths, ordered by (arc count,
/// lexicographic label sequence). Uniform-cost expansion over simple
/// prefixes; a pop guard bounds the work on adversarial graphs.
pub fn shortest_simple_paths(g: &Graph, cap: usize) -> Vec<Path> {
    let mut found = Vec::new();
    if cap == 0 {
        return found;
    }
    let max_pops = cap.saturating_mul(64).max(4096);
    let mut pops = 0usize;
    // Reverse<(len, labels, end vertex, visited vertices)>
    let mut heap: BinaryHeap<Reverse<(usize, Vec<ArcLabel>, VertexId, Vec<VertexId>)>> = BinaryHeap::new();
    heap.push(Reverse((0, Vec::new(), g.source(), vec![g.source()])));
    while let Some(Reverse((len, labels, end, visited))) = heap.pop() {
        pops += 1;
        if pops > max_pops {
            break;
        }
        if end == g.sink() {
            found.push(Path::from_labels(labels));
            if found.len() == cap {
                break;
            }
            continue;
        }
        for arc in g.arcs().iter().filter(|a| a.tail == end) {
            if visited.contains(&arc.head) {
                continue;
            }
            let mut next_labels = labels.clone();
            next_labels.push(arc.label);
            let mut next_visited = visited.clone();
            next_visited.push(arc.head);
            heap.push(Reverse((len + 1, next_labels, arc.head, next_visited)));
        }
    }
    found
}

/// Chooses the round's path batch. Overlap-greedy mode seeds with the
/// shortest candidate and repeatedly adds the one sharing the most arcs with
/// the selected set (ties to the lexicographically smallest label sequence).
pub fn select_path_batch(
    g: &Graph,
    k: usize,
    cap: usize,
    selection: PathSelection,
) -> Result<PathSet, SolverError> {
    if !g.has_st_path() {
        return Err(SolverError::NoPath);
    }
    let candidates = shortest_simple_paths(g, cap);
    debug_assert!(!candidates.is_empty());
    let total = candidates.len();
    let chosen: Vec<Path> = match selection {
        PathSelection::ShortestFirst => candidates.into_iter().take(k).collect(),
        PathSelection::OverlapGreedy => {
            let mut remaining = candidates;
            let mut chosen = vec![remaining.remove(0)];
            let mut covered: BTreeSet<ArcLabel> = chosen[0].arc_labels().iter().copied().collect();
            while chosen.len() < k && !remaining.is_empty() {
                let overlaps: Vec<usize> = remaining
                    .iter()
                    .map(|c| c.arc_labels().iter().filter(|l| covered.contains(l)).count())
                    .collect();
                let mut best = 0usize;
                for i in 1..remaining.len() {
                    if overlaps[i] > overlaps[best]
                        || (overlaps[i] == overlaps[best]
                            && remaining[i].arc_labels() < remaining[best].arc_labels())
                    {
                        best = i;
                    }
                }
                let picked = remaining.remove(best);
                covered.extend(picked.arc_labels().iter().copied());
                chosen.push(picked);
            }
            chosen
        }
    };
    let complete = total < cap && chosen.len() == total;
    Ok(PathSet::new(chosen, complete))
}

/// Decodes the cheapest supported bitstring (ties to the lexicographically
/// first). Errors if any supported bitstring is infeasible: upstream layers
/// must make that impossible.
pub fn extract_solution(
    d: &crate::objective::CostDistribution,
    layout: &QubitLayout,
    g: &Graph,
) -> Result<(BTreeSet<ArcLabel>, Weight), SolverError> {
    let per_bitstring = d.per_bitstring().ok_or(SolverError::MissingBitstrings)?;
    if per_bitstring.is_empty() {
        return Err(SolverError::EmptySupport);
    }
    let diag = DiagonalCost::new(layout, g)?;
    let mut best: Option<(Weight, u64)> = None;
    for &b in per_bitstring.keys() {
        if !diag.is_feasible_index(b) {
            let bits = Configuration::from_basis_index(layout.total_qubits(), b);
            return Err(SolverError::InfeasibleSupport(bits.to_string()));
        }
        let cost = diag.cost_weight(b);
        if best.map_or(true, |(bc, bb)| (cost, b) < (bc, bb)) {
            best = Some((cost, b));
        }
    }
    let (cost, bits) = best.expect("support checked nonempty");
    Ok((diag.decode_index(bits), cost))
}

/// The full iterative loop. Terminates when no s-t path remains; the
/// accumulated cut is re-verified against the original graph before the
/// result is returned.
pub fn solve_iterative(g: &Graph, cfg: &IterativeConfig) -> Result<IterativeResult, SolverError> {
    let oracle = g.max_flow_min_cut();
    let mut residual = g.clone();
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut total_cut: BTreeSet<ArcLabel> = BTreeSet::new();
    let mut round = 0usize;

    while residual.has_st_path() {
        round += 1;
        let record = run_round(&residual, cfg, round).map_err(|source| SolverError::Round {
            round,
            partial: rounds.clone(),
            source: Box::new(source),
        })?;
        residual = residual.remove_arcs(&record.selected.iter().copied().collect())?;
        total_cut.extend(record.selected.iter().copied());
        rounds.push(RoundRecord { residual_arcs: residual.arcs().len(), ..record });
    }

    // Soundness: re-check disconnection on the pristine input graph.
    if g.remove_arcs(&total_cut)?.has_st_path() {
        return Err(SolverError::Unsound);
    }
    let total_cost = g.weight_of(&total_cut);
    let oracle_gap = total_cost.checked_sub(&oracle.value).ok_or(SolverError::Unsound)?;
    Ok(IterativeResult { rounds, total_cut, total_cost, oracle_value: oracle.value, oracle_gap })
}

/// The batch dimension changes per round; the configured bounds act as a
/// template, repeated per parameter when the sizes disagree.
fn fit_bounds(bounds: &[(f64, f64)], dim: usize) -> Vec<(f64, f64)> {
    if bounds.len() == dim {
        bounds.to_vec()
    } else if let Some(&first) = bounds.first() {
        vec![first; dim]
    } else {
        crate::optimize::angle_bounds(dim)
    }
}

fn run_round(residual: &Graph, cfg: &IterativeConfig, round: usize) -> Result<RoundRecord, SolverError> {
    let batch = select_path_batch(residual, cfg.batch_size, cfg.candidate_cap, cfg.selection)?;
    let paths: Vec<Vec<ArcLabel>> = batch.iter().map(|p| p.arc_labels().to_vec()).collect();
    let layout = QubitLayout::new(batch)?;
    let qubits = layout.total_qubits();
    let positions = vqa::warm_positions(&cfg.warm_policy, &layout, residual)?;

    // Every per-round seed derives from the run seed and the round index.
    let round_seed = vqa::derive_seed(cfg.seed, round as u64);
    let mut spec = cfg.objective;
    if let crate::objective::EvalMode::Shots { shots, .. } = spec.eval {
        spec.eval = crate::objective::EvalMode::Shots { shots, seed: vqa::derive_seed(round_seed, 1) };
    }

    let mut evaluator = Evaluator::new(layout.clone(), residual.clone(), positions, cfg.template, spec)?;
    let dim = evaluator.dim();
    let mut optimizer = cfg.optimizer.clone();
    match &mut optimizer {
        OptimizerConfig::Powell(powell) => powell.bounds = fit_bounds(&powell.bounds, dim),
        OptimizerConfig::Genetic(ga) => {
            ga.bounds = fit_bounds(&ga.bounds, dim);
            ga.seed = vqa::derive_seed(round_seed, 2);
            ga.seeds.retain(|s| s.len() == dim);
        }
    }

    let theta0 = evaluator.space().initial_theta();
    let trace: OptimizationTrace = optimizer.minimize(evaluator.objective(), &theta0)?;
    let best_theta = trace.best().theta.clone();

    let dist = match cfg.extraction {
        Extraction::ExactArgmax => evaluator.exact_distribution_for(&best_theta)?,
        Extraction::BestSampled { shots } => {
            let params = evaluator.params_for(&best_theta)?;
            let state = sim::run_ansatz(&layout, residual, &params)?;
            let draws = sim::sample(&state, shots, vqa::derive_seed(round_seed, 3))?;
            let diag = DiagonalCost::new(&layout, residual)?;
            crate::objective::CostDistribution::from_sampled_indices(&draws, &diag, round_seed)
                .map_err(VqaError::from)?
        }
    };
    let (selected, round_cost) = extract_solution(&dist, &layout, residual)?;
    debug_assert!(!selected.is_empty());
    Ok(RoundRecord {
        round,
        paths,
        qubits,
        selected: selected.into_iter().collect(),
        round_cost,
        residual_arcs: 0, // filled by the caller after removal
        objective_value: trace.best_value(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding;
    use crate::instances;
    use crate::objective::{EvalMode, ObjectiveKind};
    use crate::optimize::PowellConfig;

    fn exact_expectation() -> ObjectiveSpec {
        ObjectiveSpec { kind: ObjectiveKind::Expectation, eval: EvalMode::ExactDistribution }
    }

    fn quick_config(batch: usize, budget: usize) -> IterativeConfig {
        IterativeConfig {
            batch_size: batch,
            selection: PathSelection::OverlapGreedy,
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            template: AnsatzTemplate::default(),
            warm_policy: WarmStartPolicy::CheapestArc,
            objective: exact_expectation(),
            optimizer: OptimizerConfig::Powell(PowellConfig {
                bounds: crate::optimize::angle_bounds(64),
                budget,
                tol: 1e-2,
                max_sweeps: 2,
            }),
            extraction: Extraction::ExactArgmax,
            seed: 7,
        }
    }

    #[test]
    fn shortest_paths_are_ordered_and_simple() {
        let g = instances::g10();
        let paths = shortest_simple_paths(&g, 100);
        assert!(!paths.is_empty());
        for pair in paths.windows(2) {
            let a = (pair[0].len(), pair[0].arc_labels());
            let b = (pair[1].len(), pair[1].arc_labels());
            assert!(a <= b);
        }
        for p in &paths {
            let vertices = p.vertices(&g);
            let unique: BTreeSet<_> = vertices.iter().collect();
            assert_eq!(unique.len(), vertices.len());
        }
    }

    #[test]
    fn batch_of_one_is_the_shortest_path() {
        let g = instances::g10();
        let batch = select_path_batch(&g, 1, 64, PathSelection::OverlapGreedy).unwrap();
        assert_eq!(batch.len(), 1);
        assert_eq!(batch.paths()[0].arc_labels(), &[1, 2, 3, 4]);
    }

    #[test]
    fn batch_larger_than_path_count_returns_all() {
        let g = instances::g7();
        let batch = select_path_batch(&g, 100, 256, PathSelection::OverlapGreedy).unwrap();
        assert_eq!(batch.len(), 5);
        assert!(batch.complete());
    }

    #[test]
    fn overlap_greedy_selects_source_sharing_trio_on_g10() {
        let g = instances::g10();
        let batch = select_path_batch(&g, 3, 256, PathSelection::OverlapGreedy).unwrap();
        let labels: Vec<&[ArcLabel]> = batch.iter().map(|p| p.arc_labels()).collect();
        assert_eq!(labels, vec![&[1, 2, 3, 4][..], &[1, 5, 10, 3, 4], &[9, 10, 3, 4]]);
    }

    #[test]
    fn no_path_is_an_error() {
        let g = Graph::parse("v 3; a 1 1 2 1; s 1; t 3").unwrap();
        assert!(matches!(select_path_batch(&g, 2, 16, PathSelection::ShortestFirst), Err(SolverError::NoPath)));
    }

    #[test]
    fn extract_from_spike_distribution() {
        let g = instances::g7();
        let layout = QubitLayout::new(g.enumerate_paths(16)).unwrap();
        let warm = crate::sim::WarmStart::basis_only(vec![1; 5], &layout, crate::sim::MixerTopology::Ring);
        let state = crate::sim::prepare_warm_start(&layout, &warm, crate::sim::MixerTopology::Ring).unwrap();
        let dist = crate::sim::exact_distribution(&state, &layout, &g).unwrap();
        let (arcs, cost) = extract_solution(&dist, &layout, &g).unwrap();
        assert_eq!(arcs, BTreeSet::from([1, 3]));
        assert_eq!(cost, Weight::from_int(5));
    }

    #[test]
    fn extract_uniform_superposition_equals_brute_force() {
        let g = instances::g7();
        let layout = QubitLayout::new(g.enumerate_paths(16)).unwrap();
        let diag = DiagonalCost::new(&layout, &g).unwrap();
        let feasible: Vec<u64> = (0..1u64 << 16).filter(|&b| diag.is_feasible_index(b)).collect();
        assert_eq!(feasible.len(), 288);
        let amp = num_complex::Complex64::new(1.0 / (feasible.len() as f64).sqrt(), 0.0);
        let mut amps = vec![num_complex::Complex64::ZERO; 1 << 16];
        for &b in &feasible {
            amps[b as usize] = amp;
        }
        let state = crate::sim::StateVector::from_amplitudes(16, amps).unwrap();
        let dist = crate::sim::exact_distribution(&state, &layout, &g).unwrap();
        let (_, cost) = extract_solution(&dist, &layout, &g).unwrap();
        let (brute, _) = encoding::brute_force_min(&layout, &g).unwrap();
        assert_eq!(cost, brute);
    }

    #[test]
    fn extract_rejects_infeasible_support() {
        let g = instances::g7();
        let layout = QubitLayout::new(g.enumerate_paths(16)).unwrap();
        let state = crate::sim::StateVector::basis(16, &[]).unwrap(); // all-zero: infeasible
        let dist = crate::sim::exact_distribution(&state, &layout, &g).unwrap();
        assert!(matches!(extract_solution(&dist, &layout, &g), Err(SolverError::InfeasibleSupport(_))));
    }

    #[test]
    fn bridge_arc_graph_resolves_in_one_round() {
        // every path crosses the cheap bridge (3,4)
        let g = Graph::parse(
            "v 5; a 1 1 2 3; a 2 2 3 4; a 3 1 3 5; a 4 3 4 1; a 5 4 5 6; s 1; t 5",
        )
        .unwrap();
        let result = solve_iterative(&g, &quick_config(3, 60)).unwrap();
        assert_eq!(result.rounds.len(), 1);
        assert_eq!(result.total_cut, BTreeSet::from([4]));
        assert_eq!(result.total_cost, Weight::from_int(1));
        assert_eq!(result.oracle_gap, Weight::ZERO);
    }

    #[test]
    fn g7_full_batch_exact_argmax_closes_the_gap() {
        let g = instances::g7();
        let result = solve_iterative(&g, &quick_config(5, 40)).unwrap();
        assert_eq!(result.total_cost, Weight::from_int(5));
        assert_eq!(result.oracle_gap, Weight::ZERO);
        assert!(!g.remove_arcs(&result.total_cut).unwrap().has_st_path());
    }

    #[test]
    fn g10_walkthrough_removes_source_arcs_then_finishes() {
        let g = instances::g10();
        let result = solve_iterative(&g, &quick_config(3, 200)).unwrap();
        assert_eq!(result.rounds[0].selected, vec![1, 9]);
        assert_eq!(result.rounds[0].qubits, 13);
        assert!(!g.remove_arcs(&result.total_cut).unwrap().has_st_path());
        assert_eq!(result.total_cost, Weight::from_int(7));
        assert_eq!(result.oracle_gap, Weight::ZERO);
    }
}
