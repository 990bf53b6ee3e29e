//! Glue between flat optimizer parameter vectors and ansatz execution.
//!
//! A parameter vector theta packs the warm-start bond angles of every
//! register (in layout order) followed by the `p` layer pairs
//! `(gamma_1, beta_1, ..., gamma_p, beta_p)`.

use serde::Serialize;
use thiserror::Error;

use crate::encoding::{self, Configuration, DiagonalCost, EncodingError, QubitLayout};
use crate::graph::{Graph, Weight};
use crate::objective::{CostDistribution, EvalMode, ObjectiveError, ObjectiveSpec};
use crate::optimize::EvalFailure;
use crate::sim::{self, AnsatzParams, MixerTopology, SimError, WarmStart};

#[derive(Debug, Error, PartialEq)]
pub enum VqaError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("theta has {got} coordinates, expected {expected}")]
    ThetaDim { expected: usize, got: usize },
    #[error("warm-start positions: {0}")]
    Positions(String),
}

/// Ansatz shape shared by every evaluation in a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnsatzTemplate {
    pub depth: usize,
    pub topology: MixerTopology,
    pub trotter_sweeps: u32,
}

impl Default for AnsatzTemplate {
    fn default() -> Self {
        AnsatzTemplate { depth: 1, topology: MixerTopology::Ring, trotter_sweeps: 1 }
    }
}

/// Shape of the flat parameter vector for one (layout, template) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpace {
    bond_counts: Vec<usize>,
    depth: usize,
}

impl ParamSpace {
    pub fn new(layout: &QubitLayout, template: &AnsatzTemplate) -> ParamSpace {
        let bond_counts =
            (0..layout.register_count()).map(|i| template.topology.bond_count(layout.register_len(i))).collect();
        ParamSpace { bond_counts, depth: template.depth }
    }

    pub fn warm_dim(&self) -> usize {
        self.bond_counts.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.warm_dim() + 2 * self.depth
    }

    pub fn initial_theta(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    /// Splits theta into per-register warm-start angles and layer pairs.
    pub fn unpack(
        &self,
        theta: &[f64],
        positions: &[usize],
        template: &AnsatzTemplate,
    ) -> Result<AnsatzParams, VqaError> {
        if theta.len() != self.dim() {
            return Err(VqaError::ThetaDim { expected: self.dim(), got: theta.len() });
        }
        let mut angles = Vec::with_capacity(self.bond_counts.len());
        let mut at = 0;
        for &count in &self.bond_counts {
            angles.push(theta[at..at + count].to_vec());
            at += count;
        }
        let layers = theta[at..].chunks_exact(2).map(|pair| (pair[0], pair[1])).collect();
        Ok(AnsatzParams {
            warm_start: WarmStart { positions: positions.to_vec(), angles },
            layers,
            topology: template.topology,
            trotter_sweeps: template.trotter_sweeps,
        })
    }
}

/// How the warm-start one-hot positions are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum WarmStartPolicy {
    /// Cheapest arc of each path, earliest position on ties.
    CheapestArc,
    /// Positions of the brute-force optimum over the feasible space.
    Oracle,
    /// Explicit 1-based position per path.
    Positions(Vec<usize>),
}

pub fn warm_positions(
    policy: &WarmStartPolicy,
    layout: &QubitLayout,
    g: &Graph,
) -> Result<Vec<usize>, VqaError> {
    match policy {
        WarmStartPolicy::CheapestArc => Ok(layout
            .paths()
            .iter()
            .map(|path| {
                let mut best = (Weight::from_int(u64::MAX), 1usize);
                for (j, &label) in path.arc_labels().iter().enumerate() {
                    let w = g.arc(label).expect("path arc must exist in graph").weight;
                    if w < best.0 {
                        best = (w, j + 1);
                    }
                }
                best.1
            })
            .collect()),
        WarmStartPolicy::Oracle => {
            let (_, config) = encoding::brute_force_min(layout, g)?;
            Ok((0..layout.register_count())
                .map(|i| {
                    let range = layout.register_range(i);
                    let start = range.start;
                    range
                        .clone()
                        .find(|&q| config.bits()[q])
                        .map(|q| q - start + 1)
                        .expect("brute-force optimum is feasible")
                })
                .collect())
        }
        WarmStartPolicy::Positions(positions) => {
            if positions.len() != layout.register_count() {
                return Err(VqaError::Positions(format!(
                    "{} positions given for {} registers",
                    positions.len(),
                    layout.register_count()
                )));
            }
            for (i, &pos) in positions.iter().enumerate() {
                if pos < 1 || pos > layout.register_len(i) {
                    return Err(VqaError::Positions(format!(
                        "position {pos} out of range 1..={} on path {i}",
                        layout.register_len(i)
                    )));
                }
            }
            Ok(positions.clone())
        }
    }
}

/// SplitMix64 finalizer over (master seed, counter): the documented
/// derivation of per-call sampling seeds.
pub fn derive_seed(master: u64, counter: u64) -> u64 {
    let mut z = master ^ counter.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x2545_F491_4F6C_DD1D);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Distribution digest logged once per objective call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistSummary {
    pub value: f64,
    pub min_cost: f64,
    pub best_bitstring: String,
    pub median: f64,
    pub mean: f64,
}

impl DistSummary {
    fn new(d: &CostDistribution, diag: &DiagonalCost, value: f64) -> DistSummary {
        let best = d
            .per_bitstring()
            .expect("evaluator distributions retain bitstrings")
            .keys()
            .min_by_key(|&&b| (diag.cost_weight(b), b))
            .copied()
            .expect("distribution has support");
        DistSummary {
            value,
            min_cost: d.min_cost().to_f64(),
            best_bitstring: Configuration::from_basis_index(diag.n(), best).to_string(),
            median: d.median(),
            mean: d.expectation(),
        }
    }
}

/// Scores parameter vectors for the optimizers: runs the ansatz and applies
/// the configured objective, either on the exact distribution or on fresh
/// shots whose seed derives from (master seed, call counter).
pub struct Evaluator {
    layout: QubitLayout,
    graph: Graph,
    diag: DiagonalCost,
    positions: Vec<usize>,
    template: AnsatzTemplate,
    space: ParamSpace,
    spec: ObjectiveSpec,
    /// Common random numbers: when set, every call reuses the master seed.
    pub common_random_numbers: bool,
    calls: u64,
    summaries: Vec<DistSummary>,
}

impl Evaluator {
    pub fn new(
        layout: QubitLayout,
        graph: Graph,
        positions: Vec<usize>,
        template: AnsatzTemplate,
        spec: ObjectiveSpec,
    ) -> Result<Evaluator, VqaError> {
        spec.kind.validate()?;
        let diag = DiagonalCost::new(&layout, &graph)?;
        let space = ParamSpace::new(&layout, &template);
        Ok(Evaluator {
            layout,
            graph,
            diag,
            positions,
            template,
            space,
            spec,
            common_random_numbers: false,
            calls: 0,
            summaries: Vec::new(),
        })
    }

    pub fn space(&self) -> &ParamSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn call_count(&self) -> u64 {
        self.calls
    }

    pub fn summaries(&self) -> &[DistSummary] {
        &self.summaries
    }

    pub fn params_for(&self, theta: &[f64]) -> Result<AnsatzParams, VqaError> {
        self.space.unpack(theta, &self.positions, &self.template)
    }

    /// The distribution the configured evaluation mode would see at `theta`,
    /// with a fixed sampling seed for the shot-based mode.
    pub fn distribution_for(&self, theta: &[f64], seed: u64) -> Result<CostDistribution, VqaError> {
        let params = self.params_for(theta)?;
        let state = sim::run_ansatz(&self.layout, &self.graph, &params)?;
        match self.spec.eval {
            EvalMode::ExactDistribution => Ok(sim::exact_distribution(&state, &self.layout, &self.graph)?),
            EvalMode::Shots { shots, .. } => {
                let draws = sim::sample(&state, shots, seed)?;
                Ok(CostDistribution::from_sampled_indices(&draws, &self.diag, seed)?)
            }
        }
    }

    /// Exact pushforward at `theta` regardless of evaluation mode.
    pub fn exact_distribution_for(&self, theta: &[f64]) -> Result<CostDistribution, VqaError> {
        let params = self.params_for(theta)?;
        let state = sim::run_ansatz(&self.layout, &self.graph, &params)?;
        Ok(sim::exact_distribution(&state, &self.layout, &self.graph)?)
    }

    pub fn eval(&mut self, theta: &[f64]) -> Result<f64, VqaError> {
        let params = self.params_for(theta)?;
        let state = sim::run_ansatz(&self.layout, &self.graph, &params)?;
        let (value, dist) = match self.spec.eval {
            EvalMode::ExactDistribution => {
                let dist = sim::exact_distribution(&state, &self.layout, &self.graph)?;
                (self.spec.kind.evaluate_distribution(&dist)?, dist)
            }
            EvalMode::Shots { shots, seed } => {
                let call_seed = if self.common_random_numbers { seed } else { derive_seed(seed, self.calls) };
                let draws = sim::sample(&state, shots, call_seed)?;
                let costs: Vec<Weight> = draws.iter().map(|&b| self.diag.cost_weight(b)).collect();
                let value = self.spec.kind.evaluate_samples(&costs)?;
                (value, CostDistribution::from_sampled_indices(&draws, &self.diag, call_seed)?)
            }
        };
        self.calls += 1;
        self.summaries.push(DistSummary::new(&dist, &self.diag, value));
        Ok(value)
    }

    /// Adapter for the optimizers.
    pub fn objective(&mut self) -> impl FnMut(&[f64]) -> Result<f64, EvalFailure> + '_ {
        move |theta| self.eval(theta).map_err(|e| -> EvalFailure { Box::new(e) })
    }
}

/// `count` parameter vectors with every coordinate drawn uniformly from
/// [-magnitude, magnitude]: small-angle candidates centered on the classical
/// warm-start configuration (theta = 0).
pub fn jittered_seeds(dim: usize, count: usize, magnitude: f64, seed: u64) -> Vec<Vec<f64>> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..dim).map(|_| rng.gen_range(-magnitude..=magnitude)).collect()).collect()
}
