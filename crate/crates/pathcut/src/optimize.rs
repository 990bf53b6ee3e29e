//! Derivative-free search over the ansatz parameter vector.
//!
//! Two methods, both budgeted by objective-call count and fully reproducible
//! from their configuration: coordinate-descent sweeps with golden-section
//! line searches, and a plain generational GA with single-point crossover,
//! uniform mutation, and structural elitism (ranked parents carry over
//! unmutated, with cached fitness).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Failure raised by an objective closure.
pub type EvalFailure = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("objective evaluation failed at theta {theta:?}: {source}")]
    Objective { theta: Vec<f64>, source: EvalFailure },
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}

/// Per-parameter closed search intervals.
pub fn angle_bounds(dim: usize) -> Vec<(f64, f64)> {
    vec![(-std::f64::consts::PI, std::f64::consts::PI); dim]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowellConfig {
    pub bounds: Vec<(f64, f64)>,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    /// Golden-section interval tolerance; a full sweep that improves the
    /// incumbent by less than this also stops the search.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl PowellConfig {
    pub fn angles(dim: usize) -> PowellConfig {
        PowellConfig { bounds: angle_bounds(dim), budget: 400, tol: 1e-3, max_sweeps: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaConfig {
    pub bounds: Vec<(f64, f64)>,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    pub seed: u64,
    pub population: usize,
    /// Ranked individuals kept (and bred from) each generation.
    pub parents: usize,
    /// Per-gene mutation probability for offspring.
    pub mutation_prob: f64,
    /// Mutation is a uniform perturbation in [-magnitude, magnitude].
    pub mutation_magnitude: f64,
    /// Individuals injected into the initial population (clamped to bounds);
    /// the remainder is drawn uniformly.
    pub seeds: Vec<Vec<f64>>,
}

impl GaConfig {
    pub fn angles(dim: usize, seed: u64) -> GaConfig {
        GaConfig {
            bounds: angle_bounds(dim),
            budget: 400,
            seed,
            population: 32,
            parents: 8,
            mutation_prob: 0.1,
            mutation_magnitude: 0.2,
            seeds: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum OptimizerConfig {
    Powell(PowellConfig),
    Genetic(GaConfig),
}

impl OptimizerConfig {
    /// Runs the configured method. `theta0` starts the coordinate descent;
    /// for the GA it is injected as an extra population seed.
    pub fn minimize<F>(&self, f: F, theta0: &[f64]) -> Result<OptimizationTrace, OptimError>
    where
        F: FnMut(&[f64]) -> Result<f64, EvalFailure>,
    {
        match self {
            OptimizerConfig::Powell(cfg) => powell_minimize(f, theta0, cfg),
            OptimizerConfig::Genetic(cfg) => {
                let mut cfg = cfg.clone();
                cfg.seeds.insert(0, theta0.to_vec());
                ga_minimize(f, &cfg)
            }
        }
    }

    pub fn budget(&self) -> usize {
        match self {
            OptimizerConfig::Powell(cfg) => cfg.budget,
            OptimizerConfig::Genetic(cfg) => cfg.budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub theta: Vec<f64>,
    pub value: f64,
}

/// Marker pointing a named iteration (sweep, generation) at the trace index
/// of its best evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Milestone {
    pub label: String,
    pub eval_index: usize,
}

/// Every objective call in order, plus the running best.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationTrace {
    pub evaluations: Vec<Evaluation>,
    pub milestones: Vec<Milestone>,
    best_index: usize,
}

impl OptimizationTrace {
    pub fn best(&self) -> &Evaluation {
        &self.evaluations[self.best_index]
    }

    pub fn best_index(&self) -> usize {
        self.best_index
    }

    pub fn best_value(&self) -> f64 {
        self.best().value
    }
}

/// Budget-aware evaluation bookkeeping shared by both methods.
struct Recorder<F> {
    f: F,
    budget: usize,
    evaluations: Vec<Evaluation>,
    best_index: usize,
}

impl<F> Recorder<F>
where
    F: FnMut(&[f64]) -> Result<f64, EvalFailure>,
{
    fn new(f: F, budget: usize) -> Recorder<F> {
        Recorder { f, budget, evaluations: Vec::new(), best_index: 0 }
    }

    fn exhausted(&self) -> bool {
        self.evaluations.len() >= self.budget
    }

    /// Evaluates and records; `None` when the budget is spent.
    fn eval(&mut self, theta: &[f64]) -> Result<Option<f64>, OptimError> {
        if self.exhausted() {
            return Ok(None);
        }
        let value = (self.f)(theta)
            .map_err(|source| OptimError::Objective { theta: theta.to_vec(), source })?;
        self.evaluations.push(Evaluation { theta: theta.to_vec(), value });
        if value < self.evaluations[self.best_index].value {
            self.best_index = self.evaluations.len() - 1;
        }
        Ok(Some(value))
    }

    fn finish(self, milestones: Vec<Milestone>) -> OptimizationTrace {
        OptimizationTrace { evaluations: self.evaluations, milestones, best_index: self.best_index }
    }
}

fn check_bounds(bounds: &[(f64, f64)]) -> Result<(), OptimError> {
    if bounds.is_empty() {
        return Err(OptimError::InvalidConfig("no parameters to optimize".into()));
    }
    for &(lo, hi) in bounds {
        if !(lo < hi) {
            return Err(OptimError::InvalidConfig(format!("empty bound interval [{lo}, {hi}]")));
        }
    }
    Ok(())
}

fn clamp_to(bounds: &[(f64, f64)], theta: &mut [f64]) {
    for (x, &(lo, hi)) in theta.iter_mut().zip(bounds) {
        *x = x.clamp(lo, hi);
    }
}

/// Coordinate-descent sweeps: one bounded golden-section line minimisation
/// per coordinate, accepting the sampled line minimum only when it improves
/// the incumbent, so accepted steps are monotone.
pub fn powell_minimize<F>(f: F, theta0: &[f64], cfg: &PowellConfig) -> Result<OptimizationTrace, OptimError>
where
    F: FnMut(&[f64]) -> Result<f64, EvalFailure>,
{
    check_bounds(&cfg.bounds)?;
    if theta0.len() != cfg.bounds.len() {
        return Err(OptimError::InvalidConfig(format!(
            "theta0 has {} coordinates, bounds have {}",
            theta0.len(),
            cfg.bounds.len()
        )));
    }
    for (x, &(lo, hi)) in theta0.iter().zip(&cfg.bounds) {
        if *x < lo || *x > hi {
            return Err(OptimError::InvalidConfig(format!("theta0 coordinate {x} outside [{lo}, {hi}]")));
        }
    }
    if cfg.budget == 0 || cfg.tol <= 0.0 {
        return Err(OptimError::InvalidConfig("budget and tolerance must be positive".into()));
    }

    const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2

    let mut rec = Recorder::new(f, cfg.budget);
    let mut milestones = Vec::new();
    let mut theta = theta0.to_vec();
    let mut current = match rec.eval(&theta)? {
        Some(v) => v,
        None => unreachable!("budget >= 1"),
    };

    'sweeps: for sweep in 0..cfg.max_sweeps {
        let sweep_start = current;
        for d in 0..theta.len() {
            let (lo, hi) = cfg.bounds[d];
            let probe = |rec: &mut Recorder<F>, theta: &mut Vec<f64>, t: f64| -> Result<Option<f64>, OptimError> {
                let saved = theta[d];
                theta[d] = t;
                let out = rec.eval(theta);
                theta[d] = saved;
                out
            };

            let mut a = lo;
            let mut b = hi;
            let mut line_best: Option<(f64, f64)> = None; // (t, value)
            let note = |t: f64, v: f64, best: &mut Option<(f64, f64)>| {
                if best.map_or(true, |(_, bv)| v < bv) {
                    *best = Some((t, v));
                }
            };

            let mut x1 = b - INV_PHI * (b - a);
            let mut x2 = a + INV_PHI * (b - a);
            let mut f1 = match probe(&mut rec, &mut theta, x1)? {
                Some(v) => v,
                None => break 'sweeps,
            };
            note(x1, f1, &mut line_best);
            let mut f2 = match probe(&mut rec, &mut theta, x2)? {
                Some(v) => v,
                None => {
                    if let Some((t, v)) = line_best {
                        if v < current {
                            theta[d] = t;
                        }
                    }
                    break 'sweeps;
                }
            };
            note(x2, f2, &mut line_best);

            while b - a > cfg.tol {
                if f1 <= f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - INV_PHI * (b - a);
                    match probe(&mut rec, &mut theta, x1)? {
                        Some(v) => f1 = v,
                        None => break,
                    }
                    note(x1, f1, &mut line_best);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + INV_PHI * (b - a);
                    match probe(&mut rec, &mut theta, x2)? {
                        Some(v) => f2 = v,
                        None => break,
                    }
                    note(x2, f2, &mut line_best);
                }
            }

            if let Some((t, v)) = line_best {
                if v < current {
                    theta[d] = t;
                    current = v;
                }
            }
            if rec.exhausted() {
                break 'sweeps;
            }
        }
        milestones.push(Milestone { label: format!("sweep {}", sweep + 1), eval_index: rec.best_index });
        if sweep_start - current < cfg.tol {
            break;
        }
    }

    Ok(rec.finish(milestones))
}

/// Plain generational GA. Ranked parents survive unchanged (so the best
/// individual always survives); offspring come from single-point crossover
/// of uniformly drawn parent pairs plus per-gene uniform mutation, clipped
/// to bounds. Parent fitness is cached, so only offspring spend budget.
pub fn ga_minimize<F>(f: F, cfg: &GaConfig) -> Result<OptimizationTrace, OptimError>
where
    F: FnMut(&[f64]) -> Result<f64, EvalFailure>,
{
    check_bounds(&cfg.bounds)?;
    if cfg.population < 2 {
        return Err(OptimError::InvalidConfig("population must be at least 2".into()));
    }
    if cfg.parents == 0 || cfg.parents >= cfg.population {
        return Err(OptimError::InvalidConfig("parents must satisfy 1 <= parents < population".into()));
    }
    if cfg.budget == 0 {
        return Err(OptimError::InvalidConfig("budget must be positive".into()));
    }
    if !(0.0..=1.0).contains(&cfg.mutation_prob) {
        return Err(OptimError::InvalidConfig("mutation probability must lie in [0, 1]".into()));
    }
    let dim = cfg.bounds.len();
    for seeded in &cfg.seeds {
        if seeded.len() != dim {
            return Err(OptimError::InvalidConfig(format!(
                "population seed has {} coordinates, bounds have {dim}",
                seeded.len()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rec = Recorder::new(f, cfg.budget);
    let mut milestones = Vec::new();

    // individual = (genes, fitness, trace index)
    let mut population: Vec<(Vec<f64>, f64, usize)> = Vec::with_capacity(cfg.population);
    for i in 0..cfg.population {
        let mut genes = if i < cfg.seeds.len() {
            cfg.seeds[i].clone()
        } else {
            cfg.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect()
        };
        clamp_to(&cfg.bounds, &mut genes);
        let index = rec.evaluations.len();
        match rec.eval(&genes)? {
            Some(value) => population.push((genes, value, index)),
            None => break,
        }
    }
    if population.is_empty() {
        return Err(OptimError::InvalidConfig("budget too small to evaluate anything".into()));
    }

    let mut generation = 0usize;
    loop {
        population.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)));
        milestones.push(Milestone {
            label: format!("generation {generation}"),
            eval_index: population[0].2,
        });
        if rec.exhausted() {
            break;
        }
        generation += 1;

        let survivors = cfg.parents.min(population.len());
        population.truncate(survivors);
        let mut offspring = Vec::new();
        for _ in 0..cfg.population - survivors {
            let pa = &population[rng.gen_range(0..survivors)].0;
            let pb = &population[rng.gen_range(0..survivors)].0;
            let mut child = if dim >= 2 {
                let cut = rng.gen_range(1..dim);
                let mut genes = pa[..cut].to_vec();
                genes.extend_from_slice(&pb[cut..]);
                genes
            } else {
                pa.clone()
            };
            for gene in child.iter_mut() {
                if rng.gen::<f64>() < cfg.mutation_prob {
                    *gene += rng.gen_range(-cfg.mutation_magnitude..=cfg.mutation_magnitude);
                }
            }
            clamp_to(&cfg.bounds, &mut child);
            offspring.push(child);
        }
        for child in offspring {
            let index = rec.evaluations.len();
            match rec.eval(&child)? {
                Some(value) => population.push((child, value, index)),
                None => break,
            }
        }
    }

    Ok(rec.finish(milestones))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(center: Vec<f64>) -> impl FnMut(&[f64]) -> Result<f64, EvalFailure> {
        move |theta: &[f64]| {
            Ok(theta.iter().zip(&center).map(|(x, c)| (x - c) * (x - c)).sum())
        }
    }

    #[test]
    fn powell_minimizes_a_separable_quadratic() {
        let center = vec![0.7, -1.2, 0.3];
        let cfg = PowellConfig { bounds: angle_bounds(3), budget: 2000, tol: 1e-4, max_sweeps: 8 };
        let trace = powell_minimize(quadratic(center.clone()), &[0.0, 0.0, 0.0], &cfg).unwrap();
        assert!(trace.best_value() < 1e-6, "best {}", trace.best_value());
        for (x, c) in trace.best().theta.iter().zip(&center) {
            assert!((x - c).abs() < 1e-2);
        }
        // separable convex landscape settles within two sweeps
        assert!(trace.milestones.len() <= 3);
    }

    #[test]
    fn powell_budget_one_returns_theta0() {
        let cfg = PowellConfig { bounds: angle_bounds(2), budget: 1, tol: 1e-3, max_sweeps: 4 };
        let trace = powell_minimize(quadratic(vec![1.0, 1.0]), &[0.25, -0.5], &cfg).unwrap();
        assert_eq!(trace.evaluations.len(), 1);
        assert_eq!(trace.best().theta, vec![0.25, -0.5]);
    }

    #[test]
    fn powell_rejects_out_of_bounds_start() {
        let cfg = PowellConfig::angles(2);
        let err = powell_minimize(quadratic(vec![0.0, 0.0]), &[9.0, 0.0], &cfg).unwrap_err();
        assert!(matches!(err, OptimError::InvalidConfig(_)));
    }

    #[test]
    fn powell_respects_budget_and_bounds() {
        for budget in [1usize, 3, 17, 80] {
            let cfg = PowellConfig { bounds: vec![(-1.0, 2.0), (0.5, 1.5)], budget, tol: 1e-3, max_sweeps: 6 };
            let trace = powell_minimize(quadratic(vec![5.0, 5.0]), &[0.0, 1.0], &cfg).unwrap();
            assert!(trace.evaluations.len() <= budget);
            for e in &trace.evaluations {
                assert!(e.theta[0] >= -1.0 && e.theta[0] <= 2.0);
                assert!(e.theta[1] >= 0.5 && e.theta[1] <= 1.5);
            }
        }
    }

    #[test]
    fn powell_trace_best_is_the_minimum_even_for_noisy_objectives() {
        // deterministic pseudo-noise
        let mut calls = 0u64;
        let noisy = move |theta: &[f64]| -> Result<f64, EvalFailure> {
            calls = calls.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let wobble = (calls >> 33) as f64 / 2f64.powi(31) - 0.5;
            Ok(theta.iter().map(|x| x * x).sum::<f64>() + 0.3 * wobble)
        };
        let cfg = PowellConfig { bounds: angle_bounds(2), budget: 120, tol: 1e-3, max_sweeps: 4 };
        let trace = powell_minimize(noisy, &[1.0, -1.0], &cfg).unwrap();
        let min = trace.evaluations.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
        assert_eq!(trace.best_value(), min);
    }

    #[test]
    fn powell_propagates_objective_failure_with_theta() {
        let failing = |theta: &[f64]| -> Result<f64, EvalFailure> {
            if theta[0] != 0.5 {
                Err("boom".into())
            } else {
                Ok(0.0)
            }
        };
        let cfg = PowellConfig { bounds: vec![(0.0, 1.0)], budget: 50, tol: 1e-2, max_sweeps: 2 };
        let err = powell_minimize(failing, &[0.5], &cfg).unwrap_err();
        match err {
            OptimError::Objective { theta, .. } => assert_ne!(theta[0], 0.5),
            other => panic!("unexpected error {other:?}"),
        }
    }

    fn small_ga(budget: usize, seed: u64) -> GaConfig {
        GaConfig {
            bounds: angle_bounds(3),
            budget,
            seed,
            population: 10,
            parents: 3,
            mutation_prob: 0.2,
            mutation_magnitude: 0.3,
            seeds: Vec::new(),
        }
    }

    #[test]
    fn ga_with_seeded_optimum_never_worsens() {
        let mut cfg = small_ga(200, 5);
        cfg.seeds.push(vec![0.4, -0.3, 1.1]);
        let trace = ga_minimize(quadratic(vec![0.4, -0.3, 1.1]), &cfg).unwrap();
        assert_eq!(trace.best_value(), 0.0);
        // generation bests are weakly decreasing (elitism)
        let bests: Vec<f64> = trace.milestones.iter().map(|m| trace.evaluations[m.eval_index].value).collect();
        for pair in bests.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
    }

    #[test]
    fn ga_is_reproducible_per_seed() {
        let cfg = small_ga(150, 42);
        let a = ga_minimize(quadratic(vec![1.0, 1.0, -1.0]), &cfg).unwrap();
        let b = ga_minimize(quadratic(vec![1.0, 1.0, -1.0]), &cfg).unwrap();
        assert_eq!(a, b);
        let other = ga_minimize(quadratic(vec![1.0, 1.0, -1.0]), &small_ga(150, 43)).unwrap();
        assert_ne!(a.evaluations, other.evaluations);
    }

    #[test]
    fn ga_respects_budget_and_bounds() {
        for budget in [5usize, 10, 37, 150] {
            let cfg = GaConfig { bounds: vec![(-0.5, 0.5), (1.0, 2.0)], ..small_ga(budget, 7) };
            let trace = ga_minimize(quadratic(vec![0.0, 1.5]), &cfg).unwrap();
            assert!(trace.evaluations.len() <= budget);
            for e in &trace.evaluations {
                assert!(e.theta[0] >= -0.5 && e.theta[0] <= 0.5);
                assert!(e.theta[1] >= 1.0 && e.theta[1] <= 2.0);
            }
        }
    }

    #[test]
    fn ga_config_validation() {
        let mut cfg = small_ga(10, 1);
        cfg.population = 1;
        assert!(matches!(ga_minimize(quadratic(vec![0.0; 3]), &cfg).unwrap_err(), OptimError::InvalidConfig(_)));
        let mut cfg = small_ga(10, 1);
        cfg.parents = cfg.population;
        assert!(matches!(ga_minimize(quadratic(vec![0.0; 3]), &cfg).unwrap_err(), OptimError::InvalidConfig(_)));
        let mut cfg = small_ga(10, 1);
        cfg.seeds.push(vec![0.0; 2]);
        assert!(matches!(ga_minimize(quadratic(vec![0.0; 3]), &cfg).unwrap_err(), OptimError::InvalidConfig(_)));
    }

    #[test]
    fn optimizer_config_dispatch() {
        let powell = OptimizerConfig::Powell(PowellConfig::angles(2));
        let trace = powell.minimize(quadratic(vec![0.3, 0.3]), &[0.0, 0.0]).unwrap();
        assert!(trace.best_value() < 1e-4);

        let genetic = OptimizerConfig::Genetic(small_ga(120, 3));
        let trace = genetic.minimize(quadratic(vec![0.3, 0.3, 0.3]), &[0.3, 0.3, 0.3]).unwrap();
        assert_eq!(trace.best_value(), 0.0); // theta0 is seeded into the population
    }
}
