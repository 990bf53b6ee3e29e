//! Cost distributions and the scalar objectives trained against them.
//!
//! A [`CostDistribution`] is the pushforward of a bitstring distribution
//! through the classical cut cost. It can be exact (from squared amplitudes)
//! or empirical (from sampled shots); every objective consumes it or, for
//! CVaR, the raw sample multiset.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::encoding::DiagonalCost;
use crate::graph::Weight;

#[derive(Debug, Error, PartialEq)]
pub enum ObjectiveError {
    #[error("empty sample set")]
    EmptySamples,
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("quantile level must lie in (0, 1), got {0}")]
    InvalidRho(f64),
    #[error("lambda weights must be nonnegative and not all zero")]
    InvalidLambdas,
    #[error("cannot parse objective `{0}`")]
    Parse(String),
}

/// Where a distribution's masses came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSource {
    Exact,
    Empirical { shots: u64, seed: u64 },
}

/// Pushforward distribution over cost values, sorted ascending, masses
/// normalised to total 1. Retains the per-bitstring distribution when known
/// so the best observed configuration can be extracted later.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDistribution {
    support: Vec<(Weight, f64)>,
    source: DistributionSource,
    per_bitstring: Option<BTreeMap<u64, f64>>,
    n_qubits: usize,
}

impl CostDistribution {
    pub fn new(
        support: BTreeMap<Weight, f64>,
        source: DistributionSource,
        per_bitstring: Option<BTreeMap<u64, f64>>,
        n_qubits: usize,
    ) -> CostDistribution {
        let support: Vec<(Weight, f64)> = support.into_iter().collect();
        debug_assert!(support.iter().all(|&(_, m)| m >= 0.0));
        debug_assert!((support.iter().map(|&(_, m)| m).sum::<f64>() - 1.0).abs() < 1e-9);
        CostDistribution { support, source, per_bitstring, n_qubits }
    }

    /// Groups sampled basis states by their decoded cost. Masses are shot
    /// frequencies.
    pub fn from_sampled_indices(draws: &[u64], diag: &DiagonalCost, seed: u64) -> Result<CostDistribution, ObjectiveError> {
        if draws.is_empty() {
            return Err(ObjectiveError::EmptySamples);
        }
        let shot_mass = 1.0 / draws.len() as f64;
        let mut support: BTreeMap<Weight, f64> = BTreeMap::new();
        let mut per_bitstring: BTreeMap<u64, f64> = BTreeMap::new();
        for &b in draws {
            *support.entry(diag.cost_weight(b)).or_insert(0.0) += shot_mass;
            *per_bitstring.entry(b).or_insert(0.0) += shot_mass;
        }
        Ok(CostDistribution::new(
            support,
            DistributionSource::Empirical { shots: draws.len() as u64, seed },
            Some(per_bitstring),
            diag.n(),
        ))
    }

    pub fn support(&self) -> &[(Weight, f64)] {
        &self.support
    }

    pub fn source(&self) -> DistributionSource {
        self.source
    }

    pub fn per_bitstring(&self) -> Option<&BTreeMap<u64, f64>> {
        self.per_bitstring.as_ref()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn min_cost(&self) -> Weight {
        self.support[0].0
    }

    pub fn expectation(&self) -> f64 {
        self.support.iter().map(|(c, m)| c.to_f64() * m).sum()
    }

    /// Smallest cost whose cumulative mass strictly exceeds `rho`.
    ///
    /// This is the right-continuous generalized inverse of the CDF; a small
    /// epsilon keeps accumulated float noise from flipping boundary cases.
    pub fn quantile(&self, rho: f64) -> Result<f64, ObjectiveError> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(ObjectiveError::InvalidRho(rho));
        }
        let mut cumulative = 0.0;
        for (cost, mass) in &self.support {
            cumulative += mass;
            if cumulative > rho + 1e-9 {
                return Ok(cost.to_f64());
            }
        }
        Ok(self.support.last().expect("distribution is nonempty").0.to_f64())
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is a valid level")
    }

    /// Distributional CVaR: mean of the cheapest `alpha` fraction of mass,
    /// splitting the boundary atom fractionally. `alpha = 1` recovers the
    /// expectation. This is the infinite-shot limit of the sample CVaR.
    pub fn cvar(&self, alpha: f64) -> Result<f64, ObjectiveError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(ObjectiveError::InvalidAlpha(alpha));
        }
        let mut taken = 0.0;
        let mut acc = 0.0;
        for (cost, mass) in &self.support {
            let take = mass.min(alpha - taken);
            acc += cost.to_f64() * take;
            taken += take;
            if taken >= alpha {
                break;
            }
        }
        Ok(acc / alpha)
    }

    /// `l1 * Q_rho + l2 * Med + l3 * E[C]`.
    pub fn composite_f1(&self, l1: f64, l2: f64, l3: f64, rho: f64) -> Result<f64, ObjectiveError> {
        validate_lambdas(l1, l2, l3)?;
        Ok(l1 * self.quantile(rho)? + l2 * self.median() + l3 * self.expectation())
    }
}

fn validate_lambdas(l1: f64, l2: f64, l3: f64) -> Result<(), ObjectiveError> {
    if l1 < 0.0 || l2 < 0.0 || l3 < 0.0 || (l1 == 0.0 && l2 == 0.0 && l3 == 0.0) {
        return Err(ObjectiveError::InvalidLambdas);
    }
    Ok(())
}

/// Mean of the `ceil(alpha * K)` smallest of `K` sampled costs.
pub fn cvar(costs: &[f64], alpha: f64) -> Result<f64, ObjectiveError> {
    if costs.is_empty() {
        return Err(ObjectiveError::EmptySamples);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(ObjectiveError::InvalidAlpha(alpha));
    }
    let mut sorted = costs.to_vec();
    sorted.sort_by(f64::total_cmp);
    // epsilon guard: an exact-integer alpha*K must not round up
    let m = ((alpha * costs.len() as f64 - 1e-9).ceil() as usize).clamp(1, costs.len());
    Ok(sorted[..m].iter().sum::<f64>() / m as f64)
}

/// The scalar objective families exposed to the optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveKind {
    Expectation,
    Cvar { alpha: f64 },
    CompositeF1 { lambda1: f64, lambda2: f64, lambda3: f64, rho: f64 },
}

impl ObjectiveKind {
    /// The strongly unbalanced preset (1e8, 1e4, 1) with the 0.75 level.
    pub fn f1_unbalanced() -> ObjectiveKind {
        ObjectiveKind::CompositeF1 { lambda1: 1e8, lambda2: 1e4, lambda3: 1.0, rho: 0.75 }
    }

    /// The balanced preset (1, 1, 1) with the 0.75 level.
    pub fn f1_balanced() -> ObjectiveKind {
        ObjectiveKind::CompositeF1 { lambda1: 1.0, lambda2: 1.0, lambda3: 1.0, rho: 0.75 }
    }

    pub fn validate(&self) -> Result<(), ObjectiveError> {
        match *self {
            ObjectiveKind::Expectation => Ok(()),
            ObjectiveKind::Cvar { alpha } => {
                if alpha > 0.0 && alpha <= 1.0 {
                    Ok(())
                } else {
                    Err(ObjectiveError::InvalidAlpha(alpha))
                }
            }
            ObjectiveKind::CompositeF1 { lambda1, lambda2, lambda3, rho } => {
                validate_lambdas(lambda1, lambda2, lambda3)?;
                if rho > 0.0 && rho < 1.0 {
                    Ok(())
                } else {
                    Err(ObjectiveError::InvalidRho(rho))
                }
            }
        }
    }

    /// Evaluates against an exact (or already-aggregated) distribution.
    pub fn evaluate_distribution(&self, d: &CostDistribution) -> Result<f64, ObjectiveError> {
        match *self {
            ObjectiveKind::Expectation => Ok(d.expectation()),
            ObjectiveKind::Cvar { alpha } => d.cvar(alpha),
            ObjectiveKind::CompositeF1 { lambda1, lambda2, lambda3, rho } => {
                d.composite_f1(lambda1, lambda2, lambda3, rho)
            }
        }
    }

    /// Evaluates against a sampled cost multiset. CVaR uses the
    /// `ceil(alpha*K)` sample formula; the other objectives aggregate the
    /// empirical distribution.
    pub fn evaluate_samples(&self, costs: &[Weight]) -> Result<f64, ObjectiveError> {
        if costs.is_empty() {
            return Err(ObjectiveError::EmptySamples);
        }
        match *self {
            ObjectiveKind::Cvar { alpha } => {
                let as_f64: Vec<f64> = costs.iter().map(Weight::to_f64).collect();
                cvar(&as_f64, alpha)
            }
            _ => {
                let shot_mass = 1.0 / costs.len() as f64;
                let mut support = BTreeMap::new();
                for c in costs {
                    *support.entry(*c).or_insert(0.0) += shot_mass;
                }
                let d = CostDistribution::new(
                    support,
                    DistributionSource::Empirical { shots: costs.len() as u64, seed: 0 },
                    None,
                    0,
                );
                self.evaluate_distribution(&d)
            }
        }
    }

    /// Parses the CLI grammar: `expectation`, `cvar:<alpha>`,
    /// `f1:<l1>,<l2>,<l3>[,<rho>]`, `f1:unbalanced`, `f1:balanced`.
    pub fn parse(text: &str) -> Result<ObjectiveKind, ObjectiveError> {
        let bad = || ObjectiveError::Parse(text.to_string());
        let kind = match text.trim() {
            "expectation" => ObjectiveKind::Expectation,
            "f1:unbalanced" => ObjectiveKind::f1_unbalanced(),
            "f1:balanced" => ObjectiveKind::f1_balanced(),
            other => {
                if let Some(alpha) = other.strip_prefix("cvar:") {
                    ObjectiveKind::Cvar { alpha: alpha.trim().parse().map_err(|_| bad())? }
                } else if let Some(rest) = other.strip_prefix("f1:") {
                    let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
                    if parts.len() != 3 && parts.len() != 4 {
                        return Err(bad());
                    }
                    let mut values = [0.0f64; 4];
                    values[3] = 0.75;
                    for (slot, part) in values.iter_mut().zip(&parts) {
                        *slot = part.parse().map_err(|_| bad())?;
                    }
                    ObjectiveKind::CompositeF1 {
                        lambda1: values[0],
                        lambda2: values[1],
                        lambda3: values[2],
                        rho: values[3],
                    }
                } else {
                    return Err(bad());
                }
            }
        };
        kind.validate()?;
        Ok(kind)
    }
}

impl std::fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            ObjectiveKind::Expectation => write!(f, "expectation"),
            ObjectiveKind::Cvar { alpha } => write!(f, "cvar:{alpha}"),
            ObjectiveKind::CompositeF1 { lambda1, lambda2, lambda3, rho } => {
                write!(f, "f1:{lambda1},{lambda2},{lambda3},{rho}")
            }
        }
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = ObjectiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ObjectiveKind::parse(s)
    }
}

/// How objective values are estimated during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EvalMode {
    /// Deterministic evaluation from the full statevector.
    ExactDistribution,
    /// Fresh finite-shot estimate per objective call; per-call seeds derive
    /// from `seed` and the call counter.
    Shots { shots: u64, seed: u64 },
}

/// Objective kind plus estimation mode: everything an optimizer run needs to
/// score a parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub eval: EvalMode,
}
