//! Serialisable report types shared by the library, tests, and the CLI.
//!
//! Tables mirror the two-column cost/probability layout used for the
//! experiment write-ups; probabilities are printed both as raw mass and as a
//! one-decimal percentage to keep the scale unambiguous.

use serde::Serialize;
use serde_json::json;

use crate::encoding::{Configuration, DiagonalCost, PauliTermSum, QubitLayout};
use crate::graph::{Graph, Weight};
use crate::objective::{CostDistribution, DistributionSource, ObjectiveKind};
use crate::optimize::OptimizationTrace;
use crate::sim::StateVector;
use crate::vqa::DistSummary;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionRow {
    pub cost: f64,
    pub mass: f64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveReport {
    #[serde(flatten)]
    pub kind: ObjectiveKind,
    pub value: f64,
}

/// Serialises as `{support: [[cost, mass]], rows, source, objective}`; the
/// rows repeat the support with an explicit percentage so the scale of every
/// printed probability is unambiguous.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport {
    pub support: Vec<[f64; 2]>,
    pub rows: Vec<DistributionRow>,
    pub source: DistributionSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveReport>,
}

impl DistributionReport {
    pub fn from_distribution(d: &CostDistribution, objective: Option<ObjectiveReport>) -> DistributionReport {
        let rows: Vec<DistributionRow> = d
            .support()
            .iter()
            .map(|&(cost, mass)| DistributionRow { cost: cost.to_f64(), mass, percent: 100.0 * mass })
            .collect();
        let support = rows.iter().map(|r| [r.cost, r.mass]).collect();
        DistributionReport { support, rows, source: d.source(), objective }
    }

    /// Raw squared amplitudes grouped by cost, without normalisation, plus
    /// the total mass. This is what the warm-start preparation reports.
    pub fn from_state_raw(state: &StateVector, layout: &QubitLayout, g: &Graph) -> (DistributionReport, f64) {
        let diag = DiagonalCost::new(layout, g).expect("layout fits the simulator");
        let mut support: std::collections::BTreeMap<Weight, f64> = std::collections::BTreeMap::new();
        let mut total = 0.0;
        for (index, amp) in state.amplitudes().iter().enumerate() {
            let p = amp.norm_sqr();
            if p > 0.0 {
                *support.entry(diag.cost_weight(index as u64)).or_insert(0.0) += p;
                total += p;
            }
        }
        let rows: Vec<DistributionRow> = support
            .into_iter()
            .map(|(cost, mass)| DistributionRow { cost: cost.to_f64(), mass, percent: 100.0 * mass })
            .collect();
        let support = rows.iter().map(|r| [r.cost, r.mass]).collect();
        (DistributionReport { support, rows, source: DistributionSource::Exact, objective: None }, total)
    }

    /// Two-column table in the cost / probability layout.
    pub fn render_table(&self) -> String {
        let mut out = String::from("    cost   percent          mass\n");
        for row in &self.rows {
            out.push_str(&format!("{:>8}   {:>6.1}%  {:>12.6}\n", row.cost, row.percent, row.mass));
        }
        if let Some(objective) = &self.objective {
            out.push_str(&format!("objective {} = {}\n", objective.kind, objective.value));
        }
        out
    }
}

/// The layout/operator schema consumed by `pathcut inspect`:
/// `{offsets, arc_positions: {label: [qubits]}, terms: [{coeff, support}], offset}`.
pub fn layout_json(layout: &QubitLayout, pauli: &PauliTermSum) -> serde_json::Value {
    let arc_positions: std::collections::BTreeMap<String, Vec<usize>> =
        layout.arc_positions().iter().map(|(label, qubits)| (label.to_string(), qubits.clone())).collect();
    json!({
        "offsets": layout.offsets(),
        "total_qubits": layout.total_qubits(),
        "arc_positions": arc_positions,
        "terms": &pauli.terms,
        "offset": pauli.offset,
    })
}

/// Debug dump of a statevector: `{n, amps: [[re, im], ...]}`.
pub fn state_json(state: &StateVector) -> serde_json::Value {
    let amps: Vec<[f64; 2]> = state.amplitudes().iter().map(|a| [a.re, a.im]).collect();
    json!({ "n": state.n(), "amps": amps })
}

/// One JSON line per objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub theta: Vec<f64>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist_summary: Option<DistSummary>,
}

/// Zips the optimizer trace with the evaluator's distribution digests; the
/// two line up one-to-one by call order.
pub fn trace_records(trace: &OptimizationTrace, summaries: &[DistSummary]) -> Vec<TraceRecord> {
    trace
        .evaluations
        .iter()
        .enumerate()
        .map(|(i, e)| TraceRecord {
            iter: i,
            theta: e.theta.clone(),
            value: e.value,
            dist_summary: summaries.get(i).cloned(),
        })
        .collect()
}

/// The compact `cost (percent)` listing used for evolution printouts.
pub fn distribution_line(d: &CostDistribution, max_entries: usize) -> String {
    let mut parts: Vec<String> = d
        .support()
        .iter()
        .take(max_entries)
        .map(|&(cost, mass)| format!("{} ({:.1})", cost.to_f64(), 100.0 * mass))
        .collect();
    if d.support().len() > max_entries {
        parts.push("...".into());
    }
    parts.join("  ")
}

/// Best decoded configuration of a distribution, for result reports.
pub fn best_configuration(
    d: &CostDistribution,
    layout: &QubitLayout,
    g: &Graph,
) -> Option<(String, Vec<crate::graph::ArcLabel>, Weight)> {
    let per_bitstring = d.per_bitstring()?;
    let diag = DiagonalCost::new(layout, g).ok()?;
    let best = per_bitstring.keys().min_by_key(|&&b| (diag.cost_weight(b), b)).copied()?;
    let bits = Configuration::from_basis_index(layout.total_qubits(), best).to_string();
    let arcs: Vec<_> = diag.decode_index(best).into_iter().collect();
    let cost = diag.cost_weight(best);
    Some((bits, arcs, cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::pauli_cost_terms;
    use crate::instances;
    use crate::sim::{self, MixerTopology, WarmStart};

    #[test]
    fn table_and_json_share_numbers() {
        let g = instances::g7();
        let layout = QubitLayout::new(g.enumerate_paths(16)).unwrap();
        let warm = WarmStart::uniform_angle(vec![1; 5], &layout, MixerTopology::Ring, 0.4);
        let state = sim::prepare_warm_start(&layout, &warm, MixerTopology::Ring).unwrap();
        let dist = sim::exact_distribution(&state, &layout, &g).unwrap();
        let report = DistributionReport::from_distribution(&dist, None);
        let table = report.render_table();
        let value: serde_json::Value = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        for (i, row) in report.rows.iter().enumerate() {
            assert_eq!(value["rows"][i]["mass"].as_f64().unwrap(), row.mass);
            assert_eq!(value["rows"][i]["cost"].as_f64().unwrap(), row.cost);
            assert!(table.contains(&format!("{}", row.cost)));
        }
    }

    #[test]
    fn layout_schema_fields() {
        let g = instances::g7();
        let layout = QubitLayout::new(g.enumerate_paths(16)).unwrap();
        let pauli = pauli_cost_terms(&layout, &g).unwrap();
        let value = layout_json(&layout, &pauli);
        assert_eq!(value["offsets"], json!([0, 2, 6, 9, 13]));
        assert_eq!(value["arc_positions"]["3"], json!([2, 6, 9, 13]));
        assert!(value["terms"].as_array().unwrap().len() > 10);
        assert!(value["offset"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn raw_state_rows_preserve_total_mass() {
        let g = instances::g7();
        let layout = QubitLayout::new(g.enumerate_paths(16)).unwrap();
        let warm = WarmStart::uniform_angle(vec![1; 5], &layout, MixerTopology::Ring, 0.3);
        let state = sim::prepare_warm_start(&layout, &warm, MixerTopology::Ring).unwrap();
        let (report, total) = DistributionReport::from_state_raw(&state, &layout, &g);
        let sum: f64 = report.rows.iter().map(|r| r.mass).sum();
        assert!((sum - total).abs() < 1e-12);
        assert!((total - state.norm_sq()).abs() < 1e-12);
        assert!(total < 1.0); // warm-start factors shed mass
    }
}
