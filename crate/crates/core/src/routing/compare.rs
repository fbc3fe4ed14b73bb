use serde::{Deserialize, Serialize};

use super::{display_percent, DriveTrace, RoutePlan};
use crate::error::{Error, Result};

/// One percentage figure for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFigure {
    pub scenario: String,
    /// Full precision.
    pub value: f64,
    pub display: String,
}

impl ScenarioFigure {
    fn new(scenario: String, value: f64) -> Self {
        Self {
            display: display_percent(value),
            scenario,
            value,
        }
    }
}

/// Baseline (scenario A) against the naive trace (B) and the informed
/// alternatives (C, D, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioComparison {
    pub baseline: RoutePlan,
    pub naive: Option<DriveTrace>,
    pub alternatives: Vec<RoutePlan>,
    /// `100 (d_X - d_A) / d_A` for B and each alternative.
    pub pct_change_d: Vec<ScenarioFigure>,
    /// `100 (t_X - t_A) / t_A` for B and each alternative.
    pub pct_change_t: Vec<ScenarioFigure>,
    /// `100 (t_B - t_X) / t_A` for each alternative.
    pub time_improvement_vs_naive: Vec<ScenarioFigure>,
}

/// Label of the `index`-th alternative: C, D, E, ...
pub fn scenario_label(index: usize) -> String {
    match u8::try_from(index).ok().filter(|i| *i < 24) {
        Some(i) => char::from(b'C' + i).to_string(),
        None => format!("ALT{}", index + 1),
    }
}

fn pct(value: f64, reference: f64) -> Result<f64> {
    if reference > 0.0 {
        Ok(100.0 * value / reference)
    } else if value == 0.0 {
        Ok(0.0)
    } else {
        Err(Error::validation(
            "baseline has zero length but the compared scenario does not",
        ))
    }
}

pub fn compare_scenarios(
    baseline: &RoutePlan,
    naive: Option<&DriveTrace>,
    alternatives: &[RoutePlan],
) -> Result<ScenarioComparison> {
    if !baseline.feasible {
        return Err(Error::validation("baseline route is infeasible"));
    }
    let (d_a, t_a) = (baseline.distance_m, baseline.time_min);

    let mut rows: Vec<(String, f64, f64)> = Vec::new();
    if let Some(trace) = naive.filter(|t| t.feasible) {
        rows.push(("B".to_owned(), trace.total_distance_m, trace.total_time_min));
    }
    for (i, alt) in alternatives.iter().enumerate().filter(|(_, a)| a.feasible) {
        rows.push((scenario_label(i), alt.distance_m, alt.time_min));
    }

    let mut pct_change_d = Vec::with_capacity(rows.len());
    let mut pct_change_t = Vec::with_capacity(rows.len());
    for (label, d, t) in &rows {
        pct_change_d.push(ScenarioFigure::new(label.clone(), pct(d - d_a, d_a)?));
        pct_change_t.push(ScenarioFigure::new(label.clone(), pct(t - t_a, t_a)?));
    }

    let mut time_improvement_vs_naive = Vec::new();
    if let Some(trace) = naive.filter(|t| t.feasible) {
        for (i, alt) in alternatives.iter().enumerate().filter(|(_, a)| a.feasible) {
            let value = pct(trace.total_time_min - alt.time_min, t_a)?;
            time_improvement_vs_naive.push(ScenarioFigure::new(scenario_label(i), value));
        }
    }

    Ok(ScenarioComparison {
        baseline: baseline.clone(),
        naive: naive.cloned(),
        alternatives: alternatives.to_vec(),
        pct_change_d,
        pct_change_t,
        time_improvement_vs_naive,
    })
}
