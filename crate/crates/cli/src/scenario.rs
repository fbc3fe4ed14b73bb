use std::collections::BTreeSet;
use std::fmt::Write;

use frmp_core::network::NetworkGraph;
use frmp_core::{
    alternative_routes, compare_scenarios, display_km, shortest_path, simulate_naive_drive, JunctionId,
    ScenarioComparison, SegmentId, VehicleProfile,
};

pub struct Scenario {
    pub comparison: ScenarioComparison,
    pub blocked: BTreeSet<SegmentId>,
    /// Destination unreachable, with or without the blockages.
    pub unreachable: bool,
}

/// Baseline without blockages; with blockages, the naive drive and `k`
/// informed alternatives.
pub fn run(
    graph: &NetworkGraph,
    from: JunctionId,
    to: JunctionId,
    blocked: BTreeSet<SegmentId>,
    k: usize,
    profile: &VehicleProfile,
) -> frmp_core::Result<Scenario> {
    let baseline = shortest_path(graph, from, to, &BTreeSet::new(), profile)?;
    if !baseline.feasible {
        let comparison = ScenarioComparison {
            baseline,
            naive: None,
            alternatives: Vec::new(),
            pct_change_d: Vec::new(),
            pct_change_t: Vec::new(),
            time_improvement_vs_naive: Vec::new(),
        };
        return Ok(Scenario {
            comparison,
            blocked,
            unreachable: true,
        });
    }
    if blocked.is_empty() {
        return Ok(Scenario {
            comparison: compare_scenarios(&baseline, None, &[])?,
            blocked,
            unreachable: false,
        });
    }
    let naive = simulate_naive_drive(graph, from, to, &blocked, profile)?;
    let alternatives = alternative_routes(graph, from, to, &blocked, k, profile)?;
    let unreachable = !naive.feasible;
    Ok(Scenario {
        comparison: compare_scenarios(&baseline, Some(&naive), &alternatives)?,
        blocked,
        unreachable,
    })
}

fn route(ids: impl IntoIterator<Item = SegmentId>) -> String {
    let parts: Vec<String> = ids.into_iter().map(|s| s.to_string()).collect();
    if parts.is_empty() {
        "(start = destination)".to_owned()
    } else {
        parts.join("-")
    }
}

/// The two fixed-width tables: distance and time per scenario, then the
/// percentage changes against scenario A.
pub fn render(s: &Scenario) -> String {
    let cmp = &s.comparison;
    let mut rows: Vec<(String, String, String, String)> = Vec::new();
    let a = &cmp.baseline;
    if a.feasible {
        rows.push(("A".into(), route(a.segment_ids.iter().copied()), display_km(a.distance_m), a.time_display.clone()));
    }
    if let Some(b) = &cmp.naive {
        if b.feasible {
            let legs = route(b.legs.iter().map(|l| l.segment_id));
            rows.push(("B".into(), legs, display_km(b.total_distance_m), b.time_display.clone()));
        }
    }
    for (fig, alt) in cmp.pct_change_d.iter().filter(|f| f.scenario != "B").zip(&cmp.alternatives) {
        rows.push((
            fig.scenario.clone(),
            route(alt.segment_ids.iter().copied()),
            display_km(alt.distance_m),
            alt.time_display.clone(),
        ));
    }

    let mut out = String::new();
    if s.blocked.is_empty() {
        out.push_str("Blocked segments: none\n\n");
    } else {
        let ids: Vec<String> = s.blocked.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(out, "Blocked segments: {}\n", ids.join(", "));
    }
    if rows.is_empty() {
        out.push_str("No route between the requested junctions.\n");
        return out;
    }
    let width = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(5);
    let _ = writeln!(out, "{:<8}  {:<width$}  {:>8}  {:>8}", "Scenario", "Route", "d (km)", "t (min)");
    for (label, path, d, t) in &rows {
        let _ = writeln!(out, "{label:<8}  {path:<width$}  {d:>8}  {t:>8}");
    }
    if let Some(b) = &cmp.naive {
        if !b.feasible {
            out.push_str("B         no route avoids the blocked segments\n");
        }
    }

    if !cmp.pct_change_d.is_empty() {
        out.push_str("\nChange relative to scenario A\n");
        let _ = writeln!(out, "{:<8}  {:>8}  {:>8}", "Scenario", "d (%)", "t (%)");
        for (d, t) in cmp.pct_change_d.iter().zip(&cmp.pct_change_t) {
            let _ = writeln!(out, "{:<8}  {:>8}  {:>8}", d.scenario, d.display, t.display);
        }
    }
    if !cmp.time_improvement_vs_naive.is_empty() {
        out.push_str("\nTime saved against scenario B, as % of t(A)\n");
        for f in &cmp.time_improvement_vs_naive {
            let _ = writeln!(out, "{:<8}  {:>8}", f.scenario, f.display);
        }
    }
    out
}
