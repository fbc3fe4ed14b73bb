//! Blockage-aware routing and scenario comparison.
//!
//! Edge weights are segment lengths; the graph is undirected. Every
//! operation is a pure function of an immutable graph snapshot.
//!
//! Ties between equally long paths are broken by the segment-id sequence:
//! the path whose sequence is lexicographically smallest (lowest first
//! segment id, then lowest second, ...) wins.

mod compare;
mod dijkstra;
mod naive;
mod topology;
mod yen;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{JunctionId, SegmentId};

pub use compare::{compare_scenarios, scenario_label, ScenarioComparison, ScenarioFigure};
pub use topology::{RoutingGraph, Topology};

use dijkstra::{best_path, Path};

/// Effective speed of a loaded logging truck on a forest road, km/h.
///
/// Derived from the distance/time pairs of the reference scenarios
/// (7.769 km in 33.29 min and so on), all of which give d/t = 14.0.
pub const DEFAULT_SPEED_KMH: f64 = 14.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleProfile {
    pub name: String,
    pub speed_kmh: f64,
    #[serde(default)]
    pub payload_note: String,
}

impl VehicleProfile {
    pub fn new(name: impl Into<String>, speed_kmh: f64) -> Result<Self> {
        let profile = Self {
            name: name.into(),
            speed_kmh,
            payload_note: String::new(),
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.speed_kmh.is_finite() || self.speed_kmh <= 0.0 {
            return Err(Error::validation(format!(
                "profile {}: speed must be positive, got {}",
                self.name, self.speed_kmh
            )));
        }
        Ok(())
    }
}

impl Default for VehicleProfile {
    fn default() -> Self {
        Self {
            name: "logging-truck".to_owned(),
            speed_kmh: DEFAULT_SPEED_KMH,
            payload_note: "up to 30 t of timber".to_owned(),
        }
    }
}

/// Minutes needed to drive `distance_m` at the profile's speed.
pub fn travel_time(distance_m: f64, profile: &VehicleProfile) -> f64 {
    distance_m / 1000.0 * 60.0 / profile.speed_kmh
}

/// Minutes truncated (not rounded) to two decimals: 33.2957 -> "33.29".
pub fn display_minutes(minutes: f64) -> String {
    format!("{:.2}", truncate_2(minutes))
}

/// Percentages rounded to two decimals.
pub fn display_percent(pct: f64) -> String {
    format!("{pct:.2}")
}

/// Kilometers with three decimals, e.g. "7.769".
pub fn display_km(distance_m: f64) -> String {
    format!("{:.3}", distance_m / 1000.0)
}

fn truncate_2(x: f64) -> f64 {
    // The epsilon keeps values like 58.29 (stored as 58.28999...) intact.
    let scaled = (x.abs() * 100.0 * (1.0 + 1e-12)).trunc() / 100.0;
    scaled.copysign(x)
}

/// A computed route between two junctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub segment_ids: Vec<SegmentId>,
    /// One more entry than `segment_ids`; empty when infeasible.
    pub junction_ids: Vec<JunctionId>,
    pub distance_m: f64,
    pub time_min: f64,
    pub time_display: String,
    pub feasible: bool,
}

impl RoutePlan {
    fn from_path(topo: &Topology, path: Path, profile: &VehicleProfile) -> Self {
        let time_min = travel_time(path.distance, profile);
        RoutePlan {
            segment_ids: path.segments,
            junction_ids: path.nodes.into_iter().map(|i| topo.id_at(i)).collect(),
            distance_m: path.distance,
            time_min,
            time_display: display_minutes(time_min),
            feasible: true,
        }
    }

    pub fn infeasible() -> Self {
        RoutePlan {
            segment_ids: Vec::new(),
            junction_ids: Vec::new(),
            distance_m: 0.0,
            time_min: 0.0,
            time_display: display_minutes(0.0),
            feasible: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Along the segment geometry, start to end.
    Forward,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LegPurpose {
    Advance,
    Backtrack,
    Reroute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveLeg {
    pub segment_id: SegmentId,
    pub from: JunctionId,
    pub to: JunctionId,
    pub direction: Direction,
    pub purpose: LegPurpose,
    pub length_m: f64,
}

/// What an uninformed driver actually drives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveTrace {
    pub legs: Vec<DriveLeg>,
    pub total_distance_m: f64,
    pub total_time_min: f64,
    pub time_display: String,
    /// Blockages in the order the driver ran into them.
    pub encountered_blockages: Vec<SegmentId>,
    /// False when no blockage-free path to the destination exists.
    pub feasible: bool,
}

impl DriveTrace {
    pub fn distance_by(&self, purpose: LegPurpose) -> f64 {
        self.legs
            .iter()
            .filter(|l| l.purpose == purpose)
            .map(|l| l.length_m)
            .sum()
    }
}

fn resolve(topo: &Topology, id: JunctionId) -> Result<usize> {
    topo.index_of(id)
        .ok_or_else(|| Error::not_found("junction", id))
}

/// Shortest route from `origin` to `dest` that avoids `blocked`.
///
/// Returns an infeasible plan (empty, `feasible == false`) when `dest`
/// cannot be reached.
pub fn shortest_path<G: RoutingGraph + ?Sized>(
    graph: &G,
    origin: JunctionId,
    dest: JunctionId,
    blocked: &BTreeSet<SegmentId>,
    profile: &VehicleProfile,
) -> Result<RoutePlan> {
    let topo = graph.topology();
    let (o, d) = (resolve(topo, origin)?, resolve(topo, dest)?);
    let removed = vec![false; topo.junction_count()];
    Ok(
        match best_path(topo, o, d, |s| !blocked.contains(&s), &removed) {
            Some(path) => RoutePlan::from_path(topo, path, profile),
            None => RoutePlan::infeasible(),
        },
    )
}

/// The `k` shortest loopless routes avoiding `blocked`, ascending by
/// distance. Fewer are returned when fewer exist.
pub fn alternative_routes<G: RoutingGraph + ?Sized>(
    graph: &G,
    origin: JunctionId,
    dest: JunctionId,
    blocked: &BTreeSet<SegmentId>,
    k: usize,
    profile: &VehicleProfile,
) -> Result<Vec<RoutePlan>> {
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    let topo = graph.topology();
    let (o, d) = (resolve(topo, origin)?, resolve(topo, dest)?);
    Ok(yen::k_shortest(topo, o, d, blocked, k)
        .into_iter()
        .map(|p| RoutePlan::from_path(topo, p, profile))
        .collect())
}

/// Drive from `origin` toward `dest` without knowing about `blockages`
/// in advance.
///
/// The driver follows the shortest route they know of. Arriving at a
/// junction whose next planned segment is blocked, they learn of that
/// blockage and replan from there: driving back along the road they came
/// in on (backtrack legs) until the replanned route leaves it, then on to
/// the destination (reroute legs). This repeats for every blockage met.
/// The trace is infeasible when no blockage-free route exists.
pub fn simulate_naive_drive<G: RoutingGraph + ?Sized>(
    graph: &G,
    origin: JunctionId,
    dest: JunctionId,
    blockages: &BTreeSet<SegmentId>,
    profile: &VehicleProfile,
) -> Result<DriveTrace> {
    let topo = graph.topology();
    let (o, d) = (resolve(topo, origin)?, resolve(topo, dest)?);
    let outcome = naive::drive(topo, o, d, blockages);
    let total_distance_m: f64 = outcome.legs.iter().map(|l| l.length_m).sum();
    let total_time_min = travel_time(total_distance_m, profile);
    Ok(DriveTrace {
        legs: outcome.legs,
        total_distance_m,
        total_time_min,
        time_display: display_minutes(total_time_min),
        encountered_blockages: outcome.encountered,
        feasible: outcome.feasible,
    })
}
