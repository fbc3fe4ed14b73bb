//! Problem reports: catalog, lifecycle, repair assignments and cost estimates.
//!
//! Reports move through `Active -> Assigned -> Resolved` (or straight from
//! `Active` to `Resolved`). Operations on a [`ReportBook`] validate against
//! the current state and return the records they would change; persisting
//! them is the caller's job (see [`crate::store`]).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::network::{End, JunctionId, NetworkGraph, RoadSegment, SegmentId};
use crate::routing::{shortest_path, VehicleProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReportId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssignmentId(pub u64);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub String);

impl UserId {
    pub fn new(id: impl Into<String>) -> Self {
        UserId(id.into())
    }
}

impl fmt::Display for ReportId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for AssignmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReportStatus {
    Active,
    Assigned,
    Resolved,
}

impl ReportStatus {
    pub const ALL: [ReportStatus; 3] = [ReportStatus::Active, ReportStatus::Assigned, ReportStatus::Resolved];

    /// The lifecycle: Active -> Assigned, Active -> Resolved, Assigned -> Resolved.
    pub fn can_transition_to(self, next: ReportStatus) -> bool {
        use ReportStatus::*;
        matches!((self, next), (Active, Assigned) | (Active, Resolved) | (Assigned, Resolved))
    }
}

impl fmt::Display for ReportStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ReportStatus::Active => "Active",
            ReportStatus::Assigned => "Assigned",
            ReportStatus::Resolved => "Resolved",
        };
        f.write_str(s)
    }
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemType {
    pub code: String,
    pub blocks_traffic: bool,
    pub base_cost: f64,
    pub rate_per_km: f64,
}

/// Problem types and their cost parameters. Loaded from a TOML file with
/// one `[[problem_type]]` table per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(rename = "problem_type")]
    pub types: Vec<ProblemType>,
}

// "Closed Road", "closed_road" and "ClosedRoad" all name the same type.
fn normalize_code(code: &str) -> String {
    code.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

impl Catalog {
    pub fn new(types: Vec<ProblemType>) -> Result<Self> {
        let catalog = Catalog { types };
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let catalog: Catalog = toml::from_str(text).map_err(|e| Error::Parse {
            index: None,
            message: format!("catalog: {e}"),
        })?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("catalog serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for t in &self.types {
            if normalize_code(&t.code).is_empty() {
                return Err(Error::validation("catalog: empty problem code"));
            }
            if !seen.insert(normalize_code(&t.code)) {
                return Err(Error::validation(format!("catalog: duplicate code {}", t.code)));
            }
            if !(t.base_cost >= 0.0 && t.base_cost.is_finite())
                || !(t.rate_per_km >= 0.0 && t.rate_per_km.is_finite())
            {
                return Err(Error::validation(format!(
                    "catalog: {} costs must be non-negative",
                    t.code
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, code: &str) -> Option<&ProblemType> {
        let key = normalize_code(code);
        self.types.iter().find(|t| normalize_code(&t.code) == key)
    }

    fn require(&self, code: &str) -> Result<&ProblemType> {
        self.get(code)
            .ok_or_else(|| Error::validation(format!("unknown problem code {code:?}")))
    }

    pub fn blocks_traffic(&self, code: &str) -> bool {
        self.get(code).is_some_and(|t| t.blocks_traffic)
    }
}

impl Default for Catalog {
    fn default() -> Self {
        let row = |code: &str, blocks_traffic, base_cost, rate_per_km| ProblemType {
            code: code.to_owned(),
            blocks_traffic,
            base_cost,
            rate_per_km,
        };
        Catalog {
            types: vec![
                row("Landslide", true, 2000.0, 12.0),
                row("ClosedRoad", true, 800.0, 10.0),
                row("RockCollapse", true, 2500.0, 12.0),
                row("DitchBlocking", false, 400.0, 8.0),
                row("Erosion", false, 1200.0, 8.0),
                row("Other", false, 300.0, 8.0),
            ],
        }
    }
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemReport {
    pub id: ReportId,
    pub report_code: String,
    pub report_comments: String,
    #[serde(rename = "ogr_fid")]
    pub segment_ref: SegmentId,
    #[serde(default)]
    pub location: Option<GeoPoint>,
    pub creation_date: DateTime<Utc>,
    pub last_update_date: DateTime<Utc>,
    pub report_status: ReportStatus,
    pub reporter: UserId,
    #[serde(default)]
    pub assignee: Option<UserId>,
}

impl ProblemReport {
    pub fn validate(&self) -> Result<()> {
        if self.last_update_date < self.creation_date {
            return Err(Error::validation(format!(
                "report {}: last_update_date precedes creation_date",
                self.id
            )));
        }
        if self.report_status == ReportStatus::Assigned && self.assignee.is_none() {
            return Err(Error::validation(format!("report {}: assigned without assignee", self.id)));
        }
        Ok(())
    }

    fn touched(&self, clock: &dyn Clock) -> DateTime<Utc> {
        clock.now().max(self.last_update_date)
    }
}

/// Cost estimate for one report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub report_id: ReportId,
    pub report_code: String,
    pub base_cost: f64,
    pub rate_per_km: f64,
    /// Network distance from the depot; `None` when the segment cannot be
    /// reached, in which case `cost` holds the base cost only.
    pub distance_km: Option<f64>,
    pub cost: f64,
}

impl CostEstimate {
    pub fn distance_available(&self) -> bool {
        self.distance_km.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairAssignment {
    pub id: AssignmentId,
    pub report_ids: Vec<ReportId>,
    pub assignee: UserId,
    pub estimated_cost: f64,
    pub depot: JunctionId,
    pub estimates: Vec<CostEstimate>,
    pub created: DateTime<Utc>,
}

/// `base_cost + rate_per_km * distance_km`, with distance the shortest
/// network distance from `depot` to the nearer end of the report's segment.
pub fn estimate_repair_cost(
    report: &ProblemReport,
    catalog: &Catalog,
    depot: JunctionId,
    graph: &NetworkGraph,
) -> Result<CostEstimate> {
    let ty = catalog.require(&report.report_code)?;
    if !graph.topology().contains_junction(depot) {
        return Err(Error::not_found("junction", depot));
    }
    let ends = [End::Start, End::End].map(|e| graph.endpoint_of(report.segment_ref, e));
    if ends.iter().any(Option::is_none) {
        return Err(Error::not_found("segment", report.segment_ref));
    }
    let profile = VehicleProfile::default();
    let mut nearest: Option<f64> = None;
    for junction in ends.into_iter().flatten() {
        let plan = shortest_path(graph, depot, junction, &BTreeSet::new(), &profile)?;
        if plan.feasible {
            nearest = Some(nearest.map_or(plan.distance_m, |d| d.min(plan.distance_m)));
        }
    }
    let distance_km = nearest.map(|m| m / 1000.0);
    Ok(CostEstimate {
        report_id: report.id,
        report_code: ty.code.clone(),
        base_cost: ty.base_cost,
        rate_per_km: ty.rate_per_km,
        distance_km,
        cost: ty.base_cost + ty.rate_per_km * distance_km.unwrap_or(0.0),
    })
}

/// Segments with at least one unresolved report of a traffic-blocking type.
pub fn blocked_segments<'a>(
    reports: impl IntoIterator<Item = &'a ProblemReport>,
    catalog: &Catalog,
) -> BTreeSet<SegmentId> {
    reports
        .into_iter()
        .filter(|r| r.report_status != ReportStatus::Resolved && catalog.blocks_traffic(&r.report_code))
        .map(|r| r.segment_ref)
        .collect()
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewReport {
    pub report_code: String,
    #[serde(default)]
    pub report_comments: String,
    #[serde(rename = "ogr_fid")]
    pub segment_ref: SegmentId,
    #[serde(default)]
    pub location: Option<GeoPoint>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportPatch {
    #[serde(default)]
    pub report_code: Option<String>,
    #[serde(default)]
    pub report_comments: Option<String>,
    #[serde(default)]
    pub location: Option<GeoPoint>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportFilter {
    #[serde(default)]
    pub status: Option<ReportStatus>,
    #[serde(default)]
    pub code: Option<String>,
    #[serde(default, rename = "ogr_fid")]
    pub segment_ref: Option<SegmentId>,
}

impl ReportFilter {
    pub fn matches(&self, r: &ProblemReport) -> bool {
        self.status.is_none_or(|s| r.report_status == s)
            && self
                .code
                .as_deref()
                .is_none_or(|c| normalize_code(c) == normalize_code(&r.report_code))
            && self.segment_ref.is_none_or(|s| r.segment_ref == s)
    }
}

/// Result of a bulk assignment: the new assignment and the reports it moves.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentOutcome {
    pub assignment: RepairAssignment,
    pub reports: Vec<ProblemReport>,
}

/// All reports and repair assignments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportBook {
    pub reports: BTreeMap<ReportId, ProblemReport>,
    pub assignments: BTreeMap<AssignmentId, RepairAssignment>,
}

impl ReportBook {
    pub fn get(&self, id: ReportId) -> Result<&ProblemReport> {
        self.reports.get(&id).ok_or_else(|| Error::not_found("report", id))
    }

    fn next_report_id(&self) -> ReportId {
        ReportId(self.reports.keys().next_back().map_or(1, |id| id.0 + 1))
    }

    fn next_assignment_id(&self) -> AssignmentId {
        AssignmentId(self.assignments.keys().next_back().map_or(1, |id| id.0 + 1))
    }

    /// A new Active report stamped with the clock's current time.
    pub fn create_report(
        &self,
        new: NewReport,
        reporter: UserId,
        catalog: &Catalog,
        segments: &BTreeMap<SegmentId, RoadSegment>,
        clock: &dyn Clock,
    ) -> Result<ProblemReport> {
        if !segments.contains_key(&new.segment_ref) {
            return Err(Error::not_found("segment", new.segment_ref));
        }
        let ty = catalog.require(&new.report_code)?;
        let now = clock.now();
        Ok(ProblemReport {
            id: self.next_report_id(),
            report_code: ty.code.clone(),
            report_comments: new.report_comments,
            segment_ref: new.segment_ref,
            location: new.location,
            creation_date: now,
            last_update_date: now,
            report_status: ReportStatus::Active,
            reporter,
            assignee: None,
        })
    }

    /// Sorted newest first, then by id.
    pub fn list_reports(&self, filter: &ReportFilter) -> Vec<&ProblemReport> {
        let mut out: Vec<&ProblemReport> = self.reports.values().filter(|r| filter.matches(r)).collect();
        out.sort_by(|a, b| b.creation_date.cmp(&a.creation_date).then(a.id.cmp(&b.id)));
        out
    }

    pub fn update_report(
        &self,
        id: ReportId,
        patch: &ReportPatch,
        catalog: &Catalog,
        clock: &dyn Clock,
    ) -> Result<ProblemReport> {
        let current = self.get(id)?;
        if current.report_status == ReportStatus::Resolved {
            return Err(Error::State(format!("report {id} is resolved")));
        }
        let mut next = current.clone();
        if let Some(code) = &patch.report_code {
            next.report_code = catalog.require(code)?.code.clone();
        }
        if let Some(comments) = &patch.report_comments {
            next.report_comments = comments.clone();
        }
        if let Some(location) = patch.location {
            next.location = Some(location);
        }
        next.last_update_date = current.touched(clock);
        Ok(next)
    }

    /// Moves every listed report from Active to Assigned under one
    /// assignment. Rejected as a whole if any report is missing or not Active.
    pub fn assign_repairs(
        &self,
        ids: &[ReportId],
        assignee: UserId,
        catalog: &Catalog,
        depot: JunctionId,
        graph: &NetworkGraph,
        clock: &dyn Clock,
    ) -> Result<AssignmentOutcome> {
        let ids: BTreeSet<ReportId> = ids.iter().copied().collect();
        if ids.is_empty() {
            return Err(Error::validation("no reports to assign"));
        }
        let mut reports = Vec::with_capacity(ids.len());
        let mut estimates = Vec::with_capacity(ids.len());
        for &id in &ids {
            let report = self.get(id)?;
            if !report.report_status.can_transition_to(ReportStatus::Assigned) {
                return Err(Error::State(format!(
                    "report {id} is {} and cannot be assigned",
                    report.report_status
                )));
            }
            estimates.push(estimate_repair_cost(report, catalog, depot, graph)?);
            reports.push(report);
        }
        let created = clock.now();
        let reports = reports
            .into_iter()
            .map(|r| ProblemReport {
                report_status: ReportStatus::Assigned,
                assignee: Some(assignee.clone()),
                last_update_date: created.max(r.last_update_date),
                ..r.clone()
            })
            .collect();
        Ok(AssignmentOutcome {
            assignment: RepairAssignment {
                id: self.next_assignment_id(),
                report_ids: ids.into_iter().collect(),
                assignee,
                estimated_cost: estimates.iter().map(|e| e.cost).sum(),
                depot,
                estimates,
                created,
            },
            reports,
        })
    }

    /// Marks reports resolved. Already resolved reports are skipped, so the
    /// returned list (the changed records) may be shorter than `ids`.
    pub fn resolve_reports(&self, ids: &[ReportId], clock: &dyn Clock) -> Result<Vec<ProblemReport>> {
        let ids: BTreeSet<ReportId> = ids.iter().copied().collect();
        for &id in &ids {
            self.get(id)?;
        }
        let now = clock.now();
        Ok(ids
            .iter()
            .map(|id| &self.reports[id])
            .filter(|r| r.report_status.can_transition_to(ReportStatus::Resolved))
            .map(|r| ProblemReport {
                report_status: ReportStatus::Resolved,
                last_update_date: now.max(r.last_update_date),
                ..r.clone()
            })
            .collect())
    }

    /// Hard delete. Reports referenced by an assignment cannot be deleted.
    pub fn check_delete(&self, id: ReportId) -> Result<()> {
        self.get(id)?;
        if let Some(a) = self.assignments.values().find(|a| a.report_ids.contains(&id)) {
            return Err(Error::State(format!("report {id} belongs to assignment {}", a.id)));
        }
        Ok(())
    }

    pub fn blocked_segments(&self, catalog: &Catalog) -> BTreeSet<SegmentId> {
        blocked_segments(self.reports.values(), catalog)
    }

    /// Number of unresolved reports per segment.
    pub fn open_report_counts(&self) -> BTreeMap<SegmentId, usize> {
        let mut counts = BTreeMap::new();
        for r in self.reports.values().filter(|r| r.report_status != ReportStatus::Resolved) {
            *counts.entry(r.segment_ref).or_insert(0) += 1;
        }
        counts
    }
}
