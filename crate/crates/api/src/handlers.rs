use std::collections::{BTreeMap, BTreeSet};

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::IntoResponse;
use axum::Json;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use frmp_core::network::{linestring, segment_properties, update_segment};
use frmp_core::{
    alternative_routes, compare_scenarios, estimate_repair_cost, shortest_path, simulate_naive_drive, Catalog,
    CostEstimate, JunctionId, Mutation, NewReport, ProblemReport, RepairAssignment, ReportFilter, ReportId,
    ReportPatch, ReportStatus, RoadSegment, ScenarioComparison, SegmentId, SegmentPatch, StoreSnapshot, UserId,
};

use crate::error::ApiError;
use crate::state::{Access, AppState, Caller};

type ApiResult<T> = Result<T, ApiError>;
type Body<T> = Result<Json<T>, JsonRejection>;

const DEFAULT_LIMIT: usize = 100;

#[derive(Debug, Default, Deserialize)]
pub struct Page {
    limit: Option<usize>,
    offset: Option<usize>,
}

impl Page {
    fn apply<T>(&self, items: impl Iterator<Item = T>) -> Vec<T> {
        items
            .skip(self.offset.unwrap_or(0))
            .take(self.limit.unwrap_or(DEFAULT_LIMIT))
            .collect()
    }
}

fn status_label(blocked: &BTreeSet<SegmentId>, id: SegmentId) -> &'static str {
    if blocked.contains(&id) {
        "blocked"
    } else {
        "open"
    }
}

fn segment_view(seg: &RoadSegment, blocked: &BTreeSet<SegmentId>, open_reports: &BTreeMap<SegmentId, usize>) -> Value {
    let mut props = segment_properties(seg);
    props.insert("status".into(), status_label(blocked, seg.id).into());
    props.insert("active_report_count".into(), open_reports.get(&seg.id).copied().unwrap_or(0).into());
    props.insert("geometry".into(), linestring(&seg.geometry));
    Value::Object(props)
}

fn report_id(path: Result<Path<u64>, PathRejection>) -> ApiResult<ReportId> {
    Ok(ReportId(path?.0))
}

pub async fn health(State(state): State<AppState>) -> Json<Value> {
    Json(json!({ "status": "ok", "revision": state.store().revision() }))
}

// Segments -------------------------------------------------------------------

pub async fn list_segments(
    State(state): State<AppState>,
    headers: HeaderMap,
    query: Result<Query<Page>, QueryRejection>,
) -> ApiResult<Json<Vec<Value>>> {
    state.authorize(&headers, Access::Read)?;
    let page = query?.0;
    let snap = state.store().snapshot();
    let blocked = snap.book.blocked_segments(&snap.catalog);
    let counts = snap.book.open_report_counts();
    Ok(Json(page.apply(snap.segments.values().map(|s| segment_view(s, &blocked, &counts)))))
}

pub async fn get_segment(
    State(state): State<AppState>,
    headers: HeaderMap,
    path: Result<Path<u64>, PathRejection>,
) -> ApiResult<Json<Value>> {
    state.authorize(&headers, Access::Read)?;
    let id = SegmentId(path?.0);
    let snap = state.store().snapshot();
    let seg = snap.segments.get(&id).ok_or_else(|| frmp_core::Error::NotFound {
        kind: "segment",
        id: id.to_string(),
    })?;
    Ok(Json(segment_view(seg, &snap.book.blocked_segments(&snap.catalog), &snap.book.open_report_counts())))
}

pub async fn put_segment(
    State(state): State<AppState>,
    headers: HeaderMap,
    path: Result<Path<u64>, PathRejection>,
    body: Body<SegmentPatch>,
) -> ApiResult<Json<Value>> {
    state.authorize(&headers, Access::Edit)?;
    let id = SegmentId(path?.0);
    let patch = body?.0;
    let (seg, _) = state.store().transact(|snap| {
        let updated = update_segment(&snap.segments, id, &patch)?;
        let batch = if updated == snap.segments[&id] {
            Vec::new()
        } else {
            vec![Mutation::PutSegment(updated.clone())]
        };
        Ok::<_, ApiError>((updated, batch))
    })?;
    let snap = state.store().snapshot();
    Ok(Json(segment_view(&seg, &snap.book.blocked_segments(&snap.catalog), &snap.book.open_report_counts())))
}

pub async fn list_junctions(State(state): State<AppState>, headers: HeaderMap) -> ApiResult<Json<Value>> {
    state.authorize(&headers, Access::Read)?;
    let snap = state.store().snapshot();
    let graph = state.graph(&snap)?;
    Ok(Json(serde_json::to_value(graph.junctions().values().collect::<Vec<_>>()).expect("junctions serialize")))
}

pub async fn map_geojson(State(state): State<AppState>, headers: HeaderMap) -> ApiResult<impl IntoResponse> {
    state.authorize(&headers, Access::Read)?;
    let snap = state.store().snapshot();
    Ok((
        [("content-type", "application/geo+json")],
        Json(map_features(&snap)),
    ))
}

/// Every segment styled by its current status, all from one snapshot.
pub fn map_features(snap: &StoreSnapshot) -> Value {
    let blocked = snap.book.blocked_segments(&snap.catalog);
    let counts = snap.book.open_report_counts();
    let features: Vec<Value> = snap
        .segments
        .values()
        .map(|s| {
            let mut props = Map::new();
            props.insert("id".into(), s.id.0.into());
            props.insert("status".into(), status_label(&blocked, s.id).into());
            props.insert("active_report_count".into(), counts.get(&s.id).copied().unwrap_or(0).into());
            props.insert("road_type".into(), s.road_type.clone().into());
            props.insert("length_m".into(), s.length_m.into());
            json!({ "type": "Feature", "id": s.id, "geometry": linestring(&s.geometry), "properties": props })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

// Reports --------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
pub struct ReportQuery {
    status: Option<ReportStatus>,
    code: Option<String>,
    ogr_fid: Option<u64>,
    limit: Option<usize>,
    offset: Option<usize>,
}

pub async fn list_reports(
    State(state): State<AppState>,
    headers: HeaderMap,
    query: Result<Query<ReportQuery>, QueryRejection>,
) -> ApiResult<Json<Vec<ProblemReport>>> {
    state.authorize(&headers, Access::Read)?;
    let q = query?.0;
    let filter = ReportFilter {
        status: q.status,
        code: q.code,
        segment_ref: q.ogr_fid.map(SegmentId),
    };
    let page = Page {
        limit: q.limit,
        offset: q.offset,
    };
    let snap = state.store().snapshot();
    Ok(Json(page.apply(snap.book.list_reports(&filter).into_iter().cloned())))
}

pub async fn get_report(
    State(state): State<AppState>,
    headers: HeaderMap,
    path: Result<Path<u64>, PathRejection>,
) -> ApiResult<Json<ProblemReport>> {
    state.authorize(&headers, Access::Read)?;
    let id = report_id(path)?;
    Ok(Json(state.store().snapshot().book.get(id)?.clone()))
}

fn caller_id(caller: &Caller) -> UserId {
    match caller {
        Caller::User { id, .. } => id.clone(),
        Caller::Anonymous => UserId::new("anonymous"),
    }
}

pub async fn create_report(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Body<NewReport>,
) -> ApiResult<(StatusCode, Json<ProblemReport>)> {
    let caller = state.authorize(&headers, Access::Edit)?;
    let new = body?.0;
    let (report, _) = state.store().transact(|snap| {
        let r = snap
            .book
            .create_report(new, caller_id(&caller), &snap.catalog, &snap.segments, state.clock())?;
        Ok::<_, ApiError>((r.clone(), vec![Mutation::PutReport(r)]))
    })?;
    Ok((StatusCode::CREATED, Json(report)))
}

pub async fn patch_report(
    State(state): State<AppState>,
    headers: HeaderMap,
    path: Result<Path<u64>, PathRejection>,
    body: Body<ReportPatch>,
) -> ApiResult<Json<ProblemReport>> {
    state.authorize(&headers, Access::Edit)?;
    let id = report_id(path)?;
    let patch = body?.0;
    let (report, _) = state.store().transact(|snap| {
        let r = snap.book.update_report(id, &patch, &snap.catalog, state.clock())?;
        Ok::<_, ApiError>((r.clone(), vec![Mutation::PutReport(r)]))
    })?;
    Ok(Json(report))
}

pub async fn delete_report(
    State(state): State<AppState>,
    headers: HeaderMap,
    path: Result<Path<u64>, PathRejection>,
) -> ApiResult<StatusCode> {
    state.authorize(&headers, Access::Manage)?;
    let id = report_id(path)?;
    state.store().transact(|snap| {
        snap.book.check_delete(id)?;
        Ok::<_, ApiError>(((), vec![Mutation::DeleteReport(id)]))
    })?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolveRequest {
    ids: Vec<ReportId>,
}

#[derive(Debug, Serialize)]
pub struct ResolveResponse {
    resolved: usize,
    reports: Vec<ProblemReport>,
}

pub async fn resolve_reports(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Body<ResolveRequest>,
) -> ApiResult<Json<ResolveResponse>> {
    state.authorize(&headers, Access::Manage)?;
    let ids = body?.0.ids;
    let (reports, _) = state.store().transact(|snap| {
        let changed = snap.book.resolve_reports(&ids, state.clock())?;
        let batch = changed.iter().cloned().map(Mutation::PutReport).collect();
        Ok::<_, ApiError>((changed, batch))
    })?;
    Ok(Json(ResolveResponse {
        resolved: reports.len(),
        reports,
    }))
}

// Assignments ----------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignRequest {
    report_ids: Vec<ReportId>,
    /// Crew or user the work goes to; defaults to the caller.
    #[serde(default)]
    assignee: Option<UserId>,
    #[serde(default)]
    depot: Option<JunctionId>,
}

#[derive(Debug, Serialize)]
pub struct AssignResponse {
    assignment: RepairAssignment,
    reports: Vec<ProblemReport>,
}

pub async fn list_assignments(
    State(state): State<AppState>,
    headers: HeaderMap,
) -> ApiResult<Json<Vec<RepairAssignment>>> {
    state.authorize(&headers, Access::Read)?;
    Ok(Json(state.store().snapshot().book.assignments.values().cloned().collect()))
}

pub async fn create_assignment(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Body<AssignRequest>,
) -> ApiResult<(StatusCode, Json<AssignResponse>)> {
    let caller = state.authorize(&headers, Access::Manage)?;
    let req = body?.0;
    let assignee = req.assignee.unwrap_or_else(|| caller_id(&caller));
    if assignee.0.trim().is_empty() {
        return Err(ApiError::validation("assignee must not be empty"));
    }
    let depot = req.depot.unwrap_or(state.depot());
    let (outcome, _) = state.store().transact(|snap| {
        let graph = state.graph(snap)?;
        let outcome = snap
            .book
            .assign_repairs(&req.report_ids, assignee, &snap.catalog, depot, &graph, state.clock())?;
        let mut batch: Vec<Mutation> = outcome.reports.iter().cloned().map(Mutation::PutReport).collect();
        batch.push(Mutation::PutAssignment(outcome.assignment.clone()));
        Ok::<_, ApiError>((outcome, batch))
    })?;
    Ok((
        StatusCode::CREATED,
        Json(AssignResponse {
            assignment: outcome.assignment,
            reports: outcome.reports,
        }),
    ))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateRequest {
    report_ids: Vec<ReportId>,
    #[serde(default)]
    depot: Option<JunctionId>,
}

#[derive(Debug, Serialize)]
pub struct EstimateResponse {
    depot: JunctionId,
    total_cost: f64,
    estimates: Vec<CostEstimate>,
}

pub async fn estimate_assignment(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Body<EstimateRequest>,
) -> ApiResult<Json<EstimateResponse>> {
    state.authorize(&headers, Access::Manage)?;
    let req = body?.0;
    let depot = req.depot.unwrap_or(state.depot());
    let snap = state.store().snapshot();
    let graph = state.graph(&snap)?;
    let estimates = req
        .report_ids
        .iter()
        .map(|&id| estimate_repair_cost(snap.book.get(id)?, &snap.catalog, depot, &graph))
        .collect::<frmp_core::Result<Vec<_>>>()?;
    Ok(Json(EstimateResponse {
        depot,
        total_cost: estimates.iter().map(|e| e.cost).sum(),
        estimates,
    }))
}

pub async fn get_catalog(State(state): State<AppState>, headers: HeaderMap) -> ApiResult<Json<Catalog>> {
    state.authorize(&headers, Access::Read)?;
    Ok(Json(state.store().snapshot().catalog.clone()))
}

pub async fn list_profiles(State(state): State<AppState>, headers: HeaderMap) -> ApiResult<Json<Value>> {
    state.authorize(&headers, Access::Read)?;
    Ok(Json(serde_json::to_value(state.profiles()).expect("profiles serialize")))
}

// Routing --------------------------------------------------------------------

fn yes() -> bool {
    true
}

fn two() -> usize {
    2
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteRequest {
    pub origin: JunctionId,
    pub dest: JunctionId,
    #[serde(default)]
    pub profile: Option<String>,
    /// Avoid segments blocked by open reports.
    #[serde(default = "yes")]
    pub respect_blockages: bool,
    #[serde(default = "two")]
    pub k: usize,
    #[serde(default = "yes")]
    pub simulate_naive: bool,
    /// Extra segments to treat as blocked, for what-if questions.
    #[serde(default)]
    pub blocked: Vec<SegmentId>,
}

#[derive(Debug, Serialize)]
pub struct RouteResponse {
    profile: String,
    speed_kmh: f64,
    blocked: BTreeSet<SegmentId>,
    #[serde(flatten)]
    comparison: ScenarioComparison,
}

pub async fn plan_route(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Body<RouteRequest>,
) -> ApiResult<Json<RouteResponse>> {
    state.authorize(&headers, Access::Read)?;
    let req = body?.0;
    if req.k == 0 {
        return Err(ApiError::validation("k must be at least 1"));
    }
    let profile = state.profile(req.profile.as_deref())?.clone();
    let snap = state.store().snapshot();
    let graph = state.graph(&snap)?;

    let mut blocked: BTreeSet<SegmentId> = req.blocked.iter().copied().collect();
    if req.respect_blockages {
        blocked.extend(snap.book.blocked_segments(&snap.catalog));
    }
    let baseline = shortest_path(&*graph, req.origin, req.dest, &BTreeSet::new(), &profile)?;
    if !baseline.feasible {
        return Err(ApiError::unreachable(format!(
            "junction {} cannot be reached from {}",
            req.dest, req.origin
        )));
    }
    let naive = if req.simulate_naive {
        Some(simulate_naive_drive(&*graph, req.origin, req.dest, &blocked, &profile)?)
    } else {
        None
    };
    let alternatives = alternative_routes(&*graph, req.origin, req.dest, &blocked, req.k, &profile)?;
    let comparison = compare_scenarios(&baseline, naive.as_ref(), &alternatives)?;
    Ok(Json(RouteResponse {
        profile: profile.name,
        speed_kmh: profile.speed_kmh,
        blocked,
        comparison,
    }))
}
