//! Road segments, GeoJSON ingest/export and junction snapping.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geo::{segment_length, GeoPoint, EARTH_RADIUS_M};
use crate::routing::Topology;

pub const DEFAULT_SNAP_TOLERANCE_M: f64 = 1.0;

/// Multiplier used to derive part ids for MultiLineString features:
/// part `i` of feature `id` becomes segment `id * MULTI_PART_FACTOR + i`.
pub const MULTI_PART_FACTOR: u64 = 100_000;

pub const DEFAULT_ROAD_TYPE: &str = "Unclassified";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SegmentId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JunctionId(pub u64);

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for JunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Which end of a segment's geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Start,
    End,
}

/// One forest-road edge with its geometry and inventory attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadSegment {
    pub id: SegmentId,
    pub geometry: Vec<GeoPoint>,
    pub road_type: String,
    /// Meters. Zero means "not recorded"; edits must supply a positive width.
    pub road_width: f64,
    /// Percent.
    pub slope: f64,
    /// Percent.
    pub transverse_slope: f64,
    pub ditch: bool,
    pub ditch_type: String,
    /// Unitless as recorded in the source inventory.
    pub aspect: f64,
    pub slope_height: f64,
    pub creation_date: Option<NaiveDate>,
    pub soil_category: String,
    pub soil_profile: String,
    pub technical_works: bool,
    pub type_of_technical_work: String,
    pub length_m: f64,
}

impl RoadSegment {
    /// A segment with default attributes and the length derived from `geometry`.
    pub fn new(id: SegmentId, geometry: Vec<GeoPoint>) -> Result<Self> {
        let length_m = segment_length(&geometry)?;
        let seg = Self {
            id,
            geometry,
            road_type: DEFAULT_ROAD_TYPE.to_owned(),
            road_width: 0.0,
            slope: 0.0,
            transverse_slope: 0.0,
            ditch: false,
            ditch_type: String::new(),
            aspect: 0.0,
            slope_height: 0.0,
            creation_date: None,
            soil_category: String::new(),
            soil_profile: String::new(),
            technical_works: false,
            type_of_technical_work: String::new(),
            length_m,
        };
        seg.validate()?;
        Ok(seg)
    }

    pub fn start(&self) -> GeoPoint {
        self.geometry[0]
    }

    pub fn end(&self) -> GeoPoint {
        self.geometry[self.geometry.len() - 1]
    }

    pub fn endpoint(&self, end: End) -> GeoPoint {
        match end {
            End::Start => self.start(),
            End::End => self.end(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let id = self.id;
        let computed = segment_length(&self.geometry)
            .map_err(|e| Error::validation(format!("segment {id}: {e}")))?;
        if computed.is_nan() || computed <= 0.0 {
            return Err(Error::validation(format!("segment {id} has zero length")));
        }
        if (self.length_m - computed).abs() > 1e-6 * computed {
            return Err(Error::validation(format!(
                "segment {id}: length_m {} does not match geometry length {computed}",
                self.length_m
            )));
        }
        for (name, value) in [
            ("road_width", self.road_width),
            ("slope", self.slope),
            ("transverse_slope", self.transverse_slope),
            ("aspect", self.aspect),
            ("slope_height", self.slope_height),
        ] {
            if !value.is_finite() {
                return Err(Error::validation(format!("segment {id}: {name} is not finite")));
            }
        }
        if self.road_width < 0.0 {
            return Err(Error::validation(format!("segment {id}: road_width must be positive")));
        }
        if self.slope_height < 0.0 {
            return Err(Error::validation(format!(
                "segment {id}: slope_height must be non-negative"
            )));
        }
        Ok(())
    }

    /// Returns a copy with `patch` applied. A geometry change recomputes
    /// `length_m`; the graph must be rebuilt before routing sees it.
    pub fn apply_patch(&self, patch: &SegmentPatch) -> Result<RoadSegment> {
        let mut seg = self.clone();
        if let Some(width) = patch.road_width {
            if width.is_nan() || width <= 0.0 {
                return Err(Error::validation("road_width must be positive"));
            }
            seg.road_width = width;
        }
        if let Some(geometry) = &patch.geometry {
            seg.length_m = segment_length(geometry)?;
            seg.geometry = geometry.clone();
        }
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &patch.$field { seg.$field = v.clone(); })*
            };
        }
        set!(
            road_type,
            slope,
            transverse_slope,
            ditch,
            ditch_type,
            aspect,
            slope_height,
            soil_category,
            soil_profile,
            technical_works,
            type_of_technical_work
        );
        if let Some(date) = patch.creation_date {
            seg.creation_date = Some(date);
        }
        seg.validate()?;
        Ok(seg)
    }
}

/// Partial update of a segment's editable fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentPatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Vec<GeoPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub road_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub road_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transverse_slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ditch: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ditch_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub creation_date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soil_category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soil_profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub technical_works: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_of_technical_work: Option<String>,
}

impl SegmentPatch {
    pub fn is_empty(&self) -> bool {
        *self == SegmentPatch::default()
    }
}

/// Applies `patch` to the segment `id` held in `segments`.
pub fn update_segment(
    segments: &BTreeMap<SegmentId, RoadSegment>,
    id: SegmentId,
    patch: &SegmentPatch,
) -> Result<RoadSegment> {
    segments
        .get(&id)
        .ok_or_else(|| Error::not_found("segment", id))?
        .apply_patch(patch)
}

// ---------------------------------------------------------------------------
// GeoJSON
// ---------------------------------------------------------------------------

/// Parses a GeoJSON FeatureCollection of LineString/MultiLineString road
/// features into segments, in document order.
pub fn load_geojson(bytes: &[u8]) -> Result<Vec<RoadSegment>> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        index: None,
        message: e.to_string(),
    })?;
    let doc_err = |message: &str| Error::Parse {
        index: None,
        message: message.to_owned(),
    };
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(doc_err("document is not a FeatureCollection"));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| doc_err("FeatureCollection has no features array"))?;

    let mut segments = Vec::new();
    let mut seen = BTreeSet::new();
    for (index, feature) in features.iter().enumerate() {
        for seg in parse_feature(index, feature)? {
            if !seen.insert(seg.id) {
                return Err(Error::validation(format!(
                    "feature {index}: duplicate segment id {}",
                    seg.id
                )));
            }
            segments.push(seg);
        }
    }
    Ok(segments)
}

fn parse_feature(index: usize, feature: &Value) -> Result<Vec<RoadSegment>> {
    let err = |message: String| Error::Parse {
        index: Some(index),
        message,
    };
    if feature.get("type").and_then(Value::as_str) != Some("Feature") {
        return Err(err("not a Feature".into()));
    }
    let empty = Map::new();
    let props = match feature.get("properties") {
        Some(Value::Object(m)) => m,
        None | Some(Value::Null) => &empty,
        Some(_) => return Err(err("properties is not an object".into())),
    };
    let id = ["id", "ogr_fid"]
        .iter()
        .find_map(|k| props.get(*k))
        .or_else(|| feature.get("id"))
        .and_then(as_u64)
        .ok_or_else(|| err("missing numeric id property".into()))?;

    let geometry = feature
        .get("geometry")
        .filter(|g| !g.is_null())
        .ok_or_else(|| err("missing geometry".into()))?;
    let coords = geometry
        .get("coordinates")
        .ok_or_else(|| err("geometry has no coordinates".into()))?;
    let parts: Vec<(SegmentId, &Value)> = match geometry.get("type").and_then(Value::as_str) {
        Some("LineString") => vec![(SegmentId(id), coords)],
        Some("MultiLineString") => {
            let lines = coords
                .as_array()
                .ok_or_else(|| err("MultiLineString coordinates must be an array".into()))?;
            let mut parts = Vec::with_capacity(lines.len());
            for (i, line) in lines.iter().enumerate() {
                let derived = id
                    .checked_mul(MULTI_PART_FACTOR)
                    .and_then(|v| v.checked_add(i as u64))
                    .filter(|_| (i as u64) < MULTI_PART_FACTOR)
                    .ok_or_else(|| err(format!("cannot derive id for part {i} of {id}")))?;
                parts.push((SegmentId(derived), line));
            }
            parts
        }
        Some(other) => return Err(err(format!("unsupported geometry type {other}"))),
        None => return Err(err("geometry has no type".into())),
    };

    parts
        .into_iter()
        .map(|(sid, line)| {
            let points = parse_line(line).map_err(err)?;
            if points.len() < 2 {
                return Err(Error::validation(format!(
                    "feature {index}: segment {sid} geometry needs at least 2 points"
                )));
            }
            let mut seg = RoadSegment::new(sid, points)
                .map_err(|e| Error::validation(format!("feature {index}: {e}")))?;
            apply_properties(&mut seg, props).map_err(err)?;
            seg.validate()
                .map_err(|e| Error::validation(format!("feature {index}: {e}")))?;
            Ok(seg)
        })
        .collect()
}

fn parse_line(line: &Value) -> std::result::Result<Vec<GeoPoint>, String> {
    let arr = line.as_array().ok_or("LineString coordinates must be an array")?;
    arr.iter()
        .map(|pos| {
            let pos = pos.as_array().ok_or("position must be an array")?;
            match (pos.first().and_then(Value::as_f64), pos.get(1).and_then(Value::as_f64)) {
                (Some(lon), Some(lat)) => GeoPoint::new(lon, lat).map_err(|e| e.to_string()),
                _ => Err("position must hold two numbers".to_owned()),
            }
        })
        .collect()
}

fn as_u64(v: &Value) -> Option<u64> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .or_else(|| n.as_f64().filter(|f| f.fract() == 0.0 && *f >= 0.0).map(|f| f as u64)),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn read_f64(props: &Map<String, Value>, key: &str) -> std::result::Result<Option<f64>, String> {
    match props.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => Ok(n.as_f64()),
        Some(Value::String(s)) if s.trim().is_empty() => Ok(None),
        Some(Value::String(s)) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{key}: {s:?} is not a number")),
        Some(other) => Err(format!("{key}: expected a number, got {other}")),
    }
}

fn read_bool(props: &Map<String, Value>, key: &str) -> std::result::Result<Option<bool>, String> {
    match props.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Bool(b)) => Ok(Some(*b)),
        Some(Value::Number(n)) => Ok(Some(n.as_f64() != Some(0.0))),
        Some(Value::String(s)) => match s.trim().to_ascii_lowercase().as_str() {
            "" => Ok(None),
            "true" | "yes" | "1" => Ok(Some(true)),
            "false" | "no" | "0" => Ok(Some(false)),
            _ => Err(format!("{key}: {s:?} is not a boolean")),
        },
        Some(other) => Err(format!("{key}: expected a boolean, got {other}")),
    }
}

fn read_text(props: &Map<String, Value>, key: &str) -> Option<String> {
    match props.get(key)? {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        other => Some(other.to_string()),
    }
}

fn read_date(props: &Map<String, Value>, key: &str) -> std::result::Result<Option<NaiveDate>, String> {
    let Some(text) = read_text(props, key).filter(|s| !s.trim().is_empty()) else {
        return Ok(None);
    };
    let text = text.trim();
    // Accept a bare date or the date part of an ISO-8601 timestamp.
    let date_part = text.split(['T', ' ']).next().unwrap_or(text);
    NaiveDate::parse_from_str(date_part, "%Y-%m-%d")
        .map(Some)
        .map_err(|_| format!("{key}: {text:?} is not an ISO-8601 date"))
}

fn apply_properties(seg: &mut RoadSegment, props: &Map<String, Value>) -> std::result::Result<(), String> {
    if let Some(v) = read_text(props, "road_type").filter(|s| !s.is_empty()) {
        seg.road_type = v;
    }
    for (key, slot) in [
        ("road_width", &mut seg.road_width),
        ("slope", &mut seg.slope),
        ("transverse_slope", &mut seg.transverse_slope),
        ("aspect", &mut seg.aspect),
        ("slope_height", &mut seg.slope_height),
    ] {
        if let Some(v) = read_f64(props, key)? {
            *slot = v;
        }
    }
    for (key, slot) in [("ditch", &mut seg.ditch), ("technical_works", &mut seg.technical_works)] {
        if let Some(v) = read_bool(props, key)? {
            *slot = v;
        }
    }
    for (key, slot) in [
        ("ditch_type", &mut seg.ditch_type),
        ("soil_category", &mut seg.soil_category),
        ("soil_profile", &mut seg.soil_profile),
        ("type_of_technical_work", &mut seg.type_of_technical_work),
    ] {
        if let Some(v) = read_text(props, key) {
            *slot = v;
        }
    }
    seg.creation_date = read_date(props, "creation_date")?;
    Ok(())
}

/// The inventory attributes of a segment as GeoJSON properties.
pub fn segment_properties(seg: &RoadSegment) -> Map<String, Value> {
    let v = json!({
        "id": seg.id,
        "road_type": seg.road_type,
        "road_width": seg.road_width,
        "slope": seg.slope,
        "transverse_slope": seg.transverse_slope,
        "ditch": seg.ditch,
        "ditch_type": seg.ditch_type,
        "aspect": seg.aspect,
        "slope_height": seg.slope_height,
        "creation_date": seg.creation_date,
        "soil_category": seg.soil_category,
        "soil_profile": seg.soil_profile,
        "technical_works": seg.technical_works,
        "type_of_technical_work": seg.type_of_technical_work,
        "length_m": seg.length_m,
    });
    match v {
        Value::Object(m) => m,
        _ => unreachable!(),
    }
}

pub fn linestring(geometry: &[GeoPoint]) -> Value {
    json!({ "type": "LineString", "coordinates": geometry })
}

/// Writes segments as a FeatureCollection of LineString features, one per
/// segment, readable by [`load_geojson`].
pub fn export_geojson<'a>(segments: impl IntoIterator<Item = &'a RoadSegment>) -> Value {
    let features: Vec<Value> = segments
        .into_iter()
        .map(|seg| {
            json!({
                "type": "Feature",
                "id": seg.id,
                "geometry": linestring(&seg.geometry),
                "properties": segment_properties(seg),
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Junction {
    pub id: JunctionId,
    pub position: GeoPoint,
    /// Incident segment ends, sorted.
    pub incident: Vec<(SegmentId, End)>,
}

/// Junctions and segments joined by snapped endpoints. Immutable once built.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    junctions: BTreeMap<JunctionId, Junction>,
    segments: BTreeMap<SegmentId, RoadSegment>,
    endpoint_of: HashMap<(SegmentId, End), JunctionId>,
    snap_tolerance: f64,
    topology: Topology,
}

impl NetworkGraph {
    pub fn junctions(&self) -> &BTreeMap<JunctionId, Junction> {
        &self.junctions
    }

    pub fn junction(&self, id: JunctionId) -> Option<&Junction> {
        self.junctions.get(&id)
    }

    pub fn segments(&self) -> &BTreeMap<SegmentId, RoadSegment> {
        &self.segments
    }

    pub fn segment(&self, id: SegmentId) -> Option<&RoadSegment> {
        self.segments.get(&id)
    }

    pub fn endpoint_of(&self, segment: SegmentId, end: End) -> Option<JunctionId> {
        self.endpoint_of.get(&(segment, end)).copied()
    }

    pub fn snap_tolerance(&self) -> f64 {
        self.snap_tolerance
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn total_length_m(&self) -> f64 {
        self.segments.values().map(|s| s.length_m).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Junction partition as sets of segment ends, independent of junction ids.
    pub fn partition(&self) -> BTreeSet<BTreeSet<(SegmentId, End)>> {
        self.junctions
            .values()
            .map(|j| j.incident.iter().copied().collect())
            .collect()
    }
}

/// Builds the routable graph. Endpoints closer than `snap_tolerance` meters
/// (transitively) become one junction located at their centroid. Junction
/// ids start at 1 and follow the lowest `(segment id, end)` in each junction.
pub fn build_graph(
    segments: impl IntoIterator<Item = RoadSegment>,
    snap_tolerance: f64,
) -> Result<NetworkGraph> {
    if !snap_tolerance.is_finite() || snap_tolerance < 0.0 {
        return Err(Error::validation(format!(
            "snap tolerance must be a non-negative number, got {snap_tolerance}"
        )));
    }
    let mut by_id = BTreeMap::new();
    for seg in segments {
        let id = seg.id;
        if by_id.insert(id, seg).is_some() {
            return Err(Error::validation(format!("duplicate segment id {id}")));
        }
    }

    // Endpoint k belongs to segment k / 2; even k is the start.
    let ordered: Vec<&RoadSegment> = by_id.values().collect();
    let points: Vec<GeoPoint> = ordered
        .iter()
        .flat_map(|s| [s.start(), s.end()])
        .collect();
    let end_of = |k: usize| -> (SegmentId, End) {
        let marker = if k % 2 == 0 { End::Start } else { End::End };
        (ordered[k / 2].id, marker)
    };

    let mut sets = DisjointSets::new(points.len());
    let mut by_lat: Vec<usize> = (0..points.len()).collect();
    by_lat.sort_by(|&a, &b| points[a].lat().total_cmp(&points[b].lat()));
    // Latitude window: no pair further apart in latitude than this can snap.
    let window = (snap_tolerance / EARTH_RADIUS_M).to_degrees() * (1.0 + 1e-9) + 1e-12;
    for (pos, &a) in by_lat.iter().enumerate() {
        for &b in &by_lat[pos + 1..] {
            if points[b].lat() - points[a].lat() > window {
                break;
            }
            if points[a].haversine_m(&points[b]) <= snap_tolerance {
                sets.union(a, b);
            }
        }
    }

    // Endpoints are visited in (segment id, end) order, so the first time a
    // set is seen is also its lowest member.
    let mut junction_of_root: HashMap<usize, JunctionId> = HashMap::new();
    let mut members: BTreeMap<JunctionId, Vec<usize>> = BTreeMap::new();
    for k in 0..points.len() {
        let root = sets.find(k);
        let next = JunctionId(junction_of_root.len() as u64 + 1);
        let id = *junction_of_root.entry(root).or_insert(next);
        members.entry(id).or_default().push(k);
    }

    let mut junctions = BTreeMap::new();
    let mut endpoint_of = HashMap::new();
    for (id, ks) in members {
        let n = ks.len() as f64;
        let lon = ks.iter().map(|&k| points[k].lon()).sum::<f64>() / n;
        let lat = ks.iter().map(|&k| points[k].lat()).sum::<f64>() / n;
        let position = GeoPoint::new(lon, lat)?;
        let incident: Vec<(SegmentId, End)> = ks.iter().map(|&k| end_of(k)).collect();
        for &end in &incident {
            endpoint_of.insert(end, id);
        }
        junctions.insert(
            id,
            Junction {
                id,
                position,
                incident,
            },
        );
    }

    let topology = Topology::with_junctions(
        junctions.keys().copied(),
        by_id.values().map(|s| {
            (
                s.id,
                endpoint_of[&(s.id, End::Start)],
                endpoint_of[&(s.id, End::End)],
                s.length_m,
            )
        }),
    )?;

    Ok(NetworkGraph {
        junctions,
        segments: by_id,
        endpoint_of,
        snap_tolerance,
        topology,
    })
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
