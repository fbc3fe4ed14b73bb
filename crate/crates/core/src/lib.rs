//! Core model for a forest road management platform.
//!
//! The crate is split along the lines of the running system:
//!
//! * [`geo`] and [`network`] turn GeoJSON road geometry into a routable
//!   [`NetworkGraph`] of junctions and segments.
//! * [`routing`] computes shortest paths, k loopless alternatives, the
//!   trace of a driver who only learns about blockages on arrival, and
//!   the scenario comparison built from those.
//! * [`reports`] holds the problem-report lifecycle, the problem-type
//!   catalog and the repair cost model.
//! * [`store`] persists everything in a single crash-safe file.

pub mod clock;
pub mod error;
pub mod fixtures;
pub mod geo;
pub mod network;
pub mod reports;
pub mod routing;
pub mod store;

pub use clock::{Clock, ManualClock, SystemClock};
pub use error::{Error, Result};
pub use geo::{segment_length, GeoPoint, EARTH_RADIUS_M};
pub use network::{
    build_graph, export_geojson, load_geojson, End, Junction, JunctionId, NetworkGraph,
    RoadSegment, SegmentId, SegmentPatch, DEFAULT_SNAP_TOLERANCE_M,
};
pub use reports::{
    blocked_segments, estimate_repair_cost, AssignmentId, AssignmentOutcome, Catalog,
    CostEstimate, NewReport, ProblemReport, ProblemType, RepairAssignment, ReportBook,
    ReportFilter, ReportId, ReportPatch, ReportStatus, UserId,
};
pub use routing::{
    alternative_routes, compare_scenarios, display_km, display_minutes, display_percent,
    shortest_path, simulate_naive_drive, travel_time, Direction, DriveLeg, DriveTrace, LegPurpose,
    RoutePlan, RoutingGraph, ScenarioComparison, ScenarioFigure, Topology, VehicleProfile,
    DEFAULT_SPEED_KMH,
};
pub use store::{CommitStage, Mutation, Revision, Store, StoreSnapshot, User, UserRole, SCHEMA_VERSION};
