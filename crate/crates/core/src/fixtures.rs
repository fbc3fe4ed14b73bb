//! Reference data shipped with the crate: the koupa-mini road network and
//! the two-report example used across tests, the CLI and the service.
//!
//! koupa-mini is a synthetic 66 km network of 16 junctions. Its route core:
//!
//! ```text
//!                      378
//!                       |
//!   A --101-- X --102-- J --189-- Q --103-- F
//!   |          \                          / |
//!  301         201                    202   302
//!   |            \                    /     |
//!   |             Y ------------------      |
//!   |             |                         |
//!   |            401                        |
//!   Z ------------+--------------------------+
//! ```
//!
//! A->F is 7769 m through 189. With 189 closed the best alternatives are
//! 8256 m (101, 201, 202) and 9775 m (301, 302); a driver who only learns of
//! the closure at J covers 13603 m in total.

use crate::clock::Clock;
use crate::error::Result;
use crate::network::{build_graph, load_geojson, JunctionId, NetworkGraph, SegmentId, DEFAULT_SNAP_TOLERANCE_M};
use crate::reports::{NewReport, ReportBook, UserId};
use crate::Catalog;

pub const KOUPA_MINI_GEOJSON: &str = include_str!("../fixtures/koupa-mini.geojson");

pub const KOUPA_ORIGIN: JunctionId = JunctionId(1);
pub const KOUPA_DEST: JunctionId = JunctionId(5);
pub const KOUPA_BLOCKED: SegmentId = SegmentId(189);
pub const KOUPA_LANDSLIDE: SegmentId = SegmentId(378);
pub const KOUPA_TOTAL_M: f64 = 66_000.0;

pub fn koupa_mini() -> NetworkGraph {
    let segments = load_geojson(KOUPA_MINI_GEOJSON.as_bytes()).expect("koupa-mini parses");
    build_graph(segments, DEFAULT_SNAP_TOLERANCE_M).expect("koupa-mini builds")
}

/// The two open reports: a landslide on 378 and a road closure on 189.
pub fn sample_reports() -> [NewReport; 2] {
    [
        NewReport {
            report_code: "Landslide".into(),
            report_comments: "Fallen rocks across the carriageway".into(),
            segment_ref: KOUPA_LANDSLIDE,
            location: None,
        },
        NewReport {
            report_code: "Closed Road".into(),
            report_comments: "Flooded after heavy rain".into(),
            segment_ref: KOUPA_BLOCKED,
            location: None,
        },
    ]
}

/// A report book holding [`sample_reports`], filed in order by `reporter`.
pub fn sample_book(graph: &NetworkGraph, catalog: &Catalog, clock: &dyn Clock) -> Result<ReportBook> {
    let mut book = ReportBook::default();
    for new in sample_reports() {
        let report = book.create_report(new, UserId::new("cco1"), catalog, graph.segments(), clock)?;
        book.reports.insert(report.id, report);
    }
    Ok(book)
}
