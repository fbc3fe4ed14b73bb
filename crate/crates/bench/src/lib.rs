//! Synthetic road networks for the benchmarks.

use frmp_core::{GeoPoint, RoadSegment, SegmentId};

/// Spacing between grid junctions, in degrees (roughly 1 km).
const STEP_DEG: f64 = 0.01;

/// An `n` x `n` grid of straight segments around (22.6 E, 40.98 N).
pub fn grid_segments(n: usize) -> Vec<RoadSegment> {
    let at = |r: usize, c: usize| GeoPoint::new(22.6 + c as f64 * STEP_DEG, 40.98 + r as f64 * STEP_DEG).unwrap();
    let mut out = Vec::with_capacity(2 * n * (n - 1));
    let mut id = 0;
    let mut push = |a: GeoPoint, b: GeoPoint| {
        id += 1;
        out.push(RoadSegment::new(SegmentId(id), vec![a, b]).unwrap());
    };
    for r in 0..n {
        for c in 0..n {
            if c + 1 < n {
                push(at(r, c), at(r, c + 1));
            }
            if r + 1 < n {
                push(at(r, c), at(r + 1, c));
            }
        }
    }
    out
}
