use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::topology::Topology;
use crate::network::SegmentId;

/// A path over topology indices.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Path {
    pub segments: Vec<SegmentId>,
    pub nodes: Vec<usize>,
    pub distance: f64,
}

impl Path {
    pub fn trivial(node: usize) -> Self {
        Path {
            segments: Vec::new(),
            nodes: vec![node],
            distance: 0.0,
        }
    }

    /// Sums segment lengths in path order, so equal sequences always
    /// produce bit-identical distances.
    pub fn measure(topo: &Topology, segments: &[SegmentId]) -> f64 {
        segments
            .iter()
            .map(|s| topo.segment_length(*s).expect("segment in topology"))
            .sum()
    }
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    dist: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest path from `origin` to `dest` using only segments for which
/// `allowed` holds and never entering a junction marked in `removed`.
///
/// Among equally short paths the one whose segment-id sequence is
/// lexicographically smallest wins: distances to `dest` are settled first,
/// then the path is walked forward from `origin` taking the lowest-id
/// segment that stays on some shortest path.
pub(crate) fn best_path(
    topo: &Topology,
    origin: usize,
    dest: usize,
    allowed: impl Fn(SegmentId) -> bool,
    removed: &[bool],
) -> Option<Path> {
    if origin == dest {
        return Some(Path::trivial(origin));
    }
    let n = topo.junction_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[dest] = 0.0;
    heap.push(State { dist: 0.0, node: dest });
    while let Some(State { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        if node == origin {
            break;
        }
        for arc in topo.arcs(node) {
            if removed[arc.to] || !allowed(arc.segment) {
                continue;
            }
            let next = d + arc.length;
            if next < dist[arc.to] {
                dist[arc.to] = next;
                heap.push(State {
                    dist: next,
                    node: arc.to,
                });
            }
        }
    }
    if !dist[origin].is_finite() {
        return None;
    }

    let mut segments = Vec::new();
    let mut nodes = vec![origin];
    let mut cur = origin;
    while cur != dest {
        let step = topo.arcs(cur).iter().find(|arc| {
            !removed[arc.to]
                && arc.to != cur
                && allowed(arc.segment)
                && dist[arc.to] + arc.length == dist[cur]
        })?;
        segments.push(step.segment);
        nodes.push(step.to);
        cur = step.to;
        if nodes.len() > n {
            debug_assert!(false, "forward walk did not terminate");
            return None;
        }
    }
    let distance = Path::measure(topo, &segments);
    Some(Path {
        segments,
        nodes,
        distance,
    })
}
