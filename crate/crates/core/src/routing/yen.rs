//! Yen's k shortest loopless paths.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use super::dijkstra::{best_path, Path};
use super::topology::Topology;
use crate::network::SegmentId;

/// Path ordered by distance, then by segment-id sequence.
#[derive(Debug, Clone)]
struct Ranked(Path);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .distance
            .total_cmp(&other.0.distance)
            .then_with(|| self.0.segments.cmp(&other.0.segments))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Up to `k` loopless paths in ascending (distance, segment sequence) order.
pub(crate) fn k_shortest(
    topo: &Topology,
    origin: usize,
    dest: usize,
    blocked: &BTreeSet<SegmentId>,
    k: usize,
) -> Vec<Path> {
    let n = topo.junction_count();
    let none_removed = vec![false; n];
    let Some(first) = best_path(topo, origin, dest, |s| !blocked.contains(&s), &none_removed) else {
        return Vec::new();
    };
    let mut accepted: Vec<Path> = vec![first];
    let mut candidates: BTreeSet<Ranked> = BTreeSet::new();
    let mut known: HashSet<Vec<SegmentId>> = HashSet::new();
    known.insert(accepted[0].segments.clone());

    while accepted.len() < k {
        let last = accepted.last().expect("non-empty").clone();
        for i in 0..last.segments.len() {
            let spur = last.nodes[i];
            let root_segments = &last.segments[..i];

            // Leaving the spur junction along the next segment of any accepted
            // path sharing this root would only rediscover that path.
            let mut cut: HashSet<SegmentId> = HashSet::new();
            for p in &accepted {
                if p.segments.len() > i && p.segments[..i] == *root_segments {
                    cut.insert(p.segments[i]);
                }
            }
            let mut removed = none_removed.clone();
            for &node in &last.nodes[..i] {
                removed[node] = true;
            }

            let Some(tail) = best_path(
                topo,
                spur,
                dest,
                |s| !blocked.contains(&s) && !cut.contains(&s),
                &removed,
            ) else {
                continue;
            };
            let mut segments = root_segments.to_vec();
            segments.extend_from_slice(&tail.segments);
            if !known.insert(segments.clone()) {
                continue;
            }
            let mut nodes = last.nodes[..i].to_vec();
            nodes.extend_from_slice(&tail.nodes);
            let distance = Path::measure(topo, &segments);
            candidates.insert(Ranked(Path {
                segments,
                nodes,
                distance,
            }));
        }
        match candidates.pop_first() {
            Some(Ranked(best)) => accepted.push(best),
            None => break,
        }
    }
    accepted
}
