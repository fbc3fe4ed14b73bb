//! Trace of a driver who only learns about a blockage on reaching it.

use std::collections::BTreeSet;

use super::dijkstra::best_path;
use super::topology::Topology;
use super::{Direction, DriveLeg, LegPurpose};
use crate::network::SegmentId;

pub(crate) struct NaiveOutcome {
    pub legs: Vec<DriveLeg>,
    pub encountered: Vec<SegmentId>,
    pub feasible: bool,
}

/// The driver follows the shortest path given what they know. At a junction
/// whose next planned segment is blocked, the blockage becomes known and the
/// driver replans from where they stand. Replanned moves that retrace the
/// most recently driven segment are backtrack legs; the remaining moves up
/// to the next discovery are reroute legs.
pub(crate) fn drive(
    topo: &Topology,
    origin: usize,
    dest: usize,
    blockages: &BTreeSet<SegmentId>,
) -> NaiveOutcome {
    let none_removed = vec![false; topo.junction_count()];
    let mut known: BTreeSet<SegmentId> = BTreeSet::new();
    let mut legs = Vec::new();
    let mut encountered = Vec::new();
    // Forward moves not yet undone by a backtrack: (segment, from, to).
    let mut driven: Vec<(SegmentId, usize, usize)> = Vec::new();
    let mut cur = origin;

    'replan: loop {
        let Some(plan) = best_path(topo, cur, dest, |s| !known.contains(&s), &none_removed) else {
            return NaiveOutcome {
                legs,
                encountered,
                feasible: false,
            };
        };
        for (step, &segment) in plan.segments.iter().enumerate() {
            if blockages.contains(&segment) {
                known.insert(segment);
                encountered.push(segment);
                continue 'replan;
            }
            let next = plan.nodes[step + 1];
            let retraces = matches!(driven.last(), Some(&(s, from, to)) if s == segment && to == cur && from == next);
            let purpose = if retraces {
                driven.pop();
                LegPurpose::Backtrack
            } else {
                driven.push((segment, cur, next));
                if encountered.is_empty() {
                    LegPurpose::Advance
                } else {
                    LegPurpose::Reroute
                }
            };
            let ends = topo.ends(segment).expect("segment in topology");
            let direction = if ends.start == cur && ends.end == next {
                Direction::Forward
            } else {
                Direction::Reverse
            };
            legs.push(DriveLeg {
                segment_id: segment,
                from: topo.id_at(cur),
                to: topo.id_at(next),
                direction,
                purpose,
                length_m: ends.length,
            });
            cur = next;
        }
        return NaiveOutcome {
            legs,
            encountered,
            feasible: true,
        };
    }
}
