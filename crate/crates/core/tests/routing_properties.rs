//! Routing checked against exhaustive simple-path enumeration on small
//! random graphs with integer weights (so ties are common and exact).

use std::collections::BTreeSet;

use proptest::prelude::*;

use frmp_core::{
    alternative_routes, shortest_path, simulate_naive_drive, JunctionId, LegPurpose, SegmentId,
    Topology, VehicleProfile,
};

#[derive(Debug, Clone)]
struct Case {
    junctions: u64,
    edges: Vec<(u64, u64, u64, f64)>,
}

impl Case {
    fn topology(&self) -> Topology {
        Topology::with_junctions(
            (1..=self.junctions).map(JunctionId),
            self.edges
                .iter()
                .map(|&(s, a, b, w)| (SegmentId(s), JunctionId(a), JunctionId(b), w)),
        )
        .unwrap()
    }

    /// All simple paths from `o` to `d`, sorted by (distance, segment ids).
    fn enumerate(&self, o: u64, d: u64, blocked: &BTreeSet<SegmentId>) -> Vec<(f64, Vec<SegmentId>)> {
        let mut out = Vec::new();
        let mut seen = vec![o];
        let mut path = Vec::new();
        self.walk(o, d, blocked, &mut seen, &mut path, &mut out);
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        out
    }

    fn walk(
        &self,
        at: u64,
        d: u64,
        blocked: &BTreeSet<SegmentId>,
        seen: &mut Vec<u64>,
        path: &mut Vec<(SegmentId, f64)>,
        out: &mut Vec<(f64, Vec<SegmentId>)>,
    ) {
        if at == d {
            out.push((path.iter().map(|p| p.1).sum(), path.iter().map(|p| p.0).collect()));
            return;
        }
        for &(s, a, b, w) in &self.edges {
            let next = if a == at {
                b
            } else if b == at {
                a
            } else {
                continue;
            };
            if blocked.contains(&SegmentId(s)) || seen.contains(&next) {
                continue;
            }
            seen.push(next);
            path.push((SegmentId(s), w));
            self.walk(next, d, blocked, seen, path, out);
            path.pop();
            seen.pop();
        }
    }
}

fn case() -> impl Strategy<Value = Case> {
    (1u64..=8).prop_flat_map(|n| {
        let edge = (1..=n, 1..=n, 1u32..=6);
        (Just(n), proptest::collection::vec(edge, 0..=14), any::<u64>())
    })
    .prop_map(|(n, raw, seed)| {
        // Distinct ids in scrambled order so that id order and input order differ.
        let mut ids: Vec<u64> = (1..=raw.len() as u64).map(|i| i * 10 + (seed >> (i % 60)) % 7).collect();
        let k = ids.len().max(1);
        ids.rotate_left((seed as usize) % k);
        let edges = raw
            .into_iter()
            .zip(ids)
            .map(|((a, b, w), s)| (s, a, b, f64::from(w)))
            .collect();
        Case { junctions: n, edges }
    })
}

fn blocked_subset(c: &Case, mask: u64) -> BTreeSet<SegmentId> {
    c.edges
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, e)| SegmentId(e.0))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn shortest_matches_enumeration(c in case(), o in 1u64..=8, d in 1u64..=8, mask in any::<u64>()) {
        let (o, d) = (o.min(c.junctions), d.min(c.junctions));
        let topo = c.topology();
        let blocked = blocked_subset(&c, mask);
        let plan = shortest_path(&topo, JunctionId(o), JunctionId(d), &blocked, &VehicleProfile::default()).unwrap();
        let all = c.enumerate(o, d, &blocked);
        match all.first() {
            None => prop_assert!(!plan.feasible),
            Some((dist, seq)) => {
                prop_assert!(plan.feasible);
                prop_assert_eq!(plan.distance_m, *dist);
                prop_assert_eq!(&plan.segment_ids, seq);
                prop_assert_eq!(plan.junction_ids.len(), plan.segment_ids.len() + 1);
            }
        }
    }

    #[test]
    fn alternatives_match_enumeration(c in case(), o in 1u64..=8, d in 1u64..=8, k in 1usize..=4) {
        let (o, d) = (o.min(c.junctions), d.min(c.junctions));
        let topo = c.topology();
        let alts = alternative_routes(&topo, JunctionId(o), JunctionId(d), &BTreeSet::new(), k, &VehicleProfile::default()).unwrap();
        let all = c.enumerate(o, d, &BTreeSet::new());
        let expect: Vec<_> = all.into_iter().take(k).collect();
        prop_assert_eq!(alts.len(), expect.len());
        for (plan, (dist, seq)) in alts.iter().zip(&expect) {
            prop_assert_eq!(plan.distance_m, *dist);
            prop_assert_eq!(&plan.segment_ids, seq);
        }
    }

    #[test]
    fn naive_drive_never_beats_informed_route(c in case(), o in 1u64..=8, d in 1u64..=8, mask in any::<u64>()) {
        let (o, d) = (o.min(c.junctions), d.min(c.junctions));
        let topo = c.topology();
        let truck = VehicleProfile::default();
        let blockages = blocked_subset(&c, mask);
        let trace = simulate_naive_drive(&topo, JunctionId(o), JunctionId(d), &blockages, &truck).unwrap();
        let informed = shortest_path(&topo, JunctionId(o), JunctionId(d), &blockages, &truck).unwrap();
        let unaware = shortest_path(&topo, JunctionId(o), JunctionId(d), &BTreeSet::new(), &truck).unwrap();

        prop_assert_eq!(trace.feasible, informed.feasible);
        let leg_sum: f64 = trace.legs.iter().map(|l| l.length_m).sum();
        prop_assert_eq!(trace.total_distance_m, leg_sum);
        prop_assert!(trace.legs.iter().all(|l| !blockages.contains(&l.segment_id)));
        if trace.feasible {
            prop_assert!(trace.total_distance_m >= informed.distance_m);
            if unaware.segment_ids.iter().all(|s| !blockages.contains(s)) {
                prop_assert_eq!(trace.total_distance_m, informed.distance_m);
                prop_assert!(trace.legs.iter().all(|l| l.purpose == LegPurpose::Advance));
            }
            let mut at = JunctionId(o);
            for leg in &trace.legs {
                prop_assert_eq!(leg.from, at);
                at = leg.to;
            }
            prop_assert_eq!(at, JunctionId(d));
        }
    }

    #[test]
    fn blocking_more_never_shortens(c in case(), o in 1u64..=8, d in 1u64..=8, mask in any::<u64>(), extra in any::<u64>()) {
        let (o, d) = (o.min(c.junctions), d.min(c.junctions));
        let topo = c.topology();
        let truck = VehicleProfile::default();
        let small = blocked_subset(&c, mask);
        let large = blocked_subset(&c, mask | extra);
        let p = shortest_path(&topo, JunctionId(o), JunctionId(d), &small, &truck).unwrap();
        let q = shortest_path(&topo, JunctionId(o), JunctionId(d), &large, &truck).unwrap();
        if q.feasible {
            prop_assert!(p.feasible && p.distance_m <= q.distance_m);
        }
    }
}

#[test]
fn routing_leaves_the_graph_untouched() {
    let c = Case {
        junctions: 4,
        edges: vec![(1, 1, 2, 1.0), (2, 2, 4, 1.0), (3, 1, 3, 1.0), (4, 3, 4, 1.0)],
    };
    let topo = c.topology();
    let before = format!("{topo:?}");
    let truck = VehicleProfile::default();
    let blocked = BTreeSet::from([SegmentId(2)]);
    shortest_path(&topo, JunctionId(1), JunctionId(4), &blocked, &truck).unwrap();
    alternative_routes(&topo, JunctionId(1), JunctionId(4), &blocked, 3, &truck).unwrap();
    simulate_naive_drive(&topo, JunctionId(1), JunctionId(4), &blocked, &truck).unwrap();
    assert_eq!(format!("{topo:?}"), before);
}
