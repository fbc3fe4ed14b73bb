use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::network::{End, JunctionId, SegmentId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Arc {
    pub segment: SegmentId,
    pub to: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Ends {
    pub start: usize,
    pub end: usize,
    pub length: f64,
}

/// Dense undirected adjacency used by all routing operations.
///
/// Junctions are addressed by a compact index internally; arcs out of each
/// junction are sorted by segment id so that iteration order doubles as the
/// tie-break order.
#[derive(Debug, Clone, Default)]
pub struct Topology {
    ids: Vec<JunctionId>,
    index: HashMap<JunctionId, usize>,
    adjacency: Vec<Vec<Arc>>,
    segments: HashMap<SegmentId, Ends>,
}

impl Topology {
    /// Graph over the junctions named by `edges`: `(segment, start, end, length)`.
    pub fn from_edges(
        edges: impl IntoIterator<Item = (SegmentId, JunctionId, JunctionId, f64)>,
    ) -> Result<Self> {
        Self::with_junctions(std::iter::empty(), edges)
    }

    /// Like [`Topology::from_edges`], with additional (possibly isolated) junctions.
    pub fn with_junctions(
        junctions: impl IntoIterator<Item = JunctionId>,
        edges: impl IntoIterator<Item = (SegmentId, JunctionId, JunctionId, f64)>,
    ) -> Result<Self> {
        let mut topo = Topology::default();
        for j in junctions {
            topo.intern(j);
        }
        for (segment, a, b, length) in edges {
            if !length.is_finite() || length <= 0.0 {
                return Err(Error::validation(format!(
                    "segment {segment} has non-positive length {length}"
                )));
            }
            let (ia, ib) = (topo.intern(a), topo.intern(b));
            let ends = Ends {
                start: ia,
                end: ib,
                length,
            };
            if topo.segments.insert(segment, ends).is_some() {
                return Err(Error::validation(format!("duplicate segment id {segment}")));
            }
            topo.adjacency[ia].push(Arc {
                segment,
                to: ib,
                length,
            });
            if ia != ib {
                topo.adjacency[ib].push(Arc {
                    segment,
                    to: ia,
                    length,
                });
            }
        }
        for arcs in &mut topo.adjacency {
            arcs.sort_by_key(|a| (a.segment, a.to));
        }
        Ok(topo)
    }

    fn intern(&mut self, id: JunctionId) -> usize {
        if let Some(&i) = self.index.get(&id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id);
        self.index.insert(id, i);
        self.adjacency.push(Vec::new());
        i
    }

    pub fn junction_count(&self) -> usize {
        self.ids.len()
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn contains_junction(&self, id: JunctionId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn segment_length(&self, id: SegmentId) -> Option<f64> {
        self.segments.get(&id).map(|e| e.length)
    }

    /// Junctions at the start and end of a segment.
    pub fn segment_ends(&self, id: SegmentId) -> Option<(JunctionId, JunctionId)> {
        self.segments
            .get(&id)
            .map(|e| (self.ids[e.start], self.ids[e.end]))
    }

    /// Which end of `segment` sits at `junction`, if either.
    pub fn end_at(&self, segment: SegmentId, junction: JunctionId) -> Option<End> {
        let (s, e) = self.segment_ends(segment)?;
        if s == junction {
            Some(End::Start)
        } else if e == junction {
            Some(End::End)
        } else {
            None
        }
    }

    pub fn junction_ids(&self) -> &[JunctionId] {
        &self.ids
    }

    /// `(segment, neighbor)` pairs around a junction, in segment id order.
    pub fn neighbors(&self, id: JunctionId) -> impl Iterator<Item = (SegmentId, JunctionId)> + '_ {
        self.index
            .get(&id)
            .into_iter()
            .flat_map(move |&i| self.adjacency[i].iter().map(|a| (a.segment, self.ids[a.to])))
    }

    pub(crate) fn index_of(&self, id: JunctionId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub(crate) fn id_at(&self, index: usize) -> JunctionId {
        self.ids[index]
    }

    pub(crate) fn arcs(&self, index: usize) -> &[Arc] {
        &self.adjacency[index]
    }

    pub(crate) fn ends(&self, segment: SegmentId) -> Option<Ends> {
        self.segments.get(&segment).copied()
    }
}

/// Anything routing can run on.
pub trait RoutingGraph {
    fn topology(&self) -> &Topology;
}

impl RoutingGraph for Topology {
    fn topology(&self) -> &Topology {
        self
    }
}

impl RoutingGraph for crate::network::NetworkGraph {
    fn topology(&self) -> &Topology {
        crate::network::NetworkGraph::topology(self)
    }
}

impl<G: RoutingGraph + ?Sized> RoutingGraph for &G {
    fn topology(&self) -> &Topology {
        (**self).topology()
    }
}

impl<G: RoutingGraph + ?Sized> RoutingGraph for std::sync::Arc<G> {
    fn topology(&self) -> &Topology {
        (**self).topology()
    }
}
