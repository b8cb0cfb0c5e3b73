//! The space-time graph itself: node and edge records plus the derived
//! indexes (adjacency, time tree, typed crash rows) every consumer shares.
//!
//! Records are the only persisted truth. Everything else is rebuilt
//! deterministically by `StvgGraph::from_parts`, so a graph loaded from a
//! snapshot is indistinguishable from one assembled in process.

pub mod assemble;
pub mod snapshot;
pub mod time_tree;

pub use assemble::{assemble_graph, BuildError};
pub use snapshot::SnapshotError;
pub use time_tree::TimeTreeIndex;

use crate::road_prep::EnrichedCrash;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub type NodeId = u32;
pub type EdgeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeLabel {
    Crash,
    Street,
    Intersection,
    Factor,
    TimeInstant,
}

impl NodeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeLabel::Crash => "Crash",
            NodeLabel::Street => "Street",
            NodeLabel::Intersection => "Intersection",
            NodeLabel::Factor => "Factor",
            NodeLabel::TimeInstant => "TimeInstant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    #[serde(rename = "LOCATED_AT")]
    LocatedAt,
    #[serde(rename = "NEXT_EVENT")]
    NextEvent,
    #[serde(rename = "NEXT_GEO")]
    NextGeo,
    #[serde(rename = "HAPPENS_AT")]
    HappensAt,
    #[serde(rename = "CAUSED_BY")]
    CausedBy,
    #[serde(rename = "CONTAINS")]
    Contains,
    #[serde(rename = "NEXT_TIME")]
    NextTime,
    #[serde(rename = "CONNECTS")]
    Connects,
}

impl EdgeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeKind::LocatedAt => "LOCATED_AT",
            EdgeKind::NextEvent => "NEXT_EVENT",
            EdgeKind::NextGeo => "NEXT_GEO",
            EdgeKind::HappensAt => "HAPPENS_AT",
            EdgeKind::CausedBy => "CAUSED_BY",
            EdgeKind::Contains => "CONTAINS",
            EdgeKind::NextTime => "NEXT_TIME",
            EdgeKind::Connects => "CONNECTS",
        }
    }
}

/// Property values are deliberately flat; nothing in the model needs nested
/// structure. Variant order matters for untagged deserialization: integers
/// must be tried before floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl PropValue {
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            PropValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            PropValue::Float(v) => Some(*v),
            PropValue::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            PropValue::Str(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            PropValue::Bool(v) => Some(*v),
            _ => None,
        }
    }
}

pub type Properties = BTreeMap<String, PropValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub node_id: NodeId,
    pub label: NodeLabel,
    pub properties: Properties,
}

/// Temporal edges carry references to the hour nodes bracketing them and,
/// where defined, spatial and temporal weights. Atemporal kinds leave all
/// four fields empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub edge_id: EdgeId,
    pub kind: EdgeKind,
    pub source: NodeId,
    pub target: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_a: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_b: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub config_digest: String,
    pub input_digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
    Both,
}

/// One crash with its resolved companions, kept in sequence order.
#[derive(Debug, Clone)]
pub struct CrashRow {
    pub node_id: NodeId,
    pub spatial_node: NodeId,
    pub hour_node: NodeId,
    pub data: EnrichedCrash,
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("graph records are inconsistent: {0}")]
    Malformed(String),
}

#[derive(Debug)]
pub struct StvgGraph {
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    meta: GraphMeta,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    tree: TimeTreeIndex,
    crash_rows: Vec<CrashRow>,
    row_of_node: BTreeMap<NodeId, usize>,
    street_by_name: BTreeMap<String, NodeId>,
    intersection_by_id: BTreeMap<u32, NodeId>,
}

impl StvgGraph {
    /// Rebuilds every derived structure from the raw records. Both the
    /// assembler and the snapshot loader come through here, which is what
    /// makes "load(save(g)) behaves like g" hold by construction.
    pub fn from_parts(
        nodes: Vec<NodeRecord>,
        edges: Vec<EdgeRecord>,
        meta: GraphMeta,
    ) -> Result<Self, GraphError> {
        for (i, n) in nodes.iter().enumerate() {
            if n.node_id as usize != i {
                return Err(GraphError::Malformed(format!(
                    "node {} stored at position {}",
                    n.node_id, i
                )));
            }
        }
        let n = nodes.len();
        let mut out_adj: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
        let mut in_adj: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            if e.edge_id as usize != i {
                return Err(GraphError::Malformed(format!(
                    "edge {} stored at position {}",
                    e.edge_id, i
                )));
            }
            if e.source as usize >= n || e.target as usize >= n {
                return Err(GraphError::Malformed(format!(
                    "edge {} references a missing node",
                    e.edge_id
                )));
            }
            out_adj[e.source as usize].push(e.edge_id);
            in_adj[e.target as usize].push(e.edge_id);
        }

        let tree = TimeTreeIndex::reconstruct(&nodes, &edges)
            .map_err(GraphError::Malformed)?;

        let mut street_by_name = BTreeMap::new();
        let mut intersection_by_id = BTreeMap::new();
        for node in &nodes {
            match node.label {
                NodeLabel::Street => {
                    let name = node
                        .properties
                        .get("name")
                        .and_then(PropValue::as_str)
                        .ok_or_else(|| {
                            GraphError::Malformed(format!("street node {} has no name", node.node_id))
                        })?;
                    street_by_name.insert(name.to_string(), node.node_id);
                }
                NodeLabel::Intersection => {
                    let id = node
                        .properties
                        .get("int_id")
                        .and_then(PropValue::as_i64)
                        .ok_or_else(|| {
                            GraphError::Malformed(format!(
                                "intersection node {} has no int_id",
                                node.node_id
                            ))
                        })?;
                    intersection_by_id.insert(id as u32, node.node_id);
                }
                _ => {}
            }
        }

        let mut crash_rows: Vec<CrashRow> = Vec::new();
        for node in &nodes {
            if node.label != NodeLabel::Crash {
                continue;
            }
            let data = assemble::crash_from_props(&node.properties).map_err(|e| {
                GraphError::Malformed(format!("crash node {}: {}", node.node_id, e))
            })?;
            let spatial_node = single_out(&out_adj, &edges, node.node_id, EdgeKind::LocatedAt)?;
            let hour_node = single_out(&out_adj, &edges, node.node_id, EdgeKind::HappensAt)?;
            crash_rows.push(CrashRow {
                node_id: node.node_id,
                spatial_node,
                hour_node,
                data,
            });
        }
        crash_rows.sort_by_key(|r| r.data.sequence);
        let row_of_node = crash_rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.node_id, i))
            .collect();

        Ok(StvgGraph {
            nodes,
            edges,
            meta,
            out_adj,
            in_adj,
            tree,
            crash_rows,
            row_of_node,
            street_by_name,
            intersection_by_id,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeRecord, GraphError> {
        self.nodes.get(id as usize).ok_or(GraphError::UnknownNode(id))
    }

    pub fn edge(&self, id: EdgeId) -> &EdgeRecord {
        &self.edges[id as usize]
    }

    pub fn edges_out(&self, id: NodeId) -> &[EdgeId] {
        &self.out_adj[id as usize]
    }

    pub fn edges_in(&self, id: NodeId) -> &[EdgeId] {
        &self.in_adj[id as usize]
    }

    pub fn tree(&self) -> &TimeTreeIndex {
        &self.tree
    }

    pub fn crash_rows(&self) -> &[CrashRow] {
        &self.crash_rows
    }

    pub fn crash_row_of(&self, node: NodeId) -> Option<&CrashRow> {
        self.row_of_node.get(&node).map(|&i| &self.crash_rows[i])
    }

    pub fn street_node(&self, name: &str) -> Option<NodeId> {
        self.street_by_name.get(name).copied()
    }

    pub fn intersection_node(&self, int_id: u32) -> Option<NodeId> {
        self.intersection_by_id.get(&int_id).copied()
    }

    pub fn streets(&self) -> impl Iterator<Item = (&String, NodeId)> {
        self.street_by_name.iter().map(|(k, &v)| (k, v))
    }

    pub fn intersections(&self) -> impl Iterator<Item = (u32, NodeId)> + '_ {
        self.intersection_by_id.iter().map(|(&k, &v)| (k, v))
    }

    /// Adjacent edges of `node` restricted to `kinds` (empty slice = all
    /// kinds), in stable edge-id order. `Both` reports each incident edge
    /// once even if it appears in both adjacency lists.
    pub fn neighbors(
        &self,
        node: NodeId,
        kinds: &[EdgeKind],
        dir: Direction,
    ) -> Result<Vec<(EdgeId, NodeId)>, GraphError> {
        if node as usize >= self.nodes.len() {
            return Err(GraphError::UnknownNode(node));
        }
        let keep = |eid: &EdgeId| {
            let e = self.edge(*eid);
            kinds.is_empty() || kinds.contains(&e.kind)
        };
        let mut ids: Vec<EdgeId> = match dir {
            Direction::Out => self.out_adj[node as usize].iter().copied().filter(keep).collect(),
            Direction::In => self.in_adj[node as usize].iter().copied().filter(keep).collect(),
            Direction::Both => {
                let mut v: Vec<EdgeId> = self.out_adj[node as usize]
                    .iter()
                    .chain(self.in_adj[node as usize].iter())
                    .copied()
                    .filter(keep)
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        };
        ids.sort_unstable();
        Ok(ids
            .into_iter()
            .map(|eid| {
                let e = self.edge(eid);
                let other = if e.source == node { e.target } else { e.source };
                (eid, other)
            })
            .collect())
    }

    pub fn node_counts_by_label(&self) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        for n in &self.nodes {
            *out.entry(n.label.as_str().to_string()).or_insert(0) += 1;
        }
        out
    }

    pub fn edge_counts_by_kind(&self) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        for e in &self.edges {
            *out.entry(e.kind.as_str().to_string()).or_insert(0) += 1;
        }
        out
    }
}

fn single_out(
    out_adj: &[Vec<EdgeId>],
    edges: &[EdgeRecord],
    node: NodeId,
    kind: EdgeKind,
) -> Result<NodeId, GraphError> {
    let mut found = None;
    for &eid in &out_adj[node as usize] {
        let e = &edges[eid as usize];
        if e.kind == kind {
            if found.is_some() {
                return Err(GraphError::Malformed(format!(
                    "node {} has multiple {} edges",
                    node,
                    kind.as_str()
                )));
            }
            found = Some(e.target);
        }
    }
    found.ok_or_else(|| {
        GraphError::Malformed(format!("node {} has no {} edge", node, kind.as_str()))
    })
}
