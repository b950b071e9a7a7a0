//! Directed geometric road graph.
//!
//! Junctions carry planar coordinates in meters; road segments carry their
//! metric length. Generated networks are symmetric (every road can be driven
//! in both directions) while hand-built graphs may be fully directed.

mod generate;
mod io;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::generate::{attach_spawn_node, generate_network, GraphGenConfig, MIN_EDGE_DISTANCE};
pub use self::io::{load_network, save_network, NetworkMeta};

/// Dense junction index, `0..num_nodes`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub(crate) fn from_index(index: usize) -> Self {
        NodeId(index as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
}

/// A directed road segment. `distance` is in meters and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub distance: f64,
}

impl Edge {
    pub fn reversed(&self) -> Edge {
        Edge {
            from: self.to,
            to: self.from,
            distance: self.distance,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must contain ≥ 1 node")]
    Empty,
    #[error("node {id} does not exist (graph has {num_nodes} nodes)")]
    UnknownNode { id: NodeId, num_nodes: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: NodeId, to: NodeId },
    #[error("edge {from} -> {to} has non-positive or non-finite distance {distance}")]
    InvalidDistance {
        from: NodeId,
        to: NodeId,
        distance: f64,
    },
    #[error("point ({x}, {y}) lies outside the {area_x} x {area_y} m area")]
    OutsideArea {
        x: f64,
        y: f64,
        area_x: f64,
        area_y: f64,
    },
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("network generation failed after {attempts} attempts (last seed tried: {last_seed})")]
    GenerationFailed { last_seed: u64, attempts: u32 },
    #[error("malformed network document at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid network document, field `{field}`: {message}")]
    Validation { field: String, message: String },
}

/// Directed graph of junctions and road segments.
///
/// Invariants maintained by every mutating method: no self-loops, no
/// duplicate directed edge, every edge endpoint exists, distances finite and
/// strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadGraph {
    nodes: Vec<Node>,
    adjacency: Vec<Vec<Edge>>,
    directed: bool,
    meta: Option<NetworkMeta>,
}

impl RoadGraph {
    /// An empty graph. When `directed` is false every road added through
    /// [`RoadGraph::add_road`] is stored in both directions and the file
    /// format lists each road once.
    pub fn new(directed: bool) -> Self {
        RoadGraph {
            nodes: Vec::new(),
            adjacency: Vec::new(),
            directed,
            meta: None,
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn meta(&self) -> Option<&NetworkMeta> {
        self.meta.as_ref()
    }

    pub(crate) fn set_meta(&mut self, meta: Option<NetworkMeta>) {
        self.meta = meta;
    }

    pub fn add_node(&mut self, x: f64, y: f64) -> NodeId {
        let id = NodeId::from_index(self.nodes.len());
        self.nodes.push(Node { id, x, y });
        self.adjacency.push(Vec::new());
        id
    }

    /// Adds the directed edge `from -> to`.
    pub fn add_edge(&mut self, from: NodeId, to: NodeId, distance: f64) -> Result<(), GraphError> {
        self.check_node(from)?;
        self.check_node(to)?;
        if from == to {
            return Err(GraphError::SelfLoop(from));
        }
        if !(distance.is_finite() && distance > 0.0) {
            return Err(GraphError::InvalidDistance { from, to, distance });
        }
        let out = &mut self.adjacency[from.index()];
        match out.binary_search_by_key(&to, |e| e.to) {
            Ok(_) => Err(GraphError::DuplicateEdge { from, to }),
            Err(pos) => {
                out.insert(pos, Edge { from, to, distance });
                Ok(())
            }
        }
    }

    /// Adds a two-way road: `a -> b` and `b -> a` with the same distance.
    pub fn add_road(&mut self, a: NodeId, b: NodeId, distance: f64) -> Result<(), GraphError> {
        self.check_node(a)?;
        self.check_node(b)?;
        if self.find_edge(b, a).is_some() {
            return Err(GraphError::DuplicateEdge { from: b, to: a });
        }
        self.add_edge(a, b, distance)?;
        self.add_edge(b, a, distance)
    }

    pub fn check_node(&self, id: NodeId) -> Result<(), GraphError> {
        if id.index() < self.nodes.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownNode {
                id,
                num_nodes: self.nodes.len(),
            })
        }
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Number of directed edges.
    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId::from_index)
    }

    /// Outgoing edges, ordered by target id.
    pub fn out_edges(&self, id: NodeId) -> &[Edge] {
        &self.adjacency[id.index()]
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.adjacency.iter().flatten()
    }

    pub fn find_edge(&self, from: NodeId, to: NodeId) -> Option<&Edge> {
        let out = self.adjacency.get(from.index())?;
        out.binary_search_by_key(&to, |e| e.to).ok().map(|i| &out[i])
    }

    pub fn euclidean(&self, a: NodeId, b: NodeId) -> f64 {
        let (p, q) = (self.node(a), self.node(b));
        (p.x - q.x).hypot(p.y - q.y)
    }

    /// The same junctions with every edge flipped. Used for backward
    /// searches from a destination.
    pub fn reversed(&self) -> RoadGraph {
        let mut adjacency = vec![Vec::new(); self.nodes.len()];
        // Sources are visited in ascending order, so each list stays sorted.
        for edge in self.edges() {
            adjacency[edge.to.index()].push(edge.reversed());
        }
        RoadGraph {
            nodes: self.nodes.clone(),
            adjacency,
            directed: self.directed,
            meta: None,
        }
    }

    /// Nodes of the largest strongly connected component, ascending by id.
    /// Ties between equally sized components go to the one holding the
    /// smallest node id.
    pub fn largest_strong_component(&self) -> Vec<NodeId> {
        let components = self.strong_components();
        let mut best: Option<&Vec<NodeId>> = None;
        for comp in &components {
            match best {
                Some(b) if b.len() > comp.len() || (b.len() == comp.len() && b[0] < comp[0]) => {}
                _ => best = Some(comp),
            }
        }
        best.cloned().unwrap_or_default()
    }

    /// Strongly connected components (iterative Kosaraju), each sorted by id.
    pub fn strong_components(&self) -> Vec<Vec<NodeId>> {
        let n = self.nodes.len();
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for start in 0..n {
            if visited[start] {
                continue;
            }
            visited[start] = true;
            let mut stack = vec![(start, 0usize)];
            while let Some((v, i)) = stack.pop() {
                let out = &self.adjacency[v];
                if i < out.len() {
                    stack.push((v, i + 1));
                    let w = out[i].to.index();
                    if !visited[w] {
                        visited[w] = true;
                        stack.push((w, 0));
                    }
                } else {
                    order.push(v);
                }
            }
        }

        let reversed = self.reversed();
        let mut assigned = vec![false; n];
        let mut components = Vec::new();
        for &root in order.iter().rev() {
            if assigned[root] {
                continue;
            }
            assigned[root] = true;
            let mut comp = vec![NodeId::from_index(root)];
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for e in &reversed.adjacency[v] {
                    let w = e.to.index();
                    if !assigned[w] {
                        assigned[w] = true;
                        comp.push(e.to);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }
}
