//! JSON network documents.
//!
//! ```json
//! {
//!   "meta": { "seed": 3, "requested_seed": 1, "config": { ... } },
//!   "directed": false,
//!   "nodes": [ { "id": 0, "x": 12.5, "y": 80.0 }, ... ],
//!   "edges": [ { "from": 0, "to": 1, "distance": 67.5 }, ... ]
//! }
//! ```
//!
//! Node ids must be listed densely in order. For undirected documents each
//! road appears once with `from < to` and is loaded in both directions.
//! Distances are written with round-trip precision.

use serde::{Deserialize, Serialize};

use super::{GraphError, GraphGenConfig, NodeId, RoadGraph};

/// Provenance of a generated network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMeta {
    /// Seed that produced the accepted graph.
    pub seed: u64,
    /// Seed originally requested; differs from `seed` after connectivity retries.
    pub requested_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<GraphGenConfig>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<NetworkMeta>,
    #[serde(default = "default_directed")]
    directed: bool,
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
}

fn default_directed() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: u32,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    from: u32,
    to: u32,
    distance: f64,
}

pub fn save_network(graph: &RoadGraph) -> String {
    let nodes = graph
        .nodes()
        .iter()
        .map(|n| NodeRecord {
            id: n.id.0,
            x: n.x,
            y: n.y,
        })
        .collect();
    let edges = graph
        .edges()
        .filter(|e| graph.is_directed() || e.from < e.to)
        .map(|e| EdgeRecord {
            from: e.from.0,
            to: e.to.0,
            distance: e.distance,
        })
        .collect();
    let doc = NetworkDocument {
        meta: graph.meta().cloned(),
        directed: graph.is_directed(),
        nodes,
        edges,
    };
    serde_json::to_string_pretty(&doc).expect("network documents always serialize")
}

pub fn load_network(text: &str) -> Result<RoadGraph, GraphError> {
    let doc: NetworkDocument = serde_json::from_str(text).map_err(|e| GraphError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.nodes.is_empty() {
        return Err(GraphError::Empty);
    }

    let mut graph = RoadGraph::new(doc.directed);
    for (i, node) in doc.nodes.iter().enumerate() {
        if node.id as usize != i {
            return Err(invalid(
                format!("nodes[{i}].id"),
                format!("expected id {i}, found {} (ids must be dense and ordered)", node.id),
            ));
        }
        if !(node.x.is_finite() && node.y.is_finite()) {
            return Err(invalid(format!("nodes[{i}]"), "coordinates must be finite".into()));
        }
        graph.add_node(node.x, node.y);
    }

    let num_nodes = doc.nodes.len();
    for (i, edge) in doc.edges.iter().enumerate() {
        for (name, id) in [("from", edge.from), ("to", edge.to)] {
            if id as usize >= num_nodes {
                return Err(invalid(
                    format!("edges[{i}].{name}"),
                    format!("node {id} does not exist (graph has {num_nodes} nodes)"),
                ));
            }
        }
        let (from, to) = (NodeId(edge.from), NodeId(edge.to));
        let added = if doc.directed {
            graph.add_edge(from, to, edge.distance)
        } else {
            graph.add_road(from, to, edge.distance)
        };
        added.map_err(|e| invalid(format!("edges[{i}]"), e.to_string()))?;
    }
    graph.set_meta(doc.meta);
    Ok(graph)
}

fn invalid(field: String, message: String) -> GraphError {
    GraphError::Validation { field, message }
}
