//! Independent oracles and random instances shared by the integration
//! tests.
#![allow(dead_code)]

use platoon_core::cost_models::{edge_weight_individual, edge_weight_platoon, CostParams};
use platoon_core::planner::TIE_TOLERANCE;
use platoon_core::road_network::{Edge, NodeId, RoadGraph};
use platoon_core::routing::{Path, TraversalContext};
use rand::Rng;

/// Directed graph with `n` nodes laid out on a line (coordinates are not
/// used by the oracles) and explicit weighted edges.
#[derive(Debug, Clone)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<(u32, u32, f64)>,
}

impl GraphSpec {
    pub fn build(&self) -> RoadGraph {
        let mut g = RoadGraph::new(true);
        for i in 0..self.n {
            g.add_node(i as f64, 0.0);
        }
        for &(a, b, w) in &self.edges {
            g.add_edge(NodeId(a), NodeId(b), w).unwrap();
        }
        g
    }
}

/// Random directed graph with 2..=`max_nodes` nodes, each ordered pair
/// present with probability `density`, weights uniform in [1, 100).
pub fn random_graph<R: Rng>(rng: &mut R, max_nodes: usize, density: f64) -> GraphSpec {
    let n = rng.gen_range(2..=max_nodes);
    let mut edges = Vec::new();
    for a in 0..n as u32 {
        for b in 0..n as u32 {
            if a != b && rng.gen_bool(density) {
                edges.push((a, b, rng.gen_range(1.0..100.0)));
            }
        }
    }
    GraphSpec { n, edges }
}

/// Minimum left-to-right weight sum over all simple paths from `source`,
/// by exhaustive depth-first enumeration.
pub fn enumerate_distances(g: &RoadGraph, w: &dyn Fn(&Edge) -> f64, source: NodeId) -> Vec<Option<f64>> {
    fn walk(
        g: &RoadGraph,
        w: &dyn Fn(&Edge) -> f64,
        v: NodeId,
        cost: f64,
        on_path: &mut Vec<bool>,
        best: &mut Vec<Option<f64>>,
    ) {
        let slot = &mut best[v.index()];
        if slot.map_or(true, |b| cost < b) {
            *slot = Some(cost);
        }
        for e in g.out_edges(v) {
            if !on_path[e.to.index()] {
                on_path[e.to.index()] = true;
                walk(g, w, e.to, cost + w(e), on_path, best);
                on_path[e.to.index()] = false;
            }
        }
    }
    let mut best = vec![None; g.num_nodes()];
    let mut on_path = vec![false; g.num_nodes()];
    on_path[source.index()] = true;
    walk(g, w, source, 0.0, &mut on_path, &mut best);
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleChoice {
    pub merge_index: usize,
    pub separation_index: usize,
    pub cost: f64,
    pub platoon_distance: f64,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Case C by brute force: every ordered pair of master-route positions,
/// each individual leg solved by exhaustive path enumeration.
pub fn case_c_oracle(
    g: &RoadGraph,
    origin: NodeId,
    destination: NodeId,
    master: &Path,
    params: &CostParams,
) -> Option<OracleChoice> {
    let ctx = TraversalContext::default();
    let ind = |e: &Edge| edge_weight_individual(e, &ctx, params);
    let from_origin = enumerate_distances(g, &ind, origin);
    let mut best: Option<OracleChoice> = None;
    let route = &master.vertices;
    for i in 0..route.len() {
        let Some(pre) = from_origin[route[i].index()] else { continue };
        for j in i + 1..route.len() {
            let Some(post) = enumerate_distances(g, &ind, route[j])[destination.index()] else {
                continue;
            };
            let platoon: f64 = master.edges[i..j]
                .iter()
                .map(|e| edge_weight_platoon(e, &ctx, params))
                .sum();
            let c = OracleChoice {
                merge_index: i,
                separation_index: j,
                cost: pre + platoon + post,
                platoon_distance: master.edges[i..j].iter().map(|e| e.distance).sum(),
            };
            let better = match &best {
                None => true,
                Some(b) if !close(c.cost, b.cost) => c.cost < b.cost,
                Some(b) if !close(c.platoon_distance, b.platoon_distance) => {
                    c.platoon_distance > b.platoon_distance
                }
                Some(_) => false,
            };
            if better {
                best = Some(c);
            }
        }
    }
    best
}
