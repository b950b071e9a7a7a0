use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GraphError, NodeId, RoadGraph};
use crate::road_network::io::NetworkMeta;

/// Attachment edges shorter than this are clamped to it so every weight
/// stays strictly positive.
pub const MIN_EDGE_DISTANCE: f64 = 1.0;

const MAX_GENERATION_ATTEMPTS: u32 = 50;
const MIN_COMPONENT_COVERAGE: f64 = 0.9;

/// Random network parameters. Defaults reproduce the reference simulation
/// setup: a 1000 km square, 100 junctions, 500 candidate roads, 20 % dropout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphGenConfig {
    pub area_x: f64,
    pub area_y: f64,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub dropout_rate: f64,
    pub spawn_circle_diameter: f64,
    pub min_route_length: f64,
    pub seed: u64,
}

impl Default for GraphGenConfig {
    fn default() -> Self {
        GraphGenConfig {
            area_x: 1e6,
            area_y: 1e6,
            num_nodes: 100,
            num_edges: 500,
            dropout_rate: 0.2,
            spawn_circle_diameter: 1e3,
            min_route_length: 5e5,
            seed: 1,
        }
    }
}

impl GraphGenConfig {
    /// Checks the parameters that drive graph generation.
    ///
    /// `min_route_length` is only consumed when destinations are drawn, so an
    /// unreachable minimum is not a generation error.
    pub fn validate(&self) -> Result<(), GraphError> {
        let bad = |msg: String| Err(GraphError::InvalidConfig(msg));
        if !(self.area_x.is_finite() && self.area_x > 0.0 && self.area_y.is_finite() && self.area_y > 0.0)
        {
            return bad(format!(
                "area must be positive, got {} x {}",
                self.area_x, self.area_y
            ));
        }
        if self.num_nodes == 0 {
            return bad("num_nodes must be ≥ 1".into());
        }
        let max_edges = self.num_nodes * (self.num_nodes - 1) / 2;
        if self.num_edges > max_edges {
            return bad(format!(
                "num_edges {} exceeds num_nodes·(num_nodes−1)/2 = {}",
                self.num_edges, max_edges
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad(format!(
                "dropout_rate must lie in [0, 1), got {}",
                self.dropout_rate
            ));
        }
        if !(self.spawn_circle_diameter.is_finite() && self.spawn_circle_diameter >= 0.0) {
            return bad(format!(
                "spawn_circle_diameter must be ≥ 0, got {}",
                self.spawn_circle_diameter
            ));
        }
        if !(self.min_route_length.is_finite() && self.min_route_length >= 0.0) {
            return bad(format!(
                "min_route_length must be ≥ 0, got {}",
                self.min_route_length
            ));
        }
        Ok(())
    }

    pub fn diagonal(&self) -> f64 {
        self.area_x.hypot(self.area_y)
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        (0.0..=self.area_x).contains(&x) && (0.0..=self.area_y).contains(&y)
    }
}

/// Generates a random road network.
///
/// Junctions are sampled uniformly in the area, the complete candidate graph
/// is pruned to the `num_edges` shortest roads, then each surviving road is
/// dropped with probability `dropout_rate`. If the largest strongly connected
/// component covers less than 90 % of the junctions the generator retries
/// with `seed + 1`, up to 50 attempts.
///
/// The stream comes from ChaCha8 seeded with `seed_from_u64(seed)`.
pub fn generate_network(config: &GraphGenConfig) -> Result<RoadGraph, GraphError> {
    config.validate()?;
    let mut seed = config.seed;
    for attempt in 1..=MAX_GENERATION_ATTEMPTS {
        let mut graph = generate_once(config, seed);
        let largest = graph.largest_strong_component().len();
        if largest as f64 >= MIN_COMPONENT_COVERAGE * config.num_nodes as f64 {
            graph.set_meta(Some(NetworkMeta {
                seed,
                requested_seed: config.seed,
                config: Some(config.clone()),
            }));
            return Ok(graph);
        }
        if attempt == MAX_GENERATION_ATTEMPTS {
            break;
        }
        seed = seed.wrapping_add(1);
    }
    Err(GraphError::GenerationFailed {
        last_seed: seed,
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

fn generate_once(config: &GraphGenConfig, seed: u64) -> RoadGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graph = RoadGraph::new(false);
    for _ in 0..config.num_nodes {
        let x = rng.gen::<f64>() * config.area_x;
        let y = rng.gen::<f64>() * config.area_y;
        graph.add_node(x, y);
    }

    let n = config.num_nodes;
    let mut candidates = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            let (a, b) = (NodeId::from_index(a), NodeId::from_index(b));
            candidates.push((graph.euclidean(a, b), a, b));
        }
    }
    candidates.sort_by(|p, q| {
        p.0.total_cmp(&q.0)
            .then(p.1.cmp(&q.1))
            .then(p.2.cmp(&q.2))
    });
    candidates.truncate(config.num_edges);

    for (distance, a, b) in candidates {
        if rng.gen::<f64>() < config.dropout_rate {
            continue;
        }
        // Coincident samples are practically impossible but would break the
        // positive-weight invariant.
        let distance = distance.max(MIN_EDGE_DISTANCE);
        graph
            .add_road(a, b, distance)
            .expect("candidate pairs are unique and in range");
    }
    graph
}

/// Adds a junction at `(x, y)` joined in both directions to its nearest
/// existing junction (lowest id on ties). The connecting distance is clamped
/// to [`MIN_EDGE_DISTANCE`].
///
/// When the graph carries generator metadata the point must lie inside its
/// area.
pub fn attach_spawn_node(graph: &mut RoadGraph, x: f64, y: f64) -> Result<NodeId, GraphError> {
    if graph.num_nodes() == 0 {
        return Err(GraphError::Empty);
    }
    if let Some(cfg) = graph.meta().and_then(|m| m.config.as_ref()) {
        if !cfg.contains_point(x, y) {
            return Err(GraphError::OutsideArea {
                x,
                y,
                area_x: cfg.area_x,
                area_y: cfg.area_y,
            });
        }
    }
    if !(x.is_finite() && y.is_finite()) {
        return Err(GraphError::InvalidConfig(format!(
            "spawn point ({x}, {y}) is not finite"
        )));
    }

    let mut nearest = NodeId(0);
    let mut best = f64::INFINITY;
    for node in graph.nodes() {
        let d = (node.x - x).hypot(node.y - y);
        if d < best {
            best = d;
            nearest = node.id;
        }
    }
    let id = graph.add_node(x, y);
    graph.add_road(nearest, id, best.max(MIN_EDGE_DISTANCE))?;
    Ok(id)
}
