//! Shortest-path engines over pluggable, context-aware edge weights.
//!
//! Both engines share one best-first search with lazy deletion. Queue ties
//! are broken by the lowest node id so results are reproducible. Each settled
//! node carries the [`TraversalContext`] of the path that reached it; weights
//! that ignore the context see an ordinary Dijkstra/A*.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::road_network::{Edge, GraphError, NodeId, RoadGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("edge {from} -> {to} produced invalid weight {weight}; weights must be non-negative")]
    NegativeWeight { from: NodeId, to: NodeId, weight: f64 },
    #[error("no route from {origin} to {target}")]
    NoRoute { origin: NodeId, target: NodeId },
    #[error("path is inconsistent with the graph: {0}")]
    Inconsistent(String),
}

/// State threaded along a path while it is being costed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TraversalContext {
    /// Clock time at journey start, seconds after midnight.
    pub start_clock: f64,
    /// Seconds travelled since the journey started.
    pub elapsed: f64,
}

impl TraversalContext {
    pub fn starting_at(start_clock: f64) -> Self {
        TraversalContext {
            start_clock,
            elapsed: 0.0,
        }
    }

    pub fn advanced(self, seconds: f64) -> Self {
        TraversalContext {
            elapsed: self.elapsed + seconds,
            ..self
        }
    }
}

/// Non-negative edge weight `w(u, v)`.
pub trait EdgeWeight {
    fn weight(&self, edge: &Edge, ctx: &TraversalContext) -> f64;

    /// Seconds added to the traversal context by driving `edge`.
    fn traversal_time(&self, _edge: &Edge) -> f64 {
        0.0
    }
}

impl<F> EdgeWeight for F
where
    F: Fn(&Edge, &TraversalContext) -> f64,
{
    fn weight(&self, edge: &Edge, ctx: &TraversalContext) -> f64 {
        self(edge, ctx)
    }
}

/// Plain metric length.
#[derive(Debug, Clone, Copy, Default)]
pub struct DistanceWeight;

impl EdgeWeight for DistanceWeight {
    fn weight(&self, edge: &Edge, _ctx: &TraversalContext) -> f64 {
        edge.distance
    }
}

/// Estimate of the remaining cost from a node to the goal.
pub trait Heuristic {
    fn estimate(&self, node: NodeId, ctx: &TraversalContext) -> f64;
}

impl<F> Heuristic for F
where
    F: Fn(NodeId) -> f64,
{
    fn estimate(&self, node: NodeId, _ctx: &TraversalContext) -> f64 {
        self(node)
    }
}

/// `h ≡ 0`; turns A* into Dijkstra.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroHeuristic;

impl Heuristic for ZeroHeuristic {
    fn estimate(&self, _node: NodeId, _ctx: &TraversalContext) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub vertices: Vec<NodeId>,
    pub edges: Vec<Edge>,
    pub total_cost: f64,
}

impl Path {
    pub fn single(v: NodeId) -> Self {
        Path {
            vertices: vec![v],
            edges: Vec::new(),
            total_cost: 0.0,
        }
    }

    pub fn source(&self) -> NodeId {
        self.vertices[0]
    }

    pub fn target(&self) -> NodeId {
        *self.vertices.last().expect("paths hold at least one vertex")
    }

    /// Total metric length in meters.
    pub fn distance(&self) -> f64 {
        self.edges.iter().map(|e| e.distance).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// The sub-path between vertex positions `from..=to`, with `total_cost`
    /// left at zero.
    pub fn slice(&self, from: usize, to: usize) -> Path {
        assert!(from <= to && to < self.vertices.len());
        Path {
            vertices: self.vertices[from..=to].to_vec(),
            edges: self.edges[from..to].to_vec(),
            total_cost: 0.0,
        }
    }

    /// Checks that vertices and edges chain together.
    pub fn check_chain(&self) -> Result<(), RoutingError> {
        if self.vertices.is_empty() {
            return Err(RoutingError::Inconsistent("path has no vertices".into()));
        }
        if self.edges.len() + 1 != self.vertices.len() {
            return Err(RoutingError::Inconsistent(format!(
                "{} vertices but {} edges",
                self.vertices.len(),
                self.edges.len()
            )));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.from != self.vertices[i] || e.to != self.vertices[i + 1] {
                return Err(RoutingError::Inconsistent(format!(
                    "edge {i} ({} -> {}) does not join vertices {} and {}",
                    e.from,
                    e.to,
                    self.vertices[i],
                    self.vertices[i + 1]
                )));
            }
        }
        Ok(())
    }
}

/// Single-source result: distances and one optimal predecessor per node.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    pub source: NodeId,
    dist: Vec<f64>,
    pred: Vec<Option<Edge>>,
    ctx: Vec<TraversalContext>,
}

impl ShortestPathTree {
    /// `None` marks an unreachable node.
    pub fn distance(&self, v: NodeId) -> Option<f64> {
        let d = *self.dist.get(v.index())?;
        d.is_finite().then_some(d)
    }

    pub fn predecessor(&self, v: NodeId) -> Option<&Edge> {
        self.pred.get(v.index())?.as_ref()
    }

    pub fn context(&self, v: NodeId) -> Option<&TraversalContext> {
        self.distance(v)?;
        self.ctx.get(v.index())
    }

    pub fn path_to(&self, target: NodeId) -> Option<Path> {
        let total_cost = self.distance(target)?;
        let mut edges = Vec::new();
        let mut v = target;
        while let Some(e) = self.pred[v.index()] {
            edges.push(e);
            v = e.from;
        }
        edges.reverse();
        let mut vertices = Vec::with_capacity(edges.len() + 1);
        vertices.push(self.source);
        vertices.extend(edges.iter().map(|e| e.to));
        Some(Path {
            vertices,
            edges,
            total_cost,
        })
    }
}

/// Path returned by A* plus the number of node expansions it needed.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub path: Path,
    pub expanded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueEntry {
    priority: f64,
    cost: f64,
    node: NodeId,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on priority, then lowest node id.
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct SearchRun {
    tree: ShortestPathTree,
    expanded: usize,
    reached_target: bool,
}

/// Best-first search on `f = g + h`. A node whose `g` improves after it was
/// expanded is queued again, so inconsistent heuristics still terminate with
/// a valid (not necessarily optimal) path.
fn best_first<W, H>(
    graph: &RoadGraph,
    weights: &W,
    heuristic: &H,
    source: NodeId,
    target: Option<NodeId>,
    start: TraversalContext,
) -> Result<SearchRun, RoutingError>
where
    W: EdgeWeight + ?Sized,
    H: Heuristic + ?Sized,
{
    graph.check_node(source)?;
    if let Some(t) = target {
        graph.check_node(t)?;
    }
    let n = graph.num_nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<Edge>> = vec![None; n];
    let mut ctx = vec![start; n];
    let mut heap = BinaryHeap::new();
    let mut expanded = 0;
    let mut reached_target = false;

    dist[source.index()] = 0.0;
    heap.push(QueueEntry {
        priority: heuristic.estimate(source, &start),
        cost: 0.0,
        node: source,
    });

    while let Some(QueueEntry { cost, node: u, .. }) = heap.pop() {
        if cost > dist[u.index()] {
            continue;
        }
        if Some(u) == target {
            reached_target = true;
            break;
        }
        expanded += 1;
        let here = ctx[u.index()];
        for edge in graph.out_edges(u) {
            let w = weights.weight(edge, &here);
            if !(w >= 0.0) {
                return Err(RoutingError::NegativeWeight {
                    from: edge.from,
                    to: edge.to,
                    weight: w,
                });
            }
            let candidate = cost + w;
            let v = edge.to.index();
            if candidate < dist[v] {
                dist[v] = candidate;
                pred[v] = Some(*edge);
                ctx[v] = here.advanced(weights.traversal_time(edge));
                heap.push(QueueEntry {
                    priority: candidate + heuristic.estimate(edge.to, &ctx[v]),
                    cost: candidate,
                    node: edge.to,
                });
            }
        }
    }

    Ok(SearchRun {
        tree: ShortestPathTree {
            source,
            dist,
            pred,
            ctx,
        },
        expanded,
        reached_target,
    })
}

/// Full single-source Dijkstra.
pub fn dijkstra<W>(graph: &RoadGraph, weights: &W, source: NodeId) -> Result<ShortestPathTree, RoutingError>
where
    W: EdgeWeight + ?Sized,
{
    dijkstra_with_context(graph, weights, source, TraversalContext::default())
}

pub fn dijkstra_with_context<W>(
    graph: &RoadGraph,
    weights: &W,
    source: NodeId,
    start: TraversalContext,
) -> Result<ShortestPathTree, RoutingError>
where
    W: EdgeWeight + ?Sized,
{
    Ok(best_first(graph, weights, &ZeroHeuristic, source, None, start)?.tree)
}

/// Dijkstra with early exit once `target` is settled.
pub fn shortest_path<W>(
    graph: &RoadGraph,
    weights: &W,
    source: NodeId,
    target: NodeId,
) -> Result<Path, RoutingError>
where
    W: EdgeWeight + ?Sized,
{
    Ok(a_star(graph, weights, &ZeroHeuristic, source, target)?.path)
}

pub fn a_star<W, H>(
    graph: &RoadGraph,
    weights: &W,
    heuristic: &H,
    source: NodeId,
    target: NodeId,
) -> Result<SearchOutcome, RoutingError>
where
    W: EdgeWeight + ?Sized,
    H: Heuristic + ?Sized,
{
    a_star_with_context(
        graph,
        weights,
        heuristic,
        source,
        target,
        TraversalContext::default(),
    )
}

pub fn a_star_with_context<W, H>(
    graph: &RoadGraph,
    weights: &W,
    heuristic: &H,
    source: NodeId,
    target: NodeId,
    start: TraversalContext,
) -> Result<SearchOutcome, RoutingError>
where
    W: EdgeWeight + ?Sized,
    H: Heuristic + ?Sized,
{
    let run = best_first(graph, weights, heuristic, source, Some(target), start)?;
    if !run.reached_target {
        return Err(RoutingError::NoRoute { origin: source, target });
    }
    let path = run
        .tree
        .path_to(target)
        .expect("settled target has a distance");
    Ok(SearchOutcome {
        path,
        expanded: run.expanded,
    })
}

/// Sum of edge weights along `path`, evaluated in traversal order.
pub fn path_cost<W>(graph: &RoadGraph, path: &Path, weights: &W) -> Result<f64, RoutingError>
where
    W: EdgeWeight + ?Sized,
{
    path_cost_with_context(graph, path, weights, TraversalContext::default())
}

pub fn path_cost_with_context<W>(
    graph: &RoadGraph,
    path: &Path,
    weights: &W,
    start: TraversalContext,
) -> Result<f64, RoutingError>
where
    W: EdgeWeight + ?Sized,
{
    path.check_chain()?;
    let mut ctx = start;
    let mut total = 0.0;
    for edge in &path.edges {
        let stored = graph.find_edge(edge.from, edge.to).ok_or_else(|| {
            RoutingError::Inconsistent(format!("edge {} -> {} is not in the graph", edge.from, edge.to))
        })?;
        let w = weights.weight(stored, &ctx);
        if !(w >= 0.0) {
            return Err(RoutingError::NegativeWeight {
                from: edge.from,
                to: edge.to,
                weight: w,
            });
        }
        total += w;
        ctx = ctx.advanced(weights.traversal_time(stored));
    }
    Ok(total)
}
