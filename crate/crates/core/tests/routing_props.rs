mod common;

use common::{enumerate_distances, GraphSpec};
use platoon_core::road_network::{Edge, NodeId};
use platoon_core::routing::{a_star, dijkstra, shortest_path, DistanceWeight, TraversalContext, ZeroHeuristic};
use proptest::prelude::*;

fn graph_spec(max_nodes: usize) -> impl Strategy<Value = GraphSpec> {
    (2..=max_nodes).prop_flat_map(|n| {
        let pairs: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|a| (0..n as u32).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        let m = pairs.len();
        proptest::collection::vec((any::<bool>(), 0.5f64..1000.0), m).prop_map(move |picks| GraphSpec {
            n,
            edges: pairs
                .iter()
                .zip(picks)
                .filter(|(_, (keep, _))| *keep)
                .map(|(&(a, b), (_, w))| (a, b, w))
                .collect(),
        })
    })
}

/// Integer-valued weights, so scaling by an integer stays exact.
fn integer_graph_spec(max_nodes: usize) -> impl Strategy<Value = GraphSpec> {
    graph_spec(max_nodes).prop_map(|mut g| {
        for e in &mut g.edges {
            e.2 = e.2.ceil();
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dijkstra_matches_path_enumeration(spec in graph_spec(8), s in 0u32..8) {
        let g = spec.build();
        let s = NodeId(s % spec.n as u32);
        let tree = dijkstra(&g, &DistanceWeight, s).unwrap();
        let oracle = enumerate_distances(&g, &|e: &Edge| e.distance, s);
        for v in g.node_ids() {
            prop_assert_eq!(tree.distance(v), oracle[v.index()]);
        }
    }

    #[test]
    fn zero_heuristic_a_star_is_dijkstra(spec in graph_spec(10), s in 0u32..10, t in 0u32..10) {
        let g = spec.build();
        let (s, t) = (NodeId(s % spec.n as u32), NodeId(t % spec.n as u32));
        let tree = dijkstra(&g, &DistanceWeight, s).unwrap();
        match a_star(&g, &DistanceWeight, &ZeroHeuristic, s, t) {
            Ok(out) => {
                prop_assert_eq!(Some(out.path.total_cost), tree.distance(t));
                prop_assert_eq!(out.path.source(), s);
                prop_assert_eq!(out.path.target(), t);
            }
            Err(_) => prop_assert_eq!(tree.distance(t), None),
        }
    }

    #[test]
    fn admissible_heuristic_keeps_optimal_cost(spec in graph_spec(10), s in 0u32..10, t in 0u32..10) {
        let g = spec.build();
        let (s, t) = (NodeId(s % spec.n as u32), NodeId(t % spec.n as u32));
        // Exact remaining distance on the reversed graph: admissible and consistent.
        let reversed = g.reversed();
        let to_t = dijkstra(&reversed, &DistanceWeight, t).unwrap();
        let h = |v: NodeId| to_t.distance(v).unwrap_or(0.0);
        let tree = dijkstra(&g, &DistanceWeight, s).unwrap();
        if let Some(d) = tree.distance(t) {
            let out = a_star(&g, &DistanceWeight, &h, s, t).unwrap();
            prop_assert!((out.path.total_cost - d).abs() <= 1e-9 * d.max(1.0));
            let plain = a_star(&g, &DistanceWeight, &ZeroHeuristic, s, t).unwrap();
            prop_assert!(out.expanded <= plain.expanded);
        }
    }

    #[test]
    fn prefixes_of_shortest_paths_are_shortest(spec in graph_spec(10), s in 0u32..10, t in 0u32..10) {
        let g = spec.build();
        let (s, t) = (NodeId(s % spec.n as u32), NodeId(t % spec.n as u32));
        let tree = dijkstra(&g, &DistanceWeight, s).unwrap();
        if let Ok(p) = shortest_path(&g, &DistanceWeight, s, t) {
            let mut acc = 0.0;
            for (k, e) in p.edges.iter().enumerate() {
                acc += e.distance;
                prop_assert_eq!(tree.distance(p.vertices[k + 1]), Some(acc));
            }
        }
    }

    #[test]
    fn adding_an_edge_never_lengthens_routes(spec in graph_spec(8), s in 0u32..8, extra in (0u32..8, 0u32..8, 0.5f64..1000.0)) {
        let g = spec.build();
        let s = NodeId(s % spec.n as u32);
        let (a, b) = (NodeId(extra.0 % spec.n as u32), NodeId(extra.1 % spec.n as u32));
        prop_assume!(a != b && g.find_edge(a, b).is_none());
        let mut bigger = g.clone();
        bigger.add_edge(a, b, extra.2).unwrap();
        let before = dijkstra(&g, &DistanceWeight, s).unwrap();
        let after = dijkstra(&bigger, &DistanceWeight, s).unwrap();
        for v in g.node_ids() {
            if let Some(d) = before.distance(v) {
                prop_assert!(after.distance(v).unwrap() <= d);
            }
        }
    }

    #[test]
    fn scaling_weights_keeps_the_argmin(spec in integer_graph_spec(10), s in 0u32..10, t in 0u32..10, c in 1u32..50) {
        let g = spec.build();
        let (s, t) = (NodeId(s % spec.n as u32), NodeId(t % spec.n as u32));
        let scaled = |e: &Edge, _: &TraversalContext| c as f64 * e.distance;
        match shortest_path(&g, &DistanceWeight, s, t) {
            Ok(p) => {
                let q = shortest_path(&g, &scaled, s, t).unwrap();
                prop_assert_eq!(p.vertices, q.vertices);
                prop_assert_eq!(q.total_cost, c as f64 * p.total_cost);
            }
            Err(_) => prop_assert!(shortest_path(&g, &scaled, s, t).is_err()),
        }
    }
}
