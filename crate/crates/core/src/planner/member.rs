//! Merge/separation point search for one member against a master route.
//!
//! One forward Dijkstra from the member origin and one backward Dijkstra
//! from its destination (on the reversed graph), both under individual
//! weights, give the individual legs of every candidate. Platoon legs come
//! from prefix sums of platoon weights along the master route, so each
//! candidate is scored in O(1).

use super::{PlannerError, PlatoonCase, PlatoonPlan, Role, Vehicle};
use crate::cost_models::{
    edge_weight_platoon, journey_cost, CostParams, FuelRole, IndividualWeight, Leg,
};
use crate::road_network::{NodeId, RoadGraph};
use crate::routing::{dijkstra_with_context, Path, ShortestPathTree, TraversalContext};

/// Relative tolerance under which two candidate costs count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

pub(crate) fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

/// A candidate platoon section, as positions on the master route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub merge_index: usize,
    pub separation_index: usize,
    pub cost: f64,
    /// Metric length of the platoon section.
    pub platoon_distance: f64,
}

/// Selection order: cheapest, then longest platoon, then earliest merge,
/// then earliest separation. Costs and lengths within [`TIE_TOLERANCE`]
/// count as equal.
pub fn better_candidate(a: &Candidate, b: &Candidate) -> bool {
    if !nearly_equal(a.cost, b.cost) {
        return a.cost < b.cost;
    }
    if !nearly_equal(a.platoon_distance, b.platoon_distance) {
        return a.platoon_distance > b.platoon_distance;
    }
    (a.merge_index, a.separation_index) < (b.merge_index, b.separation_index)
}

/// Precomputed individual-leg trees for one member vehicle.
#[derive(Debug, Clone)]
pub struct MemberSearch {
    forward: ShortestPathTree,
    backward: ShortestPathTree,
    /// The member's individual baseline route.
    individual_route: Path,
    start_clock: f64,
}

impl MemberSearch {
    /// `reversed` must be `graph.reversed()`. The trees use the individual
    /// edge weights of `params`; later calls to [`MemberSearch::plan`] may
    /// only change the mixing part of the parameters.
    pub fn new(
        graph: &RoadGraph,
        reversed: &RoadGraph,
        member: &Vehicle,
        individual_route: Path,
        params: &CostParams,
        start_clock: f64,
    ) -> Result<Self, PlannerError> {
        let weights = IndividualWeight(params);
        let ctx = TraversalContext::starting_at(start_clock);
        let forward = dijkstra_with_context(graph, &weights, member.origin, ctx)?;
        let backward = dijkstra_with_context(reversed, &weights, member.destination, ctx)?;
        Ok(MemberSearch {
            forward,
            backward,
            individual_route,
            start_clock,
        })
    }

    pub fn individual_route(&self) -> &Path {
        &self.individual_route
    }

    /// Every feasible candidate for `case`, in (merge, separation) order.
    pub fn candidates(
        &self,
        member: &Vehicle,
        master_route: &Path,
        case: PlatoonCase,
        params: &CostParams,
    ) -> Vec<Candidate> {
        let route = &master_route.vertices;
        let last = route.len() - 1;
        let ctx = TraversalContext::starting_at(self.start_clock);
        let mut cost_prefix = Vec::with_capacity(route.len());
        let mut dist_prefix = Vec::with_capacity(route.len());
        let (mut c, mut d) = (0.0, 0.0);
        cost_prefix.push(c);
        dist_prefix.push(d);
        for e in &master_route.edges {
            c += edge_weight_platoon(e, &ctx, params);
            d += e.distance;
            cost_prefix.push(c);
            dist_prefix.push(d);
        }

        let merge_range = match case {
            PlatoonCase::A | PlatoonCase::C => 0..last,
            PlatoonCase::B => 0..1,
        };
        let mut out = Vec::new();
        if case == PlatoonCase::A && member.destination != master_route.target() {
            return out;
        }
        if case == PlatoonCase::B && member.origin != master_route.source() {
            return out;
        }
        for i in merge_range {
            let to_merge = match case {
                PlatoonCase::B => 0.0,
                _ => match self.forward.distance(route[i]) {
                    Some(v) => v,
                    None => continue,
                },
            };
            let separations = match case {
                PlatoonCase::A => last..=last,
                _ => i + 1..=last,
            };
            for j in separations {
                let from_separation = match case {
                    PlatoonCase::A => 0.0,
                    _ => match self.backward.distance(route[j]) {
                        Some(v) => v,
                        None => continue,
                    },
                };
                out.push(Candidate {
                    merge_index: i,
                    separation_index: j,
                    cost: to_merge + (cost_prefix[j] - cost_prefix[i]) + from_separation,
                    platoon_distance: dist_prefix[j] - dist_prefix[i],
                });
            }
        }
        out
    }

    /// Best plan for `member` against `master_route`.
    pub fn plan(
        &self,
        member: &Vehicle,
        master_route: &Path,
        case: PlatoonCase,
        params: &CostParams,
    ) -> Result<PlatoonPlan, PlannerError> {
        let individual_cost = journey_cost(
            &[Leg::individual(&self.individual_route)],
            params,
            self.start_clock,
        )?;

        let best = self
            .candidates(member, master_route, case, params)
            .into_iter()
            .reduce(|best, c| if better_candidate(&c, &best) { c } else { best });
        let Some(best) = best else {
            return Ok(PlatoonPlan::fallback(
                member.id,
                case,
                self.individual_route.clone(),
                individual_cost,
            ));
        };

        let route = &master_route.vertices;
        let (i, j) = (best.merge_index, best.separation_index);
        let pre = match case {
            PlatoonCase::B => Path::single(member.origin),
            _ => self
                .forward
                .path_to(route[i])
                .expect("candidate merge points are reachable"),
        };
        let post = match case {
            PlatoonCase::A => Path::single(member.destination),
            _ => path_from_reverse_tree(&self.backward, route[j])
                .expect("candidate separation points reach the destination"),
        };
        let platoon = master_route.slice(i, j);
        let joint_cost = journey_cost(
            &[
                Leg::individual(&pre),
                Leg::platoon(&platoon, FuelRole::PlatoonFollow),
                Leg::individual(&post),
            ],
            params,
            self.start_clock,
        )?;

        Ok(PlatoonPlan {
            vehicle: member.id,
            role: Role::Member,
            case,
            merge_point: (case != PlatoonCase::B).then_some(route[i]),
            separation_point: (case != PlatoonCase::A).then_some(route[j]),
            merge_index: Some(i),
            separation_index: Some(j),
            platoon_duration: params.time.driving_time(platoon.distance()),
            adopted: joint_cost.combined <= individual_cost.combined,
            pre_segment: pre,
            platoon_segment: platoon,
            post_segment: post,
            joint_cost,
            individual_cost,
        })
    }
}

/// In a tree grown on the reversed graph, the path from `v` back to the
/// tree's source, in original edge orientation.
fn path_from_reverse_tree(tree: &ShortestPathTree, v: NodeId) -> Option<Path> {
    let total_cost = tree.distance(v)?;
    let mut vertices = vec![v];
    let mut edges = Vec::new();
    let mut cur = v;
    while let Some(e) = tree.predecessor(cur) {
        edges.push(e.reversed());
        cur = e.from;
        vertices.push(cur);
    }
    Some(Path {
        vertices,
        edges,
        total_cost,
    })
}
