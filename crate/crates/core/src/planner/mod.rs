//! Centralized joint route optimization.
//!
//! Every vehicle is first routed on its own. The vehicle with the longest
//! individual route becomes the master and its route the reference for the
//! network. Each member then searches the master route for the merge point
//! (MP) and/or separation point (SP) that minimizes its journey cost, and
//! adopts the platoon plan only if it is not more expensive than driving
//! alone.

mod database;
mod member;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::database::{Registration, RouteDatabase};
pub use self::member::{better_candidate, Candidate, MemberSearch, TIE_TOLERANCE};
use crate::cost_models::{
    journey_cost, travel_time_individual, CostBreakdown, CostError, CostParams, FatigueHeuristic,
    FuelRole, IndividualWeight, Leg,
};
use crate::road_network::{NodeId, RoadGraph};
use crate::routing::{a_star_with_context, shortest_path, Path, RoutingError, TraversalContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("at least one vehicle is required")]
    NoVehicles,
    #[error("vehicles reference unknown node ids: {}", join_ids(.0))]
    UnknownNodes(Vec<NodeId>),
    #[error("vehicle {0} appears more than once")]
    DuplicateVehicle(VehicleId),
    #[error("vehicle {0} has identical origin and destination")]
    SameOriginDestination(VehicleId),
    #[error("vehicle {vehicle}: invalid driving profile: {message}")]
    InvalidProfile { vehicle: VehicleId, message: String },
    #[error("no vehicle has an individual route")]
    NoRoutableVehicle,
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

fn join_ids(ids: &[NodeId]) -> String {
    ids.iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct VehicleId(pub u32);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Driver preferences submitted to the planner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrivingProfile {
    /// m/s
    pub max_speed: f64,
    /// m/s
    pub avg_speed: f64,
    /// s
    pub max_consecutive_driving: f64,
    /// Departure clock time, seconds after midnight. Falls back to the
    /// schedule's default journey start.
    pub journey_start: Option<f64>,
}

impl Default for DrivingProfile {
    fn default() -> Self {
        DrivingProfile {
            max_speed: 110.0 / 3.6,
            avg_speed: 110.0 / 3.6,
            max_consecutive_driving: 32_400.0,
            journey_start: None,
        }
    }
}

impl DrivingProfile {
    fn validate(&self, vehicle: VehicleId, params: &CostParams) -> Result<(), PlannerError> {
        let fail = |message: String| Err(PlannerError::InvalidProfile { vehicle, message });
        if !(self.max_speed > 0.0 && self.avg_speed > 0.0) {
            return fail("speeds must be positive".into());
        }
        if self.avg_speed > self.max_speed {
            return fail(format!(
                "avg_speed {} exceeds max_speed {}",
                self.avg_speed, self.max_speed
            ));
        }
        if !(0.0..=params.time.driving_limit).contains(&self.max_consecutive_driving) {
            return fail(format!(
                "max_consecutive_driving {} exceeds the regulatory limit {}",
                self.max_consecutive_driving, params.time.driving_limit
            ));
        }
        if let Some(t) = self.journey_start {
            if !(0.0..crate::cost_models::SECONDS_PER_DAY).contains(&t) {
                return fail(format!("journey_start {t} is not a clock time"));
            }
        }
        Ok(())
    }

    pub fn start_clock(&self, params: &CostParams) -> f64 {
        self.journey_start
            .unwrap_or(params.schedule.journey_start)
    }
}

/// What a vehicle submits to the planner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleRequest {
    pub id: VehicleId,
    pub origin: NodeId,
    pub destination: NodeId,
    #[serde(default)]
    pub profile: DrivingProfile,
}

/// A vehicle together with its individual route estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: VehicleId,
    pub origin: NodeId,
    pub destination: NodeId,
    pub profile: DrivingProfile,
    pub estimate: Path,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PlatoonCase {
    /// Merge, then platoon to the shared destination.
    A,
    /// Start together, then separate.
    B,
    /// Merge, platoon, separate.
    #[default]
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Master,
    Member,
}

/// How individual routes are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerMode {
    /// Dijkstra under individual edge weights.
    #[default]
    Dijkstra,
    /// A* with the inflated fatigue heuristic for member routes.
    AstarFatigue,
}

impl PlannerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PlannerMode::Dijkstra => "dijkstra",
            PlannerMode::AstarFatigue => "astar_fatigue",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlannerOptions {
    pub mode: PlannerMode,
    pub case: PlatoonCase,
}

/// A vehicle's route split into individual and platoon pieces.
///
/// `pre_segment`, `platoon_segment` and `post_segment` concatenate into a
/// walk from origin to destination. Case A plans have no separation point,
/// Case B plans no merge point. A plan without any feasible candidate falls
/// back to the individual route (`pre_segment`) with neither point set.
///
/// For the master, the platoon segment spans from the earliest merge to the
/// latest separation among adopting members; `platoon_duration` counts only
/// the stretches actually shared with at least one member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatoonPlan {
    pub vehicle: VehicleId,
    pub role: Role,
    pub case: PlatoonCase,
    pub merge_point: Option<NodeId>,
    pub separation_point: Option<NodeId>,
    /// Position of the merge on the master route.
    pub merge_index: Option<usize>,
    /// Position of the separation on the master route.
    pub separation_index: Option<usize>,
    pub pre_segment: Path,
    pub platoon_segment: Path,
    pub post_segment: Path,
    /// Seconds spent in the platoon.
    pub platoon_duration: f64,
    pub joint_cost: CostBreakdown,
    pub individual_cost: CostBreakdown,
    pub adopted: bool,
}

impl PlatoonPlan {
    fn fallback(vehicle: VehicleId, case: PlatoonCase, route: Path, cost: CostBreakdown) -> Self {
        let end = route.target();
        PlatoonPlan {
            vehicle,
            role: Role::Member,
            case,
            merge_point: None,
            separation_point: None,
            merge_index: None,
            separation_index: None,
            pre_segment: route,
            platoon_segment: Path::single(end),
            post_segment: Path::single(end),
            platoon_duration: 0.0,
            joint_cost: cost,
            individual_cost: cost,
            adopted: false,
        }
    }

    /// Cost the vehicle actually incurs: the joint plan if adopted, its
    /// individual route otherwise.
    pub fn effective_cost(&self) -> &CostBreakdown {
        if self.adopted {
            &self.joint_cost
        } else {
            &self.individual_cost
        }
    }

    pub fn is_fallback(&self) -> bool {
        self.merge_index.is_none() && self.separation_index.is_none()
    }

    /// Vertices of the whole journey, without repeating the junction shared
    /// by consecutive segments.
    pub fn walk(&self) -> Vec<NodeId> {
        let mut out = self.pre_segment.vertices.clone();
        for seg in [&self.platoon_segment, &self.post_segment] {
            out.extend_from_slice(&seg.vertices[1..]);
        }
        out
    }
}

/// Master: the longest individual estimate, lowest id on ties.
pub fn select_master(vehicles: &[Vehicle]) -> Result<&Vehicle, PlannerError> {
    vehicles
        .iter()
        .reduce(|best, v| {
            let (d, bd) = (v.estimate.distance(), best.estimate.distance());
            if d > bd || (d == bd && v.id < best.id) {
                v
            } else {
                best
            }
        })
        .ok_or(PlannerError::NoVehicles)
}

/// Plans one member against a master route. Runs its own Dijkstra searches;
/// use [`PreparedNetwork`] when planning many parameter sets.
pub fn plan_member_route(
    graph: &RoadGraph,
    member: &Vehicle,
    master_route: &Path,
    case: PlatoonCase,
    params: &CostParams,
) -> Result<PlatoonPlan, PlannerError> {
    let reversed = graph.reversed();
    let search = MemberSearch::new(
        graph,
        &reversed,
        member,
        member.estimate.clone(),
        params,
        member.profile.start_clock(params),
    )?;
    search.plan(member, master_route, case, params)
}

/// Per-vehicle planning result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum VehicleOutcome {
    Planned(PlatoonPlan),
    Failed { vehicle: VehicleId, error: String },
}

impl VehicleOutcome {
    pub fn plan(&self) -> Option<&PlatoonPlan> {
        match self {
            VehicleOutcome::Planned(p) => Some(p),
            VehicleOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkPlan {
    pub master: VehicleId,
    /// One entry per requested vehicle, in request order.
    pub outcomes: Vec<VehicleOutcome>,
}

impl NetworkPlan {
    pub fn plans(&self) -> impl Iterator<Item = &PlatoonPlan> + '_ {
        self.outcomes.iter().filter_map(VehicleOutcome::plan)
    }

    pub fn members(&self) -> impl Iterator<Item = &PlatoonPlan> + '_ {
        self.plans().filter(|p| p.role == Role::Member)
    }
}

struct PreparedMember {
    vehicle: Vehicle,
    search: MemberSearch,
}

enum Slot {
    Master,
    Member(usize),
    Failed(VehicleId, String),
}

/// Everything about a network that does not depend on the mixing rates:
/// individual routes, the master, and each member's search trees.
pub struct PreparedNetwork {
    options: PlannerOptions,
    master: Vehicle,
    members: Vec<PreparedMember>,
    slots: Vec<Slot>,
}

impl PreparedNetwork {
    pub fn new(
        graph: &RoadGraph,
        requests: &[VehicleRequest],
        params: &CostParams,
        options: PlannerOptions,
    ) -> Result<Self, PlannerError> {
        validate_requests(graph, requests, params)?;
        let weights = IndividualWeight(params);

        let mut estimates: Vec<Result<Vehicle, String>> = Vec::with_capacity(requests.len());
        for r in requests {
            let estimate = match shortest_path(graph, &weights, r.origin, r.destination) {
                Ok(p) => Ok(Vehicle {
                    id: r.id,
                    origin: r.origin,
                    destination: r.destination,
                    profile: r.profile.clone(),
                    estimate: p,
                }),
                Err(e @ RoutingError::NoRoute { .. }) => Err(e.to_string()),
                Err(e) => return Err(e.into()),
            };
            estimates.push(estimate);
        }

        let routable: Vec<Vehicle> = estimates.iter().filter_map(|e| e.as_ref().ok().cloned()).collect();
        let master = select_master(&routable)
            .map_err(|_| PlannerError::NoRoutableVehicle)?
            .clone();
        let mut database = RouteDatabase::new();
        database.register_route(&master);
        let master_cost = travel_time_individual(
            &master.estimate.edges.iter().map(|e| e.distance).collect::<Vec<_>>(),
            &params.time,
        );

        let reversed = graph.reversed();
        let mut members = Vec::new();
        let mut slots = Vec::with_capacity(requests.len());
        for (request, estimate) in requests.iter().zip(estimates) {
            let vehicle = match estimate {
                Err(msg) => {
                    slots.push(Slot::Failed(request.id, msg));
                    continue;
                }
                Ok(v) if v.id == master.id => {
                    slots.push(Slot::Master);
                    continue;
                }
                Ok(v) => v,
            };
            let start_clock = vehicle.profile.start_clock(params);
            let individual_route = match options.mode {
                PlannerMode::Dijkstra => vehicle.estimate.clone(),
                PlannerMode::AstarFatigue => {
                    let heuristic = FatigueHeuristic {
                        graph,
                        target: vehicle.destination,
                        master_cost,
                        params,
                    };
                    a_star_with_context(
                        graph,
                        &weights,
                        &heuristic,
                        vehicle.origin,
                        vehicle.destination,
                        TraversalContext::starting_at(start_clock),
                    )?
                    .path
                }
            };
            let search = MemberSearch::new(graph, &reversed, &vehicle, individual_route, params, start_clock)?;
            slots.push(Slot::Member(members.len()));
            members.push(PreparedMember { vehicle, search });
        }

        Ok(PreparedNetwork {
            options,
            master,
            members,
            slots,
        })
    }

    pub fn master(&self) -> &Vehicle {
        &self.master
    }

    /// Plans every vehicle for the given parameters. Only the mixing part of
    /// `params` may differ from the one used in [`PreparedNetwork::new`].
    pub fn plan(&self, params: &CostParams) -> Result<NetworkPlan, PlannerError> {
        let master_route = &self.master.estimate;
        let member_plans = self
            .members
            .iter()
            .map(|m| m.search.plan(&m.vehicle, master_route, self.options.case, params))
            .collect::<Result<Vec<_>, _>>()?;
        let master_plan = plan_master(&self.master, &member_plans, self.options.case, params)?;

        let mut master_plan = Some(master_plan);
        let mut member_plans: Vec<Option<PlatoonPlan>> = member_plans.into_iter().map(Some).collect();
        let outcomes = self
            .slots
            .iter()
            .map(|slot| match slot {
                Slot::Master => VehicleOutcome::Planned(master_plan.take().expect("one master")),
                Slot::Member(i) => {
                    VehicleOutcome::Planned(member_plans[*i].take().expect("each member once"))
                }
                Slot::Failed(id, msg) => VehicleOutcome::Failed {
                    vehicle: *id,
                    error: msg.clone(),
                },
            })
            .collect();
        Ok(NetworkPlan {
            master: self.master.id,
            outcomes,
        })
    }
}

fn validate_requests(graph: &RoadGraph, requests: &[VehicleRequest], params: &CostParams) -> Result<(), PlannerError> {
    if requests.is_empty() {
        return Err(PlannerError::NoVehicles);
    }
    params.validate()?;
    let unknown: BTreeSet<NodeId> = requests
        .iter()
        .flat_map(|r| [r.origin, r.destination])
        .filter(|id| !graph.contains(*id))
        .collect();
    if !unknown.is_empty() {
        return Err(PlannerError::UnknownNodes(unknown.into_iter().collect()));
    }
    let mut seen = BTreeSet::new();
    for r in requests {
        if !seen.insert(r.id) {
            return Err(PlannerError::DuplicateVehicle(r.id));
        }
        if r.origin == r.destination {
            return Err(PlannerError::SameOriginDestination(r.id));
        }
        r.profile.validate(r.id, params)?;
    }
    Ok(())
}

/// The master keeps its individual route and leads the platoon on every
/// stretch shared with at least one adopting member.
fn plan_master(
    master: &Vehicle,
    members: &[PlatoonPlan],
    case: PlatoonCase,
    params: &CostParams,
) -> Result<PlatoonPlan, PlannerError> {
    let route = &master.estimate;
    let num_edges = route.edges.len();
    let mut covered = vec![false; num_edges];
    for plan in members.iter().filter(|p| p.adopted) {
        if let (Some(i), Some(j)) = (plan.merge_index, plan.separation_index) {
            covered[i..j].iter_mut().for_each(|c| *c = true);
        }
    }

    let start_clock = master.profile.start_clock(params);
    let individual_cost = journey_cost(&[Leg::individual(route)], params, start_clock)?;

    let mut pieces: Vec<(bool, Path)> = Vec::new();
    let mut run_start = 0;
    for e in 1..=num_edges {
        if e == num_edges || covered[e] != covered[run_start] {
            pieces.push((covered[run_start], route.slice(run_start, e)));
            run_start = e;
        }
    }
    let legs: Vec<Leg<'_>> = pieces
        .iter()
        .map(|(shared, p)| {
            if *shared {
                Leg::platoon(p, FuelRole::PlatoonLead)
            } else {
                Leg::individual(p)
            }
        })
        .collect();
    let joint_cost = journey_cost(&legs, params, start_clock)?;

    let first = covered.iter().position(|&c| c);
    let last = covered.iter().rposition(|&c| c).map(|e| e + 1);
    let shared_distance: f64 = route
        .edges
        .iter()
        .zip(&covered)
        .filter(|(_, &c)| c)
        .map(|(e, _)| e.distance)
        .sum();

    let (pre, platoon, post, mp, sp) = match (first, last) {
        (Some(i), Some(j)) => (
            route.slice(0, i),
            route.slice(i, j),
            route.slice(j, num_edges),
            Some(i),
            Some(j),
        ),
        _ => (
            route.clone(),
            Path::single(route.target()),
            Path::single(route.target()),
            None,
            None,
        ),
    };
    Ok(PlatoonPlan {
        vehicle: master.id,
        role: Role::Master,
        case,
        merge_point: mp.map(|i| route.vertices[i]),
        separation_point: sp.map(|j| route.vertices[j]),
        merge_index: mp,
        separation_index: sp,
        pre_segment: pre,
        platoon_segment: platoon,
        post_segment: post,
        platoon_duration: params.time.driving_time(shared_distance),
        joint_cost,
        individual_cost,
        adopted: true,
    })
}

/// Plans a whole network: individual routes, master selection, then every
/// member against the master route.
pub fn plan_network(
    graph: &RoadGraph,
    requests: &[VehicleRequest],
    params: &CostParams,
    options: PlannerOptions,
) -> Result<NetworkPlan, PlannerError> {
    PreparedNetwork::new(graph, requests, params, options)?.plan(params)
}
