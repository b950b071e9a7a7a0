//! Monte Carlo sweeps over the platoon mixing rates.
//!
//! Each iteration generates a fresh network, spawns one anchor vehicle on a
//! random junction and the remaining vehicles in a small circle around it,
//! draws a distant destination for every vehicle and plans the network at
//! every grid point. Iterations run in parallel and are reduced in iteration
//! order, so reports do not depend on the worker count.

use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost_models::{CostBreakdown, CostParams, MixingSemantics};
use crate::planner::{
    DrivingProfile, PlannerError, PlannerMode, PlannerOptions, PreparedNetwork, Role,
    VehicleId, VehicleOutcome, VehicleRequest,
};
use crate::road_network::{attach_spawn_node, generate_network, GraphError, GraphGenConfig, NodeId};
use crate::routing::{dijkstra, DistanceWeight};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("iteration with seed {seed}: {source}")]
    Planner {
        seed: u64,
        #[source]
        source: PlannerError,
    },
    #[error("all {iterations} iterations were skipped")]
    AllSkipped { iterations: usize },
    #[error("cannot start worker pool: {0}")]
    ThreadPool(String),
}

/// Grid point at which involvement is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    pub tau: f64,
    pub xi: f64,
    pub semantics: MixingSemantics,
}

impl Default for GridPoint {
    fn default() -> Self {
        GridPoint {
            tau: 1.0,
            xi: 0.18,
            semantics: MixingSemantics::Literal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub graph_gen: GraphGenConfig,
    pub num_vehicles: usize,
    pub iterations: usize,
    pub tau_grid: Vec<f64>,
    pub xi_grid: Vec<f64>,
    pub semantics: Vec<MixingSemantics>,
    pub planner_mode: PlannerMode,
    pub involvement_point: GridPoint,
    pub base_seed: u64,
    /// Resampling budget per destination.
    pub destination_attempts: usize,
    pub params: CostParams,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            graph_gen: GraphGenConfig::default(),
            num_vehicles: 10,
            iterations: 100,
            tau_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            xi_grid: vec![0.0, 0.03, 0.06, 0.09, 0.12, 0.15, 0.18],
            semantics: vec![MixingSemantics::Literal, MixingSemantics::Gain],
            planner_mode: PlannerMode::Dijkstra,
            involvement_point: GridPoint::default(),
            base_seed: 1,
            destination_attempts: 100,
            params: CostParams::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: String| Err(SimulationError::InvalidConfig(m));
        self.graph_gen.validate()?;
        self.params
            .validate()
            .map_err(|e| SimulationError::InvalidConfig(e.to_string()))?;
        if self.num_vehicles == 0 {
            return bad("num_vehicles must be ≥ 1".into());
        }
        if self.iterations == 0 {
            return bad("iterations must be ≥ 1".into());
        }
        if self.destination_attempts == 0 {
            return bad("destination_attempts must be ≥ 1".into());
        }
        for (name, grid) in [("tau_grid", &self.tau_grid), ("xi_grid", &self.xi_grid)] {
            if grid.is_empty() {
                return bad(format!("{name} is empty"));
            }
            if let Some(v) = grid.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return bad(format!("{name} value {v} is outside [0, 1]"));
            }
        }
        if self.semantics.is_empty() {
            return bad("semantics list is empty".into());
        }
        let p = self.involvement_point;
        if !(0.0..=1.0).contains(&p.tau) || !(0.0..=1.0).contains(&p.xi) {
            return bad(format!("involvement point ({}, {}) is outside [0, 1]", p.tau, p.xi));
        }
        Ok(())
    }

    /// Every planned grid point: the full grid for each semantics, then the
    /// involvement point if it is not already on the grid.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &semantics in &self.semantics {
            for &tau in &self.tau_grid {
                for &xi in &self.xi_grid {
                    out.push(GridPoint { tau, xi, semantics });
                }
            }
        }
        if !out.contains(&self.involvement_point) {
            out.push(self.involvement_point);
        }
        out
    }

    /// Per-iteration seeds, drawn from `base_seed`.
    pub fn iteration_seeds(&self) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        (0..self.iterations).map(|_| rng.next_u64()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSetup {
    pub id: VehicleId,
    pub origin: NodeId,
    pub destination: NodeId,
    /// Whether the origin is a node attached inside the spawn circle.
    pub spawned: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleCost {
    pub vehicle: VehicleId,
    pub role: Role,
    pub individual: CostBreakdown,
    pub joint: CostBreakdown,
    pub adopted: bool,
}

impl VehicleCost {
    /// What the vehicle actually pays: its joint cost if it adopted the
    /// plan, otherwise its individual cost.
    pub fn effective(&self) -> &CostBreakdown {
        if self.adopted {
            &self.joint
        } else {
            &self.individual
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub point: GridPoint,
    pub vehicles: Vec<VehicleCost>,
    /// Mean combined individual cost over all vehicles, meters.
    pub mean_individual: f64,
    /// Mean combined effective cost over all vehicles, meters.
    pub mean_joint: f64,
    pub adopted_members: usize,
    pub members: usize,
}

impl PointResult {
    pub fn involvement_pct(&self) -> f64 {
        if self.members == 0 {
            0.0
        } else {
            100.0 * self.adopted_members as f64 / self.members as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub iteration: usize,
    pub seed: u64,
    /// Seed the network was finally generated with.
    pub network_seed: u64,
    pub master: VehicleId,
    pub vehicles: Vec<VehicleSetup>,
    pub points: Vec<PointResult>,
}

impl IterationResult {
    pub fn point(&self, p: &GridPoint) -> Option<&PointResult> {
        self.points.iter().find(|r| r.point == *p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedIteration {
    pub iteration: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IterationOutcome {
    Completed(IterationResult),
    Skipped(SkippedIteration),
}

/// Runs one Monte Carlo iteration.
pub fn run_iteration(
    config: &SimulationConfig,
    iteration: usize,
    seed: u64,
) -> Result<IterationOutcome, SimulationError> {
    let skip = |reason: String| {
        Ok(IterationOutcome::Skipped(SkippedIteration {
            iteration,
            seed,
            reason,
        }))
    };

    let mut graph = generate_network(&GraphGenConfig {
        seed,
        ..config.graph_gen.clone()
    })?;
    let network_seed = graph.meta().map_or(seed, |m| m.seed);
    let original_nodes = graph.num_nodes();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);

    let component = graph.largest_strong_component();
    let anchor = component[rng.gen_range(0..component.len())];
    let center = graph.node(anchor);
    let (cx, cy) = (center.x, center.y);
    let radius = config.graph_gen.spawn_circle_diameter / 2.0;
    let gen = &config.graph_gen;

    let mut origins = vec![(anchor, false)];
    for _ in 1..config.num_vehicles {
        let angle = rng.gen::<f64>() * TAU;
        let r = radius * rng.gen::<f64>().sqrt();
        let x = (cx + r * angle.cos()).clamp(0.0, gen.area_x);
        let y = (cy + r * angle.sin()).clamp(0.0, gen.area_y);
        origins.push((attach_spawn_node(&mut graph, x, y)?, true));
    }

    let mut vehicles = Vec::with_capacity(origins.len());
    for (k, &(origin, spawned)) in origins.iter().enumerate() {
        let tree = dijkstra(&graph, &DistanceWeight, origin).map_err(|e| SimulationError::Planner {
            seed,
            source: e.into(),
        })?;
        let destination = (0..config.destination_attempts).find_map(|_| {
            let candidate = NodeId(rng.gen_range(0..original_nodes as u32));
            tree.distance(candidate)
                .filter(|&d| d >= gen.min_route_length)
                .map(|_| candidate)
        });
        let Some(destination) = destination else {
            return skip(format!(
                "vehicle {k}: no destination at least {} m away after {} draws",
                gen.min_route_length, config.destination_attempts
            ));
        };
        vehicles.push(VehicleSetup {
            id: VehicleId(k as u32),
            origin,
            destination,
            spawned,
        });
    }

    let requests: Vec<VehicleRequest> = vehicles
        .iter()
        .map(|v| VehicleRequest {
            id: v.id,
            origin: v.origin,
            destination: v.destination,
            profile: DrivingProfile::default(),
        })
        .collect();
    let planner_err = |source| SimulationError::Planner { seed, source };
    let options = PlannerOptions {
        mode: config.planner_mode,
        ..PlannerOptions::default()
    };
    let prepared = PreparedNetwork::new(&graph, &requests, &config.params, options).map_err(planner_err)?;

    let mut points = Vec::new();
    for point in config.grid_points() {
        let params = config
            .params
            .with_mixing(point.tau, point.xi, point.semantics);
        let plan = prepared.plan(&params).map_err(planner_err)?;
        let mut costs = Vec::with_capacity(plan.outcomes.len());
        for outcome in &plan.outcomes {
            match outcome {
                VehicleOutcome::Planned(p) => costs.push(VehicleCost {
                    vehicle: p.vehicle,
                    role: p.role,
                    individual: p.individual_cost,
                    joint: p.joint_cost,
                    adopted: p.adopted,
                }),
                VehicleOutcome::Failed { vehicle, error } => {
                    return skip(format!("vehicle {vehicle} could not be planned: {error}"));
                }
            }
        }
        points.push(summarize_point(point, costs));
    }

    Ok(IterationOutcome::Completed(IterationResult {
        iteration,
        seed,
        network_seed,
        master: prepared.master().id,
        vehicles,
        points,
    }))
}

fn summarize_point(point: GridPoint, vehicles: Vec<VehicleCost>) -> PointResult {
    let n = vehicles.len() as f64;
    let mean_individual = vehicles.iter().map(|v| v.individual.combined).sum::<f64>() / n;
    let mean_joint = vehicles.iter().map(|v| v.effective().combined).sum::<f64>() / n;
    let members: Vec<_> = vehicles.iter().filter(|v| v.role == Role::Member).collect();
    PointResult {
        point,
        mean_individual,
        mean_joint,
        adopted_members: members.iter().filter(|v| v.adopted).count(),
        members: members.len(),
        vehicles,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvolvementEntry {
    pub iteration: usize,
    pub seed: u64,
    pub involvement_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvolvementSeries {
    pub entries: Vec<InvolvementEntry>,
    pub mean_pct: f64,
}

/// Share of members adopting their plan at `point`, per iteration.
pub fn compute_involvement(results: &[IterationResult], point: &GridPoint) -> InvolvementSeries {
    let entries: Vec<InvolvementEntry> = results
        .iter()
        .filter_map(|r| {
            r.point(point).map(|p| InvolvementEntry {
                iteration: r.iteration,
                seed: r.seed,
                involvement_pct: p.involvement_pct(),
            })
        })
        .collect();
    let mean_pct = if entries.is_empty() {
        0.0
    } else {
        entries.iter().map(|e| e.involvement_pct).sum::<f64>() / entries.len() as f64
    };
    InvolvementSeries { entries, mean_pct }
}

/// One cell of the cost surface, averaged over completed iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub tau: f64,
    pub xi: f64,
    pub semantics: MixingSemantics,
    pub mean_individual_km: f64,
    pub mean_joint_km: f64,
    pub improvement_pct: f64,
    pub involvement_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SimulationConfig,
    pub seeds: Vec<u64>,
    pub completed: usize,
    pub skipped: Vec<SkippedIteration>,
    /// Grid cells in configuration order: semantics, then tau, then xi.
    pub surface: Vec<SurfacePoint>,
    pub involvement: InvolvementSeries,
    #[serde(skip)]
    pub iterations: Vec<IterationResult>,
}

impl SweepReport {
    pub fn surface_point(&self, point: &GridPoint) -> Option<&SurfacePoint> {
        self.surface
            .iter()
            .find(|s| s.tau == point.tau && s.xi == point.xi && s.semantics == point.semantics)
    }
}

/// Runs every iteration on the global worker pool.
pub fn run_sweep(config: &SimulationConfig) -> Result<SweepReport, SimulationError> {
    config.validate()?;
    let seeds = config.iteration_seeds();
    let outcomes = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| run_iteration(config, i, seed))
        .collect::<Result<Vec<_>, _>>()?;
    reduce(config, seeds, outcomes)
}

/// Runs the sweep on a dedicated pool of `jobs` workers; 0 picks the number
/// of available cores.
pub fn run_sweep_with_jobs(config: &SimulationConfig, jobs: usize) -> Result<SweepReport, SimulationError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| SimulationError::ThreadPool(e.to_string()))?;
    pool.install(|| run_sweep(config))
}

fn reduce(
    config: &SimulationConfig,
    seeds: Vec<u64>,
    outcomes: Vec<IterationOutcome>,
) -> Result<SweepReport, SimulationError> {
    let mut iterations = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            IterationOutcome::Completed(r) => iterations.push(r),
            IterationOutcome::Skipped(s) => skipped.push(s),
        }
    }
    if iterations.is_empty() {
        return Err(SimulationError::AllSkipped {
            iterations: config.iterations,
        });
    }

    let n = iterations.len() as f64;
    let grid = config.grid_points();
    let surface = grid
        .iter()
        .filter(|p| config.semantics.contains(&p.semantics) && config.tau_grid.contains(&p.tau) && config.xi_grid.contains(&p.xi))
        .map(|p| {
            let cells: Vec<&PointResult> = iterations.iter().filter_map(|r| r.point(p)).collect();
            let individual = cells.iter().map(|c| c.mean_individual).sum::<f64>() / n;
            let joint = cells.iter().map(|c| c.mean_joint).sum::<f64>() / n;
            let involvement = cells.iter().map(|c| c.involvement_pct()).sum::<f64>() / n;
            SurfacePoint {
                tau: p.tau,
                xi: p.xi,
                semantics: p.semantics,
                mean_individual_km: individual / 1000.0,
                mean_joint_km: joint / 1000.0,
                improvement_pct: 100.0 * (1.0 - joint / individual),
                involvement_pct: involvement,
            }
        })
        .collect();
    let involvement = compute_involvement(&iterations, &config.involvement_point);

    Ok(SweepReport {
        config: config.clone(),
        seeds,
        completed: iterations.len(),
        skipped,
        surface,
        involvement,
        iterations,
    })
}
