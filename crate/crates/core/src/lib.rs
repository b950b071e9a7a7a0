//! Cooperative platoon route planning.
//!
//! * [`road_network`]: geometric road graphs, random generation, JSON I/O.
//! * [`routing`]: Dijkstra and A* over context-aware edge weights.
//! * [`cost_models`]: travel time, fuel, fatigue and the mixed edge weights.
//! * [`planner`]: master selection and merge/separation point search.
//! * [`simulation`]: seeded Monte Carlo sweeps over the mixing rates.

pub mod cost_models;
pub mod planner;
pub mod road_network;
pub mod routing;
pub mod simulation;
