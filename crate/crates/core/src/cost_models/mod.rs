//! Travel-time, fuel and fatigue costs, and the edge weights built from them.
//!
//! Every cost term is rescaled to meters so it can be mixed with the edge
//! length. With the default scaling each term equals the edge length for
//! nominal individual driving, so an individual edge weighs `3·d`.

mod fatigue;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::fatigue::{
    fatigue_components, fatigue_total, split_driving_time, DayPhaseSchedule, FatigueCoefficients,
    FatigueComponents, PhaseSplit, SECONDS_PER_DAY,
};
use crate::road_network::{Edge, NodeId, RoadGraph};
use crate::routing::{EdgeWeight, Heuristic, Path, RoutingError, TraversalContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("invalid cost parameter `{field}`: {message}")]
    InvalidParam { field: &'static str, message: String },
    #[error("journey legs are not contiguous: leg {index} starts at {found}, previous leg ended at {expected}")]
    Discontiguous {
        index: usize,
        expected: NodeId,
        found: NodeId,
    },
    #[error(transparent)]
    Path(#[from] RoutingError),
}

/// Cruise speed and the consecutive-driving regulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeParams {
    /// Constant speed, m/s (110 km/h).
    pub cruise_speed: f64,
    /// Consecutive driving limit, s (9 h).
    pub driving_limit: f64,
    /// Mandatory rest per driving limit, s (45 min).
    pub rest_time: f64,
}

impl Default for TimeParams {
    fn default() -> Self {
        TimeParams {
            cruise_speed: 110.0 / 3.6,
            driving_limit: 32_400.0,
            rest_time: 2_700.0,
        }
    }
}

impl TimeParams {
    /// `1 + T_r / T_EU`: rest time spread proportionally over distance.
    pub fn rest_factor(&self) -> f64 {
        1.0 + self.rest_time / self.driving_limit
    }

    /// Pure driving seconds for `distance` meters.
    pub fn driving_time(&self, distance: f64) -> f64 {
        distance / self.cruise_speed
    }
}

/// Fuel model: consumption proportional to distance, reduced inside a
/// platoon depending on position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuelParams {
    /// Liters per meter. 0.30 L/km is a heavy-vehicle scale assumption.
    pub base_consumption: f64,
    pub lead_saving: f64,
    pub follow_saving: f64,
}

impl Default for FuelParams {
    fn default() -> Self {
        FuelParams {
            base_consumption: 3.0e-4,
            lead_saving: 0.03,
            follow_saving: 0.18,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuelRole {
    Individual,
    PlatoonLead,
    PlatoonFollow,
}

/// How the mixing rates `tau`/`xi` enter the platoon edge weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MixingSemantics {
    /// Rates multiply the platoon time and fuel terms.
    #[default]
    Literal,
    /// Rates are gains: the terms are multiplied by `1 − rate`.
    Gain,
}

impl MixingSemantics {
    pub fn as_str(self) -> &'static str {
        match self {
            MixingSemantics::Literal => "literal",
            MixingSemantics::Gain => "gain",
        }
    }
}

/// Mixing rates, rescaling coefficients and the heuristic inflation factor.
/// A `None` coefficient resolves to the value that makes its term equal the
/// edge length for nominal driving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixingAndScaling {
    pub tau: f64,
    pub xi: f64,
    pub semantics: MixingSemantics,
    pub kappa_time_individual: Option<f64>,
    pub kappa_time_platoon: Option<f64>,
    pub kappa_fuel_individual: Option<f64>,
    pub kappa_fuel_platoon: Option<f64>,
    pub heuristic_inflation: f64,
}

impl Default for MixingAndScaling {
    fn default() -> Self {
        MixingAndScaling {
            tau: 1.0,
            xi: 0.18,
            semantics: MixingSemantics::Literal,
            kappa_time_individual: None,
            kappa_time_platoon: None,
            kappa_fuel_individual: None,
            kappa_fuel_platoon: None,
            heuristic_inflation: 96.06,
        }
    }
}

/// Everything the cost functions need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    pub time: TimeParams,
    pub fuel: FuelParams,
    pub fatigue: FatigueCoefficients,
    pub schedule: DayPhaseSchedule,
    pub mixing: MixingAndScaling,
}

impl CostParams {
    pub fn with_mixing(&self, tau: f64, xi: f64, semantics: MixingSemantics) -> CostParams {
        let mut p = self.clone();
        p.mixing.tau = tau;
        p.mixing.xi = xi;
        p.mixing.semantics = semantics;
        p
    }

    pub fn kappa_time_individual(&self) -> f64 {
        self.mixing
            .kappa_time_individual
            .unwrap_or_else(|| self.time.cruise_speed / self.time.rest_factor())
    }

    pub fn kappa_time_platoon(&self) -> f64 {
        self.mixing
            .kappa_time_platoon
            .unwrap_or(self.time.cruise_speed)
    }

    pub fn kappa_fuel_individual(&self) -> f64 {
        self.mixing
            .kappa_fuel_individual
            .unwrap_or(1.0 / self.fuel.base_consumption)
    }

    pub fn kappa_fuel_platoon(&self) -> f64 {
        self.mixing
            .kappa_fuel_platoon
            .unwrap_or(1.0 / self.fuel.base_consumption)
    }

    pub fn validate(&self) -> Result<(), CostError> {
        fn check(ok: bool, field: &'static str, message: String) -> Result<(), CostError> {
            if ok {
                Ok(())
            } else {
                Err(CostError::InvalidParam { field, message })
            }
        }
        let t = &self.time;
        check(
            t.cruise_speed.is_finite() && t.cruise_speed > 0.0,
            "time.cruise_speed",
            format!("must be > 0, got {}", t.cruise_speed),
        )?;
        check(
            t.driving_limit.is_finite() && t.driving_limit > 0.0,
            "time.driving_limit",
            format!("must be > 0, got {}", t.driving_limit),
        )?;
        check(
            0.0 <= t.rest_time && t.rest_time < t.driving_limit,
            "time.rest_time",
            format!("must lie in [0, driving_limit), got {}", t.rest_time),
        )?;
        let f = &self.fuel;
        check(
            f.base_consumption.is_finite() && f.base_consumption > 0.0,
            "fuel.base_consumption",
            format!("must be > 0, got {}", f.base_consumption),
        )?;
        for (field, saving) in [
            ("fuel.lead_saving", f.lead_saving),
            ("fuel.follow_saving", f.follow_saving),
        ] {
            check(
                (0.03..=0.18).contains(&saving),
                field,
                format!("must lie in [0.03, 0.18], got {saving}"),
            )?;
        }
        check(
            self.fatigue.epsilon.iter().all(|e| e.is_finite() && *e > 0.0),
            "fatigue.epsilon",
            "all widths must be > 0".into(),
        )?;
        check(
            self.schedule.is_valid(),
            "schedule",
            "phase starts must satisfy 0 ≤ morning < afternoon < night < 86400 and journey_start must lie within the day".into(),
        )?;
        let m = &self.mixing;
        check(
            (0.0..=1.0).contains(&m.tau),
            "mixing.tau",
            format!("must lie in [0, 1], got {}", m.tau),
        )?;
        check(
            (0.0..=1.0).contains(&m.xi),
            "mixing.xi",
            format!("must lie in [0, 1], got {}", m.xi),
        )?;
        for (field, kappa) in [
            ("mixing.kappa_time_individual", m.kappa_time_individual),
            ("mixing.kappa_time_platoon", m.kappa_time_platoon),
            ("mixing.kappa_fuel_individual", m.kappa_fuel_individual),
            ("mixing.kappa_fuel_platoon", m.kappa_fuel_platoon),
        ] {
            if let Some(k) = kappa {
                check(k.is_finite() && k >= 0.0, field, format!("must be ≥ 0, got {k}"))?;
            }
        }
        check(
            m.heuristic_inflation.is_finite() && m.heuristic_inflation >= 0.0,
            "mixing.heuristic_inflation",
            format!("must be ≥ 0, got {}", m.heuristic_inflation),
        )
    }
}

/// Travel time of a vehicle driving alone, rest time included.
pub fn travel_time_individual(distances: &[f64], time: &TimeParams) -> f64 {
    let factor = time.rest_factor();
    distances
        .iter()
        .map(|d| d / time.cruise_speed * factor)
        .sum()
}

/// Travel time of a platoon member; no rest is required.
pub fn travel_time_platoon(distances: &[f64], time: &TimeParams) -> f64 {
    distances.iter().map(|d| d / time.cruise_speed).sum()
}

/// Liters burnt over `distance` meters in the given role.
pub fn fuel_cost(distance: f64, role: FuelRole, fuel: &FuelParams) -> f64 {
    let base = fuel.base_consumption * distance;
    match role {
        FuelRole::Individual => base,
        FuelRole::PlatoonLead => base * (1.0 - fuel.lead_saving),
        FuelRole::PlatoonFollow => base * (1.0 - fuel.follow_saving),
    }
}

/// `φ · C_master · F`.
pub fn inflated_fatigue_estimate(inflation: f64, master_cost: f64, fatigue: f64) -> f64 {
    inflation * master_cost * fatigue
}

/// Fatigue heuristic for A*. The journey duration is approximated by the
/// time already driven plus `remaining_distance` at cruise speed, split into
/// day phases from the journey start clock.
pub fn fatigue_heuristic(
    remaining_distance: f64,
    ctx: &TraversalContext,
    master_cost: f64,
    params: &CostParams,
) -> f64 {
    let duration = ctx.elapsed + params.time.driving_time(remaining_distance);
    let split = split_driving_time(ctx.start_clock, duration, &params.schedule);
    let fatigue = fatigue_total(&split, &params.fatigue);
    inflated_fatigue_estimate(params.mixing.heuristic_inflation, master_cost, fatigue)
}

/// Individual edge weight: `d + κ_T·C_T + κ_FC·C_FC` with rest-inflated time.
pub fn edge_weight_individual(edge: &Edge, _ctx: &TraversalContext, params: &CostParams) -> f64 {
    let d = edge.distance;
    let m = &params.mixing;
    let time = rescaled(m.kappa_time_individual, d, || {
        params.kappa_time_individual() * (d / params.time.cruise_speed * params.time.rest_factor())
    });
    let fuel = rescaled(m.kappa_fuel_individual, d, || {
        params.kappa_fuel_individual() * fuel_cost(d, FuelRole::Individual, &params.fuel)
    });
    d + time + fuel
}

/// Platoon edge weight. The fuel term uses baseline consumption; the mixing
/// rate `xi` carries the platoon saving.
pub fn edge_weight_platoon(edge: &Edge, _ctx: &TraversalContext, params: &CostParams) -> f64 {
    let d = edge.distance;
    let m = &params.mixing;
    let (time_mix, fuel_mix) = match m.semantics {
        MixingSemantics::Literal => (m.tau, m.xi),
        MixingSemantics::Gain => (1.0 - m.tau, 1.0 - m.xi),
    };
    let time = rescaled(m.kappa_time_platoon, d, || {
        params.kappa_time_platoon() * (d / params.time.cruise_speed)
    });
    let fuel = rescaled(m.kappa_fuel_platoon, d, || {
        params.kappa_fuel_platoon() * fuel_cost(d, FuelRole::Individual, &params.fuel)
    });
    d + time_mix * time + fuel_mix * fuel
}

/// A term under its default coefficient equals the edge length by
/// construction; return it exactly so weight comparisons are not blurred by
/// rounding.
#[inline]
fn rescaled(kappa: Option<f64>, distance: f64, explicit: impl FnOnce() -> f64) -> f64 {
    match kappa {
        None => distance,
        Some(_) => explicit(),
    }
}

/// [`edge_weight_individual`] as a routing weight.
#[derive(Debug, Clone, Copy)]
pub struct IndividualWeight<'a>(pub &'a CostParams);

impl EdgeWeight for IndividualWeight<'_> {
    fn weight(&self, edge: &Edge, ctx: &TraversalContext) -> f64 {
        edge_weight_individual(edge, ctx, self.0)
    }

    fn traversal_time(&self, edge: &Edge) -> f64 {
        self.0.time.driving_time(edge.distance)
    }
}

/// [`edge_weight_platoon`] as a routing weight.
#[derive(Debug, Clone, Copy)]
pub struct PlatoonWeight<'a>(pub &'a CostParams);

impl EdgeWeight for PlatoonWeight<'_> {
    fn weight(&self, edge: &Edge, ctx: &TraversalContext) -> f64 {
        edge_weight_platoon(edge, ctx, self.0)
    }

    fn traversal_time(&self, edge: &Edge) -> f64 {
        self.0.time.driving_time(edge.distance)
    }
}

/// Inflated fatigue heuristic towards a fixed target; the remaining distance
/// is the straight-line distance to it.
#[derive(Debug, Clone, Copy)]
pub struct FatigueHeuristic<'a> {
    pub graph: &'a RoadGraph,
    pub target: NodeId,
    /// Travel time of the master vehicle's individual route, seconds.
    pub master_cost: f64,
    pub params: &'a CostParams,
}

impl Heuristic for FatigueHeuristic<'_> {
    fn estimate(&self, node: NodeId, ctx: &TraversalContext) -> f64 {
        let remaining = self.graph.euclidean(node, self.target);
        fatigue_heuristic(remaining, ctx, self.master_cost, self.params)
    }
}

/// Per-journey cost totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Meters.
    pub distance: f64,
    /// Seconds.
    pub time_cost: f64,
    /// Liters.
    pub fuel_cost: f64,
    /// Dimensionless fatigue of the driving done outside the platoon.
    pub fatigue: f64,
    /// Meters-equivalent sum of the mixed edge weights.
    pub combined: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegKind {
    Individual,
    Platoon(FuelRole),
}

/// One piece of a journey, in traversal order.
#[derive(Debug, Clone, Copy)]
pub struct Leg<'a> {
    pub kind: LegKind,
    pub path: &'a Path,
}

impl<'a> Leg<'a> {
    pub fn individual(path: &'a Path) -> Self {
        Leg {
            kind: LegKind::Individual,
            path,
        }
    }

    pub fn platoon(path: &'a Path, role: FuelRole) -> Self {
        Leg {
            kind: LegKind::Platoon(role),
            path,
        }
    }
}

/// Aggregates a journey made of individual and platoon legs.
///
/// `combined` sums individual weights over individual legs and platoon
/// weights over platoon legs, in traversal order. Fatigue only accrues while
/// driving individually; platoon legs advance the clock without adding
/// driving time. Empty legs are allowed.
pub fn journey_cost(legs: &[Leg<'_>], params: &CostParams, start_clock: f64) -> Result<CostBreakdown, CostError> {
    let mut out = CostBreakdown::default();
    let mut ctx = TraversalContext::starting_at(start_clock);
    let mut driving = PhaseSplit::default();
    let rest_factor = params.time.rest_factor();
    let mut previous_end: Option<NodeId> = None;

    for (index, leg) in legs.iter().enumerate() {
        leg.path.check_chain()?;
        if let Some(expected) = previous_end {
            if leg.path.source() != expected {
                return Err(CostError::Discontiguous {
                    index,
                    expected,
                    found: leg.path.source(),
                });
            }
        }
        previous_end = Some(leg.path.target());

        for edge in &leg.path.edges {
            let d = edge.distance;
            let drive = params.time.driving_time(d);
            out.distance += d;
            match leg.kind {
                LegKind::Individual => {
                    out.time_cost += drive * rest_factor;
                    out.fuel_cost += fuel_cost(d, FuelRole::Individual, &params.fuel);
                    out.combined += edge_weight_individual(edge, &ctx, params);
                    driving.accumulate(start_clock + ctx.elapsed, drive, &params.schedule);
                }
                LegKind::Platoon(role) => {
                    out.time_cost += drive;
                    out.fuel_cost += fuel_cost(d, role, &params.fuel);
                    out.combined += edge_weight_platoon(edge, &ctx, params);
                }
            }
            ctx = ctx.advanced(drive);
        }
    }
    out.fatigue = fatigue_total(&driving, &params.fatigue);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn edge(d: f64) -> Edge {
        Edge {
            from: NodeId(0),
            to: NodeId(1),
            distance: d,
        }
    }

    const CTX: TraversalContext = TraversalContext {
        start_clock: 0.0,
        elapsed: 0.0,
    };

    #[test]
    fn travel_time_examples() {
        let t = TimeParams::default();
        assert!(rel(travel_time_individual(&[110_000.0], &t), 3900.0) < 1e-12);
        assert!(rel(travel_time_platoon(&[110_000.0], &t), 3600.0) < 1e-12);
        assert_eq!(travel_time_individual(&[], &t), 0.0);
        assert_eq!(travel_time_platoon(&[], &t), 0.0);
        let ds = [1234.5, 99.0, 5e4];
        let doubled: Vec<f64> = ds.iter().map(|d| 2.0 * d).collect();
        assert!(rel(travel_time_platoon(&doubled, &t), 2.0 * travel_time_platoon(&ds, &t)) < 1e-12);
        assert!(
            rel(
                travel_time_individual(&ds, &t) / travel_time_platoon(&ds, &t),
                13.0 / 12.0
            ) < 1e-12
        );
    }

    #[test]
    fn fuel_examples() {
        let f = FuelParams::default();
        for role in [FuelRole::Individual, FuelRole::PlatoonLead, FuelRole::PlatoonFollow] {
            assert_eq!(fuel_cost(0.0, role, &f), 0.0);
        }
        assert!(rel(fuel_cost(100_000.0, FuelRole::PlatoonFollow, &f), 24.6) < 1e-12);
        let lead = fuel_cost(1e5, FuelRole::PlatoonLead, &f);
        assert!(fuel_cost(1e5, FuelRole::PlatoonFollow, &f) < lead);
        assert!(lead < fuel_cost(1e5, FuelRole::Individual, &f));
    }

    #[test]
    fn default_individual_weight_is_three_times_distance() {
        let p = CostParams::default();
        for d in [1.0, 500.0, 123_456.7] {
            assert!(rel(edge_weight_individual(&edge(d), &CTX, &p), 3.0 * d) < 1e-12);
        }
        let mut zero = p.clone();
        zero.mixing.kappa_time_individual = Some(0.0);
        zero.mixing.kappa_fuel_individual = Some(0.0);
        assert_eq!(edge_weight_individual(&edge(42.0), &CTX, &zero), 42.0);
        assert!(
            edge_weight_individual(&edge(10.0), &CTX, &p) < edge_weight_individual(&edge(10.5), &CTX, &p)
        );
    }

    #[test]
    fn literal_platoon_weight_examples() {
        let p = CostParams::default();
        let zero = p.with_mixing(0.0, 0.0, MixingSemantics::Literal);
        assert_eq!(edge_weight_platoon(&edge(77.0), &CTX, &zero), 77.0);
        let full = p.with_mixing(1.0, 1.0, MixingSemantics::Literal);
        assert!(rel(edge_weight_platoon(&edge(77.0), &CTX, &full), 231.0) < 1e-12);
        let gain_none = p.with_mixing(0.0, 0.0, MixingSemantics::Gain);
        assert!(rel(edge_weight_platoon(&edge(77.0), &CTX, &gain_none), 231.0) < 1e-12);
        let paper_point = p.with_mixing(1.0, 0.18, MixingSemantics::Literal);
        assert!(rel(edge_weight_platoon(&edge(100.0), &CTX, &paper_point), 218.0) < 1e-12);
    }

    #[test]
    fn heuristic_examples() {
        let p = CostParams::default();
        let ctx = TraversalContext::starting_at(8.0 * 3600.0);
        assert_eq!(fatigue_heuristic(1e5, &ctx, 0.0, &p), 0.0);
        assert_eq!(inflated_fatigue_estimate(96.06, 1.0, 1.0), 96.06);
        let ctx = ctx.advanced(5000.0);
        let split = split_driving_time(ctx.start_clock, 5000.0, &p.schedule);
        let expected = 96.06 * 2.0 * fatigue_total(&split, &p.fatigue);
        assert_eq!(fatigue_heuristic(0.0, &ctx, 2.0, &p), expected);
        assert!(fatigue_heuristic(3e5, &ctx, 2.0, &p) >= 0.0);
    }

    fn chain(ids: &[u32], d: f64) -> Path {
        let vertices: Vec<NodeId> = ids.iter().map(|&i| NodeId(i)).collect();
        let edges = vertices
            .windows(2)
            .map(|w| Edge {
                from: w[0],
                to: w[1],
                distance: d,
            })
            .collect();
        Path {
            vertices,
            edges,
            total_cost: 0.0,
        }
    }

    #[test]
    fn journey_with_only_one_kind_of_leg() {
        let p = CostParams::default();
        let path = chain(&[0, 1, 2], 1000.0);
        let ind = journey_cost(&[Leg::individual(&path)], &p, 0.0).unwrap();
        assert!(rel(ind.combined, 6000.0) < 1e-12);
        let plat = journey_cost(&[Leg::platoon(&path, FuelRole::PlatoonFollow)], &p, 0.0).unwrap();
        assert!(rel(plat.combined, 2.0 * 1000.0 * 2.18) < 1e-12);
        // No individual driving, so fatigue is the all-zero evaluation.
        assert_eq!(plat.fatigue, fatigue_total(&PhaseSplit::default(), &p.fatigue));
        assert_eq!(journey_cost(&[], &p, 0.0).unwrap(), CostBreakdown {
            fatigue: fatigue_total(&PhaseSplit::default(), &p.fatigue),
            ..CostBreakdown::default()
        });
    }

    #[test]
    fn discontiguous_legs_are_rejected() {
        let p = CostParams::default();
        let a = chain(&[0, 1], 10.0);
        let b = chain(&[2, 3], 10.0);
        assert!(matches!(
            journey_cost(&[Leg::individual(&a), Leg::individual(&b)], &p, 0.0),
            Err(CostError::Discontiguous { index: 1, .. })
        ));
    }

    #[test]
    fn validation_catches_out_of_range_values() {
        let mut p = CostParams::default();
        assert!(p.validate().is_ok());
        p.mixing.tau = 1.5;
        assert!(p.validate().is_err());
        let mut p = CostParams::default();
        p.time.rest_time = p.time.driving_limit;
        assert!(p.validate().is_err());
        let mut p = CostParams::default();
        p.fuel.follow_saving = 0.5;
        assert!(p.validate().is_err());
        let mut p = CostParams::default();
        p.fatigue.epsilon[3] = 0.0;
        assert!(p.validate().is_err());
    }
}
