use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use platoon_core::cost_models::{CostBreakdown, CostParams, MixingSemantics};
use platoon_core::planner::{
    plan_network, PlannerMode, PlannerOptions, PlatoonCase, Role, VehicleId, VehicleOutcome,
    VehicleRequest,
};
use platoon_core::road_network::{generate_network, load_network, save_network, GraphGenConfig, NodeId};
use platoon_core::simulation::{run_sweep_with_jobs, SimulationConfig, SimulationError, SweepReport};

/// Largest fuel mixing rate produced by `--grid`, matching the follower
/// saving upper bound.
const GRID_XI_MAX: f64 = 0.18;

#[derive(Parser, Debug)]
#[command(name = "platoon", version, about = "Joint route planning for truck platoons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random road network.
    GenNetwork(GenNetworkArgs),
    /// Plan one set of vehicles on a network.
    Plan(PlanArgs),
    /// Run a Monte Carlo sweep over the mixing rates.
    Sweep(SweepArgs),
    /// Summarize a sweep's summary.json as text.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct GenNetworkArgs {
    /// JSON generator config. Missing fields use the reference simulation
    /// setup: 1e6 x 1e6 m area, 100 nodes, 500 edges, dropout 0.2, spawn
    /// circle diameter 1e3 m, minimum route length 5e5 m.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generator seed [default: config seed, else 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Number of junctions [default: 100].
    #[arg(long)]
    nodes: Option<usize>,
    /// Number of candidate roads kept before dropout [default: 500].
    #[arg(long)]
    edges: Option<usize>,
    /// Probability of dropping each kept road, in [0, 1) [default: 0.2].
    #[arg(long)]
    dropout: Option<f64>,
    /// Output network file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Dijkstra under individual edge weights.
    Dijkstra,
    /// A* with the inflated fatigue heuristic (inflation 96.06) for member routes.
    AstarFatigue,
}

impl From<ModeArg> for PlannerMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Dijkstra => PlannerMode::Dijkstra,
            ModeArg::AstarFatigue => PlannerMode::AstarFatigue,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CaseArg {
    A,
    B,
    C,
}

impl From<CaseArg> for PlatoonCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::A => PlatoonCase::A,
            CaseArg::B => PlatoonCase::B,
            CaseArg::C => PlatoonCase::C,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SemanticsArg {
    /// Rates multiply the platoon cost terms.
    Literal,
    /// Rates are gains: terms are multiplied by one minus the rate.
    Gain,
    Both,
}

impl SemanticsArg {
    fn modes(self) -> Vec<MixingSemantics> {
        match self {
            SemanticsArg::Literal => vec![MixingSemantics::Literal],
            SemanticsArg::Gain => vec![MixingSemantics::Gain],
            SemanticsArg::Both => vec![MixingSemantics::Literal, MixingSemantics::Gain],
        }
    }
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Network file written by gen-network.
    #[arg(long)]
    network: PathBuf,
    /// JSON list of vehicles: [{"id", "origin", "destination", "profile"?}].
    #[arg(long)]
    vehicles: PathBuf,
    /// JSON cost parameters. Missing fields use the defaults: 110 km/h
    /// cruise speed, 32400 s driving limit, 2700 s rest, 3e-4 L/m base
    /// fuel, 3 % lead and 18 % follower saving, tau 1.0, xi 0.18, literal
    /// mixing, heuristic inflation 96.06.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dijkstra")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "c")]
    case: CaseArg,
    /// Output report file [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// JSON simulation config. Missing fields use the reference simulation
    /// setup: 10 vehicles, 100 iterations, tau grid 0..1 step 0.25, xi grid
    /// 0..0.18 step 0.03, both semantics, Dijkstra mode, involvement measured
    /// at tau 1.0 / xi 0.18 literal, base seed 1.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory receiving surface.csv, involvement.csv and summary.json.
    #[arg(long)]
    out_dir: PathBuf,
    /// Monte Carlo iterations [default: 100].
    #[arg(long)]
    iterations: Option<usize>,
    /// Vehicles per network [default: 10].
    #[arg(long)]
    vehicles: Option<usize>,
    /// Evenly spaced NxM grid: N tau values over [0, 1] and M xi values over
    /// [0, 0.18]; a single value means 0.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Explicit comma-separated tau values; overrides --grid.
    #[arg(long, value_delimiter = ',')]
    tau: Option<Vec<f64>>,
    /// Explicit comma-separated xi values; overrides --grid.
    #[arg(long, value_delimiter = ',')]
    xi: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    semantics: Option<SemanticsArg>,
    /// Base seed for all iterations [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// summary.json written by sweep.
    #[arg(long)]
    summary: PathBuf,
    /// Output text file [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (n, m) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .ok()
            .filter(|&k| k >= 1)
            .ok_or_else(|| format!("grid sizes must be positive integers, got {s:?}"))
    };
    Ok((parse(n)?, parse(m)?))
}

fn linspace(n: usize, max: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64 * max).collect()
}

/// Usage and configuration problems exit with 1, runtime failures with 2.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

trait FailureExt<T> {
    fn config(self) -> std::result::Result<T, Failure>;
    fn runtime(self) -> std::result::Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> FailureExt<T> for std::result::Result<T, E> {
    fn config(self) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn runtime(self) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::GenNetwork(a) => gen_network(a),
        Command::Plan(a) => plan(a),
        Command::Sweep(a) => sweep(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &FsPath) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_text(path: &FsPath, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn gen_network(args: GenNetworkArgs) -> std::result::Result<(), Failure> {
    let mut config: GraphGenConfig = match &args.config {
        Some(p) => read_json(p).config()?,
        None => GraphGenConfig::default(),
    };
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(n) = args.nodes {
        config.num_nodes = n;
    }
    if let Some(e) = args.edges {
        config.num_edges = e;
    }
    if let Some(d) = args.dropout {
        config.dropout_rate = d;
    }
    config.validate().config()?;
    let graph = generate_network(&config).runtime()?;
    let mut text = save_network(&graph);
    text.push('\n');
    write_text(&args.out, &text).runtime()?;
    println!("nodes: {}, edges: {}", graph.num_nodes(), graph.num_edges());
    Ok(())
}

#[derive(Serialize)]
struct Segments<'a> {
    pre: &'a [NodeId],
    platoon: &'a [NodeId],
    post: &'a [NodeId],
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum VehicleReport<'a> {
    Planned {
        vehicle: VehicleId,
        role: Role,
        case: PlatoonCase,
        merge_point: Option<NodeId>,
        separation_point: Option<NodeId>,
        segments: Segments<'a>,
        platoon_duration_s: f64,
        joint_cost: CostBreakdown,
        individual_cost: CostBreakdown,
        adopted: bool,
    },
    Error {
        vehicle: VehicleId,
        error: &'a str,
    },
}

#[derive(Serialize)]
struct PlanReport<'a> {
    master: VehicleId,
    mode: &'static str,
    warnings: usize,
    vehicles: Vec<VehicleReport<'a>>,
}

fn plan(args: PlanArgs) -> std::result::Result<(), Failure> {
    let network_text = fs::read_to_string(&args.network)
        .with_context(|| format!("reading {}", args.network.display()))
        .config()?;
    let graph = load_network(&network_text)
        .with_context(|| format!("loading {}", args.network.display()))
        .config()?;
    let requests: Vec<VehicleRequest> = read_json(&args.vehicles).config()?;
    let params: CostParams = match &args.params {
        Some(p) => read_json(p).config()?,
        None => CostParams::default(),
    };
    let options = PlannerOptions {
        mode: args.mode.into(),
        case: args.case.into(),
    };
    let plan = plan_network(&graph, &requests, &params, options).config()?;

    let vehicles: Vec<VehicleReport<'_>> = plan
        .outcomes
        .iter()
        .map(|o| match o {
            VehicleOutcome::Planned(p) => VehicleReport::Planned {
                vehicle: p.vehicle,
                role: p.role,
                case: p.case,
                merge_point: p.merge_point,
                separation_point: p.separation_point,
                segments: Segments {
                    pre: &p.pre_segment.vertices,
                    platoon: &p.platoon_segment.vertices,
                    post: &p.post_segment.vertices,
                },
                platoon_duration_s: p.platoon_duration,
                joint_cost: p.joint_cost,
                individual_cost: p.individual_cost,
                adopted: p.adopted,
            },
            VehicleOutcome::Failed { vehicle, error } => VehicleReport::Error {
                vehicle: *vehicle,
                error,
            },
        })
        .collect();
    let warnings = vehicles
        .iter()
        .filter(|v| matches!(v, VehicleReport::Error { .. }))
        .count();
    let report = PlanReport {
        master: plan.master,
        mode: options.mode.as_str(),
        warnings,
        vehicles,
    };
    let mut text = serde_json::to_string_pretty(&report).runtime()?;
    text.push('\n');
    match &args.out {
        Some(p) => write_text(p, &text).runtime()?,
        None => print!("{text}"),
    }
    if warnings > 0 {
        eprintln!("warning: {warnings} vehicle(s) could not be planned");
    }
    Ok(())
}

#[derive(Serialize)]
struct SurfaceRow {
    tau: f64,
    xi: f64,
    mean_individual_km: f64,
    mean_joint_km: f64,
    improvement_pct: f64,
    mode: &'static str,
    semantics: &'static str,
}

#[derive(Serialize)]
struct InvolvementRow {
    iteration: usize,
    involvement_pct: f64,
}

fn sweep_config(args: &SweepArgs) -> Result<SimulationConfig> {
    let mut config: SimulationConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => SimulationConfig::default(),
    };
    if let Some(n) = args.iterations {
        config.iterations = n;
    }
    if let Some(n) = args.vehicles {
        config.num_vehicles = n;
    }
    if let Some((n, m)) = args.grid {
        config.tau_grid = linspace(n, 1.0);
        config.xi_grid = linspace(m, GRID_XI_MAX);
    }
    if let Some(t) = &args.tau {
        config.tau_grid = t.clone();
    }
    if let Some(x) = &args.xi {
        config.xi_grid = x.clone();
    }
    if let Some(m) = args.mode {
        config.planner_mode = m.into();
    }
    if let Some(s) = args.semantics {
        config.semantics = s.modes();
    }
    if let Some(s) = args.seed {
        config.base_seed = s;
    }
    config.validate()?;
    Ok(config)
}

/// Surface rows in report order.
fn surface_csv(report: &SweepReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in &report.surface {
        w.serialize(SurfaceRow {
            tau: s.tau,
            xi: s.xi,
            mean_individual_km: s.mean_individual_km,
            mean_joint_km: s.mean_joint_km,
            improvement_pct: s.improvement_pct,
            mode: report.config.planner_mode.as_str(),
            semantics: s.semantics.as_str(),
        })?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn involvement_csv(report: &SweepReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for e in &report.involvement.entries {
        w.serialize(InvolvementRow {
            iteration: e.iteration,
            involvement_pct: e.involvement_pct,
        })?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn sweep(args: SweepArgs) -> std::result::Result<(), Failure> {
    let config = sweep_config(&args).config()?;
    let report = match run_sweep_with_jobs(&config, args.jobs) {
        Ok(r) => r,
        Err(e @ SimulationError::InvalidConfig(_)) => return Err(Failure::Config(e.into())),
        Err(e) => return Err(Failure::Runtime(e.into())),
    };
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))
        .runtime()?;
    let surface = surface_csv(&report).runtime()?;
    let involvement = involvement_csv(&report).runtime()?;
    let mut summary = serde_json::to_string_pretty(&report).runtime()?;
    summary.push('\n');
    write_text(&args.out_dir.join("surface.csv"), &surface).runtime()?;
    write_text(&args.out_dir.join("involvement.csv"), &involvement).runtime()?;
    write_text(&args.out_dir.join("summary.json"), &summary).runtime()?;
    println!(
        "{} iterations completed, {} skipped; mean involvement {:.2} %",
        report.completed,
        report.skipped.len(),
        report.involvement.mean_pct
    );
    Ok(())
}

fn render_report(report: &SweepReport) -> Result<String> {
    let c = &report.config;
    let mut out = String::new();
    writeln!(out, "planner mode:    {}", c.planner_mode.as_str())?;
    writeln!(out, "vehicles:        {}", c.num_vehicles)?;
    writeln!(out, "iterations:      {} completed, {} skipped", report.completed, report.skipped.len())?;
    for s in &report.skipped {
        writeln!(out, "  skipped #{} (seed {}): {}", s.iteration, s.seed, s.reason)?;
    }
    let p = c.involvement_point;
    writeln!(
        out,
        "involvement:     {:.2} % at tau {} xi {} {}",
        report.involvement.mean_pct,
        p.tau,
        p.xi,
        p.semantics.as_str()
    )?;
    writeln!(out)?;
    writeln!(
        out,
        "{:>6} {:>6} {:>9} {:>14} {:>14} {:>13} {:>13}",
        "tau", "xi", "semantics", "individual_km", "joint_km", "improvement_%", "involvement_%"
    )?;
    for s in &report.surface {
        writeln!(
            out,
            "{:>6.2} {:>6.2} {:>9} {:>14.1} {:>14.1} {:>13.2} {:>13.1}",
            s.tau,
            s.xi,
            s.semantics.as_str(),
            s.mean_individual_km,
            s.mean_joint_km,
            s.improvement_pct,
            s.involvement_pct
        )?;
    }
    if let Some(best) = report
        .surface
        .iter()
        .max_by(|a, b| a.improvement_pct.total_cmp(&b.improvement_pct))
    {
        writeln!(out)?;
        writeln!(
            out,
            "best improvement: {:.2} % at tau {} xi {} {}",
            best.improvement_pct,
            best.tau,
            best.xi,
            best.semantics.as_str()
        )?;
    }
    Ok(out)
}

fn report(args: ReportArgs) -> std::result::Result<(), Failure> {
    let report: SweepReport = read_json(&args.summary).config()?;
    if report.surface.is_empty() {
        return Err(Failure::Config(anyhow::anyhow!(
            "{} has no surface entries",
            args.summary.display()
        )));
    }
    let text = render_report(&report).runtime()?;
    match &args.out {
        Some(p) => write_text(p, &text).runtime()?,
        None => print!("{text}"),
    }
    Ok(())
}
