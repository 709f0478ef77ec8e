//! `minibus` — screen bus routes for semi-on-demand conversion, simulate
//! them against the fixed route, and build scenarios from boardings data.
//!
//! Exit status: 0 on success, 1 on a usage or validation error, 2 when a
//! run fails after its inputs were accepted.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use minibus::analytic::{
    demand_upper_bound, hourly_cost_amsod, hourly_cost_fixed, parallel_metrics, screening_mean_access,
    selection_indicator, zonal_plan, CostSummary, DemandBound, ParallelMetrics, ZonalPlan,
};
use minibus::experiments::{
    emit_report, run_scenario, sig4, sweep, table_rows, write_sweep_csv, ReportFormat, SweepDimension, SweepSpec,
    DEFAULT_SEED,
};
use minibus::ingest::{build_route_model, case_scenario, load_boardings, RouteDefaults};
use minibus::model::{load_scenario, presets, scenario_to_json, CostParams, RunConfig, Scenario};

/// Highway speed assumed for the zonal table when the scenario sets none (km/h).
const DEFAULT_HIGHWAY_SPEED: f64 = 50.0;
/// Largest number of zones in the zonal table.
const ZONAL_N_MAX: u32 = 6;

#[derive(Debug, Parser)]
#[command(name = "minibus", version, about = "Semi-on-demand minibus route screening and simulation")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Closed-form indicators, hourly costs and the zonal table for one scenario.
    Analytic(AnalyticArgs),
    /// Rank scenarios by selection indicator, most favorable first.
    Screen(ScreenArgs),
    /// Monte Carlo comparison of the fixed route and the minibus service.
    Simulate(SimulateArgs),
    /// Repeat the simulation over values of one parameter.
    Sweep(SweepArgs),
    /// Build a scenario file from a stop-boardings CSV.
    Ingest(IngestArgs),
}

#[derive(Debug, Args)]
struct AnalyticArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Also write `<scenario>_both_analytic.json` here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScreenArgs {
    /// Scenario files; repeat the flag or separate paths with commas.
    #[arg(long, required = true, value_delimiter = ',')]
    scenario: Vec<PathBuf>,
    /// Also write `screen_ranking.csv` here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Defaults to the scenario's seed, itself defaulting to 20220516.
    #[arg(long)]
    seed: Option<u64>,
    /// Defaults to the scenario's replication count.
    #[arg(long)]
    replications: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    dimension: String,
    /// Comma-separated, strictly increasing values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Stop-boardings CSV.
    #[arg(long)]
    data: PathBuf,
    /// Route to keep; also selects the case defaults (126 or 84).
    #[arg(long)]
    route_id: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Scenario name; defaults to `cta<route-id>`.
    #[arg(long)]
    name: Option<String>,
}

/// Failure classes, mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    /// Bad command line or input that fails validation.
    Invalid(anyhow::Error),
    /// Accepted inputs, failed run.
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

type Outcome = Result<(), Failure>;

fn invalid<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Invalid(e.into())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.code();
            let (Failure::Invalid(e) | Failure::Runtime(e)) = f;
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn execute(verb: Verb) -> Outcome {
    match verb {
        Verb::Analytic(a) => analytic(&a),
        Verb::Screen(a) => screen(&a),
        Verb::Simulate(a) => simulate(&a),
        Verb::Sweep(a) => run_sweep(&a),
        Verb::Ingest(a) => ingest(&a),
    }
}

fn parse_config(path: &Path) -> Result<Scenario, Failure> {
    let (scenario, warnings) = load_scenario(path)
        .with_context(|| format!("scenario {}", path.display()))
        .map_err(invalid)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(scenario)
}

fn fmt_bound(b: DemandBound) -> String {
    match b {
        DemandBound::Bounded(v) => sig4(v),
        DemandBound::Unbounded => "unbounded".to_string(),
    }
}

#[derive(Debug, Serialize)]
struct AnalyticReport {
    scenario: String,
    md_km: f64,
    mean_access_h: f64,
    selection_indicator: f64,
    demand_bound: DemandBound,
    parallel: Option<ParallelMetrics>,
    fixed: CostSummary,
    amsod: CostSummary,
    delta_tc: f64,
    highway_speed_kmh: f64,
    zonal: ZonalPlan,
}

fn analytic_report(s: &Scenario) -> anyhow::Result<AnalyticReport> {
    let (cost, svc, md) = (&s.cost, &s.service, s.md());
    let mean_access = screening_mean_access(svc);
    let fixed = hourly_cost_fixed(cost, &s.grid, svc, mean_access, 0.0);
    let amsod = hourly_cost_amsod(cost, &s.grid, svc, md);
    let parallel = match svc.n_parallel {
        n if n > 1 => Some(parallel_metrics(cost, svc, md, mean_access, n)?),
        _ => None,
    };
    let mut zonal_svc = svc.clone();
    let v_h = *zonal_svc.v_h.get_or_insert(DEFAULT_HIGHWAY_SPEED);
    Ok(AnalyticReport {
        scenario: s.name.clone(),
        md_km: md,
        mean_access_h: mean_access,
        selection_indicator: selection_indicator(cost, svc, md, mean_access)?,
        demand_bound: demand_upper_bound(cost, svc, md, mean_access),
        parallel,
        delta_tc: amsod.total - fixed.total,
        fixed,
        amsod,
        highway_speed_kmh: v_h,
        zonal: zonal_plan(cost, &s.grid, &zonal_svc, md, ZONAL_N_MAX)?,
    })
}

fn analytic(a: &AnalyticArgs) -> Outcome {
    let s = parse_config(&a.scenario)?;
    let r = analytic_report(&s).map_err(invalid)?;
    println!("scenario {}", r.scenario);
    println!("MD (km)                       {}", sig4(r.md_km));
    println!("mean access time (min)        {}", sig4(r.mean_access_h * 60.0));
    println!("SI                            {}", sig4(r.selection_indicator));
    println!("demand bound (pax/h)          {}", fmt_bound(r.demand_bound));
    if let Some(p) = &r.parallel {
        println!("SI_p (n_p = {})                {}", p.n_p, sig4(p.selection_indicator));
        println!("demand bound, n_p = {} (pax/h) {}", p.n_p, fmt_bound(p.demand_bound));
    }
    println!("hourly cost ($/h)             fixed {}  amsod {}  difference {}",
        sig4(r.fixed.total), sig4(r.amsod.total), sig4(r.delta_tc));
    println!("zonal express at v_h = {} km/h", sig4(r.highway_speed_kmh));
    println!("  n  TC'_z ($/h)");
    for (n, c) in &r.zonal.table {
        println!("  {n}  {}", sig4(c.total));
    }
    println!("  n_o = {} (closed form), {} (scan)", r.zonal.n_closed, r.zonal.n_brute);
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(runtime)?;
        let path = dir.join(format!("{}_both_analytic.json", r.scenario));
        let json = serde_json::to_string_pretty(&r).map_err(runtime)?;
        fs::write(&path, json + "\n").with_context(|| path.display().to_string()).map_err(runtime)?;
    }
    Ok(())
}

fn screen(a: &ScreenArgs) -> Outcome {
    let mut rows = Vec::new();
    for path in &a.scenario {
        let s = parse_config(path)?;
        let r = analytic_report(&s).map_err(invalid)?;
        rows.push(r);
    }
    rows.sort_by(|x, y| x.selection_indicator.total_cmp(&y.selection_indicator));
    println!("rank  scenario  SI  demand_bound  SI_p");
    for (i, r) in rows.iter().enumerate() {
        let si_p = r.parallel.map(|p| sig4(p.selection_indicator)).unwrap_or_else(|| "-".into());
        println!("{}  {}  {}  {}  {}", i + 1, r.scenario, sig4(r.selection_indicator), fmt_bound(r.demand_bound), si_p);
    }
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(runtime)?;
        let path = dir.join("screen_ranking.csv");
        let mut w = csv::Writer::from_path(&path).map_err(runtime)?;
        w.write_record(["rank", "scenario", "si", "demand_bound", "si_parallel"]).map_err(runtime)?;
        for (i, r) in rows.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                r.scenario.clone(),
                r.selection_indicator.to_string(),
                r.demand_bound.value().map(|v| v.to_string()).unwrap_or_default(),
                r.parallel.map(|p| p.selection_indicator.to_string()).unwrap_or_default(),
            ])
            .map_err(runtime)?;
        }
        w.flush().map_err(runtime)?;
    }
    Ok(())
}

/// Scenario plus the seed and replication count in effect.
fn prepare(run: &RunArgs) -> Result<(Scenario, u64, usize), Failure> {
    let s = parse_config(&run.scenario)?;
    let seed = run.seed.unwrap_or(s.run.seed);
    let reps = run.replications.unwrap_or(s.run.replications);
    if reps == 0 {
        return Err(invalid(anyhow!("--replications must be at least 1")));
    }
    Ok((s, seed, reps))
}

fn simulate(a: &SimulateArgs) -> Outcome {
    let format: ReportFormat = a.format.parse().map_err(invalid)?;
    let (s, seed, reps) = prepare(&a.run)?;
    let run = run_scenario(&s, reps, seed).map_err(runtime)?;
    println!("scenario {}  replications {reps}  seed {seed}", s.name);
    println!("metric | fixed | amsod");
    for [label, fixed, amsod] in table_rows(&run.fixed, &run.amsod) {
        println!("{label} | {fixed} | {amsod}");
    }
    for path in emit_report(&run, format, &a.run.out).map_err(runtime)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_sweep(a: &SweepArgs) -> Outcome {
    let dimension: SweepDimension = a.dimension.parse().map_err(invalid)?;
    let (s, seed, reps) = prepare(&a.run)?;
    let spec = SweepSpec {
        dimension,
        values: a.values.clone(),
        replications: reps,
    };
    spec.validate().map_err(invalid)?;
    let rows = sweep(&s, &spec, seed).map_err(runtime)?;
    println!("{}  delta_tc_median  (p2.5 – p97.5)", a.dimension);
    for r in &rows {
        println!(
            "{}  {}  ({} – {})",
            sig4(r.value),
            sig4(r.delta_tc.median),
            sig4(r.delta_tc.lower),
            sig4(r.delta_tc.upper)
        );
    }
    fs::create_dir_all(&a.run.out).map_err(runtime)?;
    let path = a.run.out.join(format!("{}_both_sweep_{}.csv", s.name, a.dimension));
    let file = fs::File::create(&path).with_context(|| path.display().to_string()).map_err(runtime)?;
    write_sweep_csv(&rows, dimension, file).map_err(runtime)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn ingest(a: &IngestArgs) -> Outcome {
    let defaults = RouteDefaults::for_route(&a.route_id)
        .ok_or_else(|| invalid(anyhow!("no case defaults for route {:?}; known routes: 126, 84", a.route_id)))?;
    let records = load_boardings(&a.data, Some(&a.route_id), None).map_err(invalid)?;
    let (grid, overrides) = build_route_model(&records, &defaults).map_err(invalid)?;
    let name = a.name.clone().unwrap_or_else(|| format!("cta{}", a.route_id));
    let s = case_scenario(
        &name,
        grid,
        &overrides,
        CostParams::default(),
        &presets::model1_service(),
        RunConfig {
            seed: DEFAULT_SEED,
            ..RunConfig::default()
        },
    );
    s.validate().map_err(invalid)?;
    fs::create_dir_all(&a.out).map_err(runtime)?;
    let path = a.out.join(format!("{name}.json"));
    let json = serde_json::to_string_pretty(&scenario_to_json(&s)).map_err(runtime)?;
    fs::write(&path, json + "\n").with_context(|| path.display().to_string()).map_err(runtime)?;
    println!("route {}: {} stops, {} km", a.route_id, s.grid.n_stops(), sig4(s.grid.gl_x));
    println!("wrote {}", path.display());
    Ok(())
}
