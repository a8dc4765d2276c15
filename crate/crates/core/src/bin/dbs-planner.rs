use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dbs_planner::error::{Error, Result};
use dbs_planner::experiment::{
    load_config, parse_config, record_run, run_jobs, ExperimentConfig, ExperimentOutput, Job, MinDbsJob, SweepJob, REPRODUCE_CONFIG,
};
use dbs_planner::harness::{cell_scenario, Mode, SweepSpec, WORKERS_ENV};
use dbs_planner::scenario::Scenario;

/// Trajectory planning and scheduling for drone base stations.
#[derive(Parser)]
#[command(version, about, after_help = format!("The {WORKERS_ENV} environment variable overrides the worker count."))]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Generate a random scenario.
    Generate(ScenarioArgs),
    /// Plan periodic trajectories for a scenario.
    Plan(ScenarioArgs),
    /// Place static hovering drones with the swarm baseline.
    Baseline(ScenarioArgs),
    /// Run a grid of speeds, fleet sizes and seeds.
    Sweep(SweepArgs),
    /// Find the smallest fleet meeting pathloss thresholds.
    MinDbs(MinDbsArgs),
    /// Run a full experiment config, the bundled reproduction by default.
    Reproduce(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config supplying the scenario template and solver settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    common: Common,
    /// Scenario JSON to use instead of generating one.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    aois: usize,
    #[arg(long, default_value_t = 5)]
    drones: usize,
    /// Horizontal speed limit, m/slot.
    #[arg(long, default_value_t = 90.0)]
    v_max: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 20)]
    aois: usize,
    #[arg(long, value_delimiter = ',', default_value = "30,50,70,90,110")]
    v_max: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "4,5,6,7")]
    drones: Vec<usize>,
    /// Number of seeds per cell, counted from `--seed`.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "planner,baseline")]
    modes: Vec<Mode>,
}

#[derive(Args)]
struct MinDbsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    aois: usize,
    #[arg(long, value_delimiter = ',', default_value = "30,50,70,90,110")]
    v_max: Vec<f64>,
    /// Pathloss thresholds, dB.
    #[arg(long, value_delimiter = ',', default_value = "98,95,92,89,86")]
    thresholds: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "planner,baseline")]
    modes: Vec<Mode>,
    #[arg(long)]
    max_drones: Option<usize>,
}

fn base_config(common: &Common) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    config.jobs.clear();
    if common.workers.is_some() {
        config.workers = common.workers;
    }
    Ok(config)
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let s: Scenario = serde_json::from_str(&text).map_err(|e| Error::Config {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    s.validate()?;
    Ok(s)
}

fn scenario_from(args: &ScenarioArgs, config: &ExperimentConfig) -> Result<Scenario> {
    match &args.scenario {
        Some(path) => load_scenario(path),
        None => cell_scenario(&config.scenario, args.aois, args.drones, args.v_max, args.seed),
    }
}

fn finish(out: &ExperimentOutput, dir: &Path) -> Result<()> {
    for path in out.write(dir)? {
        println!("{}", path.display());
    }
    match out.validation_failures.first() {
        Some(first) => Err(Error::Validation(first.clone())),
        None => Ok(()),
    }
}

fn single(args: &ScenarioArgs, mode: Mode) -> Result<()> {
    let config = base_config(&args.common)?;
    let s = scenario_from(args, &config)?;
    let mut out = ExperimentOutput::default();
    record_run(&mut out, mode.to_string().as_str(), &s, mode, &config.solvers)?;
    if let Some(table) = out.tables.get("metrics.csv") {
        if let Some(err) = table.rows.iter().find_map(|r| r.last().filter(|e| !e.is_empty())) {
            eprintln!("run failed: {err}");
        }
    }
    finish(&out, &args.common.out)
}

fn run(verb: Verb) -> Result<()> {
    match verb {
        Verb::Generate(args) => {
            let config = base_config(&args.common)?;
            let s = scenario_from(&args, &config)?;
            std::fs::create_dir_all(&args.common.out)?;
            let path = args.common.out.join("scenario.json");
            std::fs::write(&path, serde_json::to_string_pretty(&s)? + "\n")?;
            println!("{}", path.display());
            Ok(())
        }
        Verb::Plan(args) => single(&args, Mode::Planner),
        Verb::Baseline(args) => single(&args, Mode::Baseline),
        Verb::Sweep(args) => {
            let mut config = base_config(&args.common)?;
            config.jobs.push(Job::Sweep(SweepJob {
                name: "sweep".into(),
                grid: SweepSpec {
                    n_aois: args.aois,
                    v_max: args.v_max,
                    n_drones: args.drones,
                    seeds: (args.seed..args.seed + args.seeds).collect(),
                    modes: args.modes,
                },
            }));
            finish(&run_jobs(&config)?, &args.common.out)
        }
        Verb::MinDbs(args) => {
            let mut config = base_config(&args.common)?;
            config.jobs.push(Job::MinDbs(MinDbsJob {
                name: "min_dbs".into(),
                seed: args.seed,
                n_aois: args.aois,
                v_max: args.v_max,
                thresholds: args.thresholds,
                modes: args.modes,
                max_drones: args.max_drones,
            }));
            finish(&run_jobs(&config)?, &args.common.out)
        }
        Verb::Reproduce(common) => {
            let mut config = match &common.config {
                Some(path) => load_config(path)?,
                None => parse_config(REPRODUCE_CONFIG)?,
            };
            if common.workers.is_some() {
                config.workers = common.workers;
            }
            finish(&run_jobs(&config)?, &common.out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
