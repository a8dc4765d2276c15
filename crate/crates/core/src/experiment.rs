//! Config-driven experiments and their output files.
//!
//! A config names a scenario template, solver settings and a list of jobs.
//! Every job adds rows to in-memory tables; the tables are written at the
//! end so repeated runs produce identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{
    cell_scenario, max_pathloss_profile, min_dbs_from_profile, run_mode, summarize, sweep, worker_count, Mode, RunFailure, Solvers, SweepRow,
    SweepSpec,
};
use crate::metrics::{mean_std, Metrics};
use crate::planner::PlanSolution;
use crate::scenario::Scenario;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// The configuration behind the `reproduce` verb.
pub const REPRODUCE_CONFIG: &str = include_str!("../configs/reproduce.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "config_version")]
    pub schema_version: u32,
    /// Template for generated scenarios; its AoIs and seed are replaced.
    #[serde(default)]
    pub scenario: Scenario,
    #[serde(default)]
    pub solvers: Solvers,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub jobs: Vec<Job>,
}

fn config_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            scenario: Scenario::default(),
            solvers: Solvers::default(),
            workers: None,
            jobs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Job {
    Plan(PlanJob),
    Sweep(SweepJob),
    MinDbs(MinDbsJob),
}

/// One run on one generated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanJob {
    pub name: String,
    pub seed: u64,
    pub n_aois: usize,
    pub n_drones: usize,
    pub v_max: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepJob {
    pub name: String,
    #[serde(default)]
    pub grid: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinDbsJob {
    pub name: String,
    pub seed: u64,
    pub n_aois: usize,
    /// Speeds for the planner; the static baseline does not depend on speed.
    pub v_max: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub modes: Vec<Mode>,
    /// Largest fleet tried; defaults to one drone per AoI.
    #[serde(default)]
    pub max_drones: Option<usize>,
}

/// Parses a config, reporting the line and column of malformed input.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if config.schema_version != CONFIG_SCHEMA_VERSION {
        return Err(Error::Config {
            line: 1,
            column: 1,
            message: format!("unsupported schema_version {}", config.schema_version),
        });
    }
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&fs::read_to_string(path)?)
}

/// Rows of one output CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

const METRICS: &str = "metrics.csv";
const FIG3: &str = "fig3_trajectories.csv";
const FIG5: &str = "fig5_cdf.csv";
const FIG7: &str = "fig7_means.csv";
const FIG9: &str = "fig9_compare.csv";
const TABLE2: &str = "table2_std.csv";
const TABLE3: &str = "table3_min_dbs.csv";

const METRICS_HEADER: &[&str] = &[
    "job",
    "mode",
    "n_drones",
    "v_max",
    "seed",
    "status",
    "network_objective",
    "served_mean",
    "served_std",
    "max_pathloss",
    "min_separation",
    "hovering_fraction",
    "iterations",
    "error",
];

/// Everything an experiment produces, before it is written.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub tables: BTreeMap<&'static str, Table>,
    /// JSON documents keyed by file name.
    pub documents: BTreeMap<String, String>,
    /// Validator failures met along the way.
    pub validation_failures: Vec<String>,
}

impl ExperimentOutput {
    fn table(&mut self, name: &'static str, header: &[&'static str]) -> &mut Table {
        self.tables.entry(name).or_insert_with(|| Table::new(header))
    }

    fn metrics_row(&mut self, job: &str, mode: Mode, n_drones: usize, v_max: f64, seed: u64, outcome: std::result::Result<&Metrics, &RunFailure>) {
        let row = match outcome {
            Ok(m) => vec![
                job.to_string(),
                mode.to_string(),
                n_drones.to_string(),
                v_max.to_string(),
                seed.to_string(),
                "ok".into(),
                m.network_objective.to_string(),
                m.served_mean.to_string(),
                m.served_std.to_string(),
                m.max_pathloss.to_string(),
                m.min_separation.to_string(),
                m.hovering_fraction.to_string(),
                m.iterations.to_string(),
                String::new(),
            ],
            Err(f) => {
                if f.validation {
                    self.validation_failures.push(format!("{job}: {}", f.message));
                }
                let mut row = vec![
                    job.to_string(),
                    mode.to_string(),
                    n_drones.to_string(),
                    v_max.to_string(),
                    seed.to_string(),
                    "failed".into(),
                ];
                row.extend(std::iter::repeat_n(String::new(), 7));
                row.push(f.message.clone());
                row
            }
        };
        self.table(METRICS, METRICS_HEADER).push(row);
    }

    /// Writes every table and document into `dir`, plus a manifest listing
    /// the CSV columns. Nothing is written when there is no output.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if self.tables.is_empty() && self.documents.is_empty() {
            return Ok(written);
        }
        for (name, text) in &self.documents {
            let path = dir.join(name);
            fs::write(&path, text)?;
            written.push(path);
        }
        let mut columns = BTreeMap::new();
        for (name, table) in &self.tables {
            let path = dir.join(name);
            table.write(&path)?;
            written.push(path);
            columns.insert(*name, table.header.clone());
        }
        let manifest = serde_json::json!({
            "csv_schema_version": CSV_SCHEMA_VERSION,
            "columns": columns,
        });
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        written.push(path);
        Ok(written)
    }
}

fn fig3_rows(out: &mut ExperimentOutput, job: &str, sol: &PlanSolution) {
    let table = out.table(FIG3, &["job", "drone", "slot", "x", "y", "h", "aoi"]);
    for (d, t) in sol.fleet.trajectories.iter().enumerate() {
        let slots = sol.schedule.slot_table(d);
        let offset = sol.fleet.start_offsets[d];
        for n in 0..sol.schedule.n_slots {
            let w = sol.fleet.position(d, n);
            let local = (n + offset) % t.len().max(1);
            let aoi = slots.get(local).copied().flatten().map_or(String::new(), |u| u.to_string());
            table.push(vec![
                job.to_string(),
                d.to_string(),
                n.to_string(),
                w.x.to_string(),
                w.y.to_string(),
                w.h.to_string(),
                aoi,
            ]);
        }
    }
}

fn fig5_rows(out: &mut ExperimentOutput, job: &str, mode: Mode, n_drones: usize, v_max: f64, m: &Metrics) {
    let table = out.table(FIG5, &["job", "mode", "n_drones", "v_max", "pathloss", "cdf"]);
    for (x, f) in &m.cdf {
        table.push(vec![
            job.to_string(),
            mode.to_string(),
            n_drones.to_string(),
            v_max.to_string(),
            x.to_string(),
            f.to_string(),
        ]);
    }
}

fn run_plan_job(out: &mut ExperimentOutput, template: &Scenario, solvers: &Solvers, job: &PlanJob) -> Result<()> {
    let s = cell_scenario(template, job.n_aois, job.n_drones, job.v_max, job.seed)?;
    record_run(out, &job.name, &s, job.mode, solvers)
}

/// Runs `mode` on `s` and records the scenario, the solution and its rows
/// under `name`. A failed run only adds a metrics row.
pub fn record_run(out: &mut ExperimentOutput, name: &str, s: &Scenario, mode: Mode, solvers: &Solvers) -> Result<()> {
    out.documents
        .insert(format!("{name}_scenario.json"), serde_json::to_string_pretty(s)? + "\n");
    match run_mode(s, mode, solvers) {
        Ok((sol, m)) => {
            out.documents
                .insert(format!("{name}_solution.json"), serde_json::to_string_pretty(&sol)? + "\n");
            out.metrics_row(name, mode, s.n_drones, s.v_max, s.seed, Ok(&m));
            fig3_rows(out, name, &sol);
            fig5_rows(out, name, mode, s.n_drones, s.v_max, &m);
        }
        Err(e) => {
            let failure = RunFailure::from(e);
            out.metrics_row(name, mode, s.n_drones, s.v_max, s.seed, Err(&failure));
        }
    }
    Ok(())
}

fn sweep_tables(out: &mut ExperimentOutput, job: &str, rows: &[SweepRow]) {
    for r in rows {
        out.metrics_row(job, r.mode, r.n_drones, r.v_max, r.seed, r.outcome.as_ref());
    }
    let summaries = summarize(rows);
    let fig7 = out.table(
        FIG7,
        &["job", "mode", "n_drones", "v_max", "runs", "failures", "mean_pathloss", "seed_std", "mean_served_std", "mean_hovering"],
    );
    for c in &summaries {
        fig7.push(vec![
            job.to_string(),
            c.mode.to_string(),
            c.n_drones.to_string(),
            c.v_max.to_string(),
            c.runs.to_string(),
            c.failures.to_string(),
            c.mean_pathloss.to_string(),
            c.seed_std.to_string(),
            c.mean_served_std.to_string(),
            c.mean_hovering.to_string(),
        ]);
    }

    // Pooled over speeds and seeds for each mode and fleet size.
    let mut pooled: BTreeMap<(usize, Mode), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        if let Ok(m) = &r.outcome {
            let e = pooled.entry((r.n_drones, r.mode)).or_default();
            e.0.push(m.served_mean);
            e.1.push(m.served_std);
        }
    }
    let fig9 = out.table(FIG9, &["job", "mode", "n_drones", "runs", "mean_pathloss", "seed_std", "mean_served_std"]);
    for ((d, mode), (means, stds)) in &pooled {
        let (mean, sd) = mean_std(means);
        fig9.push(vec![
            job.to_string(),
            mode.to_string(),
            d.to_string(),
            means.len().to_string(),
            mean.to_string(),
            sd.to_string(),
            mean_std(stds).0.to_string(),
        ]);
    }
    let fleets: Vec<usize> = pooled.keys().map(|k| k.0).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let table2 = out.table(TABLE2, &["job", "n_drones", "sigma_planner", "sigma_baseline", "reduction"]);
    for d in fleets {
        let (Some(t), Some(b)) = (pooled.get(&(d, Mode::Planner)), pooled.get(&(d, Mode::Baseline))) else {
            continue;
        };
        let (st, sb) = (mean_std(&t.1).0, mean_std(&b.1).0);
        table2.push(vec![
            job.to_string(),
            d.to_string(),
            st.to_string(),
            sb.to_string(),
            ((sb - st) / sb).to_string(),
        ]);
    }
}

/// Minimal fleet sizes per mode, speed and threshold. `None` means no fleet
/// size qualified.
#[derive(Debug, Clone, PartialEq)]
pub struct MinDbsRow {
    pub mode: Mode,
    pub v_max: Option<f64>,
    pub threshold: f64,
    pub count: Option<usize>,
}

pub fn min_dbs_table(template: &Scenario, solvers: &Solvers, job: &MinDbsJob, workers: usize) -> Result<Vec<MinDbsRow>> {
    let base = cell_scenario(template, job.n_aois, 1, template.v_max, job.seed)?;
    let max_drones = job.max_drones.unwrap_or(job.n_aois);
    let mut runs: Vec<(Mode, Option<f64>)> = Vec::new();
    for &mode in &job.modes {
        match mode {
            Mode::Planner => runs.extend(job.v_max.iter().map(|&v| (mode, Some(v)))),
            Mode::Baseline => runs.push((mode, None)),
        }
    }
    let profiles = crate::harness::run_parallel(runs.clone(), workers, |(mode, v)| {
        let s = Scenario {
            v_max: v.unwrap_or(base.v_max),
            ..base.clone()
        };
        max_pathloss_profile(&s, mode, solvers, max_drones)
    })?;
    let mut out = Vec::new();
    for ((mode, v), profile) in runs.iter().zip(&profiles) {
        for &threshold in &job.thresholds {
            out.push(MinDbsRow {
                mode: *mode,
                v_max: *v,
                threshold,
                count: min_dbs_from_profile(profile, threshold),
            });
        }
    }
    Ok(out)
}

fn min_dbs_rows(out: &mut ExperimentOutput, job: &str, rows: &[MinDbsRow]) {
    let table = out.table(TABLE3, &["job", "mode", "v_max", "threshold", "min_dbs"]);
    for r in rows {
        table.push(vec![
            job.to_string(),
            r.mode.to_string(),
            r.v_max.map_or(String::new(), |v| v.to_string()),
            r.threshold.to_string(),
            r.count.map_or(String::new(), |c| c.to_string()),
        ]);
    }
}

/// Runs every job of `config` and returns the collected output.
pub fn run_jobs(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let workers = worker_count(config.workers);
    let mut out = ExperimentOutput::default();
    for job in &config.jobs {
        match job {
            Job::Plan(j) => run_plan_job(&mut out, &config.scenario, &config.solvers, j)?,
            Job::Sweep(j) => {
                let rows = sweep(&config.scenario, &j.grid, &config.solvers, workers)?;
                sweep_tables(&mut out, &j.name, &rows);
            }
            Job::MinDbs(j) => {
                let rows = min_dbs_table(&config.scenario, &config.solvers, j, workers)?;
                min_dbs_rows(&mut out, &j.name, &rows);
            }
        }
    }
    Ok(out)
}

/// Runs the experiment in `config_path` and writes its files to `out_dir`.
/// Fails after writing when any emitted plan broke a constraint.
pub fn run_experiment(config_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let config = load_config(config_path)?;
    let out = run_jobs(&config)?;
    let written = out.write(out_dir)?;
    if let Some(first) = out.validation_failures.first() {
        return Err(Error::Validation(format!(
            "{} run(s) failed validation, first: {first}",
            out.validation_failures.len()
        )));
    }
    Ok(written)
}
