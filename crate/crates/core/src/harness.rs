//! Experiment runs: single plans, parameter sweeps and minimal fleet search.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{plan_static_pso, PsoParams};
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, mean_std, Metrics};
use crate::planner::{plan, PlanSolution, PlannerConfig};
use crate::scenario::{generate_scenario, validate_separation, validate_trajectory, Scenario};

/// Environment variable overriding the worker count of sweeps.
pub const WORKERS_ENV: &str = "DBS_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Planner,
    Baseline,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Planner => "planner",
            Mode::Baseline => "baseline",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "planner" => Ok(Mode::Planner),
            "baseline" => Ok(Mode::Baseline),
            other => Err(Error::InvalidParameter(format!("unknown mode `{other}`"))),
        }
    }
}

/// Algorithm settings shared by every run of an experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Solvers {
    pub planner: PlannerConfig,
    pub pso: PsoParams,
}

/// Checks every constraint a written solution must meet.
pub fn check_solution(sol: &PlanSolution, s: &Scenario) -> Result<()> {
    for t in &sol.fleet.trajectories {
        if let Some(v) = validate_trajectory(t, s)?.first() {
            return Err(Error::Validation(format!("drone {}: {v}", t.drone_id)));
        }
    }
    let sep = validate_separation(&sol.fleet, s);
    if sep < s.z_min {
        return Err(Error::Validation(format!("drones come within {sep:.3} m of each other")));
    }
    sol.schedule.validate(&sol.association, s)
}

/// Runs one algorithm on one scenario; the seed of the run is the scenario seed.
pub fn run_mode(s: &Scenario, mode: Mode, solvers: &Solvers) -> Result<(PlanSolution, Metrics)> {
    let start = Instant::now();
    let sol = match mode {
        Mode::Planner => plan(
            s,
            &PlannerConfig {
                seed: s.seed,
                ..solvers.planner.clone()
            },
        )?,
        Mode::Baseline => plan_static_pso(
            s,
            &PsoParams {
                seed: s.seed,
                ..solvers.pso.clone()
            },
        )?
        .to_solution(s),
    };
    let runtime = start.elapsed().as_secs_f64();
    check_solution(&sol, s)?;
    let metrics = compute_metrics(&sol, s, runtime);
    Ok((sol, metrics))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub n_aois: usize,
    pub v_max: Vec<f64>,
    pub n_drones: Vec<usize>,
    pub seeds: Vec<u64>,
    pub modes: Vec<Mode>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            n_aois: 20,
            v_max: vec![30.0, 50.0, 70.0, 90.0, 110.0],
            n_drones: vec![4, 5, 6, 7],
            seeds: (0..5).collect(),
            modes: vec![Mode::Planner, Mode::Baseline],
        }
    }
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.v_max.is_empty() || self.n_drones.is_empty() || self.seeds.is_empty() || self.modes.is_empty() {
            return Err(Error::InvalidParameter("sweep lists must be nonempty".into()));
        }
        Ok(())
    }

    /// Cells in output order: mode, drones, speed, seed.
    pub fn cells(&self) -> Vec<(Mode, usize, f64, u64)> {
        let mut out = Vec::new();
        for &mode in &self.modes {
            for &d in &self.n_drones {
                for &v in &self.v_max {
                    for &seed in &self.seeds {
                        out.push((mode, d, v, seed));
                    }
                }
            }
        }
        out
    }
}

/// Why a run produced no metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub message: String,
    /// A finished plan broke a constraint, as opposed to an infeasible input.
    pub validation: bool,
}

impl From<Error> for RunFailure {
    fn from(e: Error) -> Self {
        RunFailure {
            validation: matches!(e, Error::Validation(_)),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mode: Mode,
    pub n_drones: usize,
    pub v_max: f64,
    pub seed: u64,
    /// Metrics of the run, or the reason it failed.
    pub outcome: std::result::Result<Metrics, RunFailure>,
}

/// Scenario of one sweep cell. The AoI layout depends only on the seed.
pub fn cell_scenario(template: &Scenario, n_aois: usize, n_drones: usize, v_max: f64, seed: u64) -> Result<Scenario> {
    generate_scenario(seed, n_aois, n_drones, &Scenario { v_max, ..template.clone() })
}

/// Worker count: the environment override if set, else `requested`, else
/// the number of CPUs.
pub fn worker_count(requested: Option<usize>) -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .or(requested)
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run_parallel<T: Send, R: Send>(items: Vec<T>, workers: usize, f: impl Fn(T) -> R + Sync + Send) -> Result<Vec<R>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    Ok(pool.install(|| items.into_par_iter().map(f).collect()))
}

/// One row per cell in [`SweepSpec::cells`] order. Failed runs are recorded
/// and do not stop the sweep. Static deployments ignore the speed limit, so
/// the baseline runs once per fleet size and seed.
pub fn sweep(template: &Scenario, spec: &SweepSpec, solvers: &Solvers, workers: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let cells = spec.cells();
    let run_key = |&(mode, d, v, seed): &(Mode, usize, f64, u64)| match mode {
        Mode::Planner => (mode, d, v.to_bits(), seed),
        Mode::Baseline => (mode, d, spec.v_max[0].to_bits(), seed),
    };
    let mut keys: Vec<_> = cells.iter().map(run_key).collect();
    keys.sort_unstable();
    keys.dedup();
    let outcomes = run_parallel(keys.clone(), workers, |(mode, d, v, seed)| {
        cell_scenario(template, spec.n_aois, d, f64::from_bits(v), seed)
            .and_then(|s| run_mode(&s, mode, solvers))
            .map(|(_, m)| m)
            .map_err(RunFailure::from)
    })?;
    Ok(cells
        .iter()
        .map(|cell| {
            let k = keys.binary_search(&run_key(cell)).expect("every cell has a run");
            let (mode, n_drones, v_max, seed) = *cell;
            SweepRow {
                mode,
                n_drones,
                v_max,
                seed,
                outcome: outcomes[k].clone(),
            }
        })
        .collect())
}

/// Seed-averaged served-slot mean of one sweep cell group.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub mode: Mode,
    pub n_drones: usize,
    pub v_max: f64,
    pub runs: usize,
    pub failures: usize,
    pub mean_pathloss: f64,
    /// Standard deviation across seeds of the served mean.
    pub seed_std: f64,
    /// Average within-run served-slot standard deviation.
    pub mean_served_std: f64,
    pub mean_hovering: f64,
}

pub fn summarize(rows: &[SweepRow]) -> Vec<CellSummary> {
    let mut out: Vec<CellSummary> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let key = (rows[start].mode, rows[start].n_drones, rows[start].v_max);
        let end = rows[start..]
            .iter()
            .position(|r| (r.mode, r.n_drones, r.v_max) != key)
            .map_or(rows.len(), |k| start + k);
        let ok: Vec<&Metrics> = rows[start..end].iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
        let means: Vec<f64> = ok.iter().map(|m| m.served_mean).collect();
        let (mean, sd) = mean_std(&means);
        let avg = |f: fn(&Metrics) -> f64| ok.iter().map(|m| f(m)).sum::<f64>() / ok.len().max(1) as f64;
        out.push(CellSummary {
            mode: key.0,
            n_drones: key.1,
            v_max: key.2,
            runs: end - start,
            failures: end - start - ok.len(),
            mean_pathloss: mean,
            seed_std: sd,
            mean_served_std: avg(|m| m.served_std),
            mean_hovering: avg(|m| m.hovering_fraction),
        });
        start = end;
    }
    out
}

/// Smallest fleet whose worst served-slot pathloss stays within
/// `threshold`, searched upwards from the capacity floor. Fleet sizes whose
/// run fails count as not meeting the threshold. `None` when no size up to
/// one drone per AoI qualifies.
pub fn min_dbs_search(scenario: &Scenario, threshold: f64, mode: Mode, solvers: &Solvers) -> Option<usize> {
    min_dbs_search_with(scenario, mode, solvers, |m| m.max_pathloss <= threshold)
}

fn min_dbs_search_with(scenario: &Scenario, mode: Mode, solvers: &Solvers, ok: impl Fn(&Metrics) -> bool) -> Option<usize> {
    let u = scenario.n_aois();
    let floor = u.div_ceil(scenario.effective_capacity().max(1)).max(1);
    (floor..=u.max(floor)).find(|&d| {
        let s = Scenario {
            n_drones: d,
            ..scenario.clone()
        };
        matches!(run_mode(&s, mode, solvers), Ok((_, m)) if ok(&m))
    })
}

/// Worst served-slot pathloss for each fleet size from the capacity floor up
/// to `max_drones`; `None` marks failed runs. Thresholds can then be applied
/// without re-planning.
pub fn max_pathloss_profile(scenario: &Scenario, mode: Mode, solvers: &Solvers, max_drones: usize) -> Vec<(usize, Option<f64>)> {
    let u = scenario.n_aois();
    let floor = u.div_ceil(scenario.effective_capacity().max(1)).max(1);
    (floor..=max_drones.min(u).max(floor))
        .map(|d| {
            let s = Scenario {
                n_drones: d,
                ..scenario.clone()
            };
            (d, run_mode(&s, mode, solvers).ok().map(|(_, m)| m.max_pathloss))
        })
        .collect()
}

/// Smallest fleet size in a profile meeting the threshold.
pub fn min_dbs_from_profile(profile: &[(usize, Option<f64>)], threshold: f64) -> Option<usize> {
    profile
        .iter()
        .find(|(_, worst)| worst.is_some_and(|w| w <= threshold))
        .map(|(d, _)| *d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Solvers {
        Solvers {
            planner: PlannerConfig::default(),
            pso: PsoParams {
                iterations: 30,
                rounds: 1,
                swarm: 10,
                ..PsoParams::default()
            },
        }
    }

    #[test]
    fn single_cell_sweep() {
        let spec = SweepSpec {
            n_aois: 8,
            v_max: vec![90.0],
            n_drones: vec![3],
            seeds: vec![2],
            modes: vec![Mode::Planner],
        };
        let rows = sweep(&Scenario::default(), &spec, &tiny(), 1).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].outcome.is_ok());
        let again = sweep(&Scenario::default(), &spec, &tiny(), 2).unwrap();
        let strip = |r: &SweepRow| r.outcome.as_ref().map(|m| Metrics { runtime_s: 0.0, ..m.clone() }).unwrap();
        assert_eq!(strip(&rows[0]), strip(&again[0]));
    }

    #[test]
    fn failures_are_recorded() {
        let spec = SweepSpec {
            n_aois: 8,
            v_max: vec![90.0],
            // One drone cannot hold eight AoIs.
            n_drones: vec![1, 2],
            seeds: vec![0],
            modes: vec![Mode::Planner],
        };
        let rows = sweep(&Scenario::default(), &spec, &tiny(), 1).unwrap();
        assert!(rows[0].outcome.is_err());
        assert!(rows[1].outcome.is_ok());
    }

    #[test]
    fn unbounded_threshold_hits_capacity_floor() {
        let s = generate_scenario(1, 20, 1, &Scenario::default()).unwrap();
        assert_eq!(min_dbs_search(&s, f64::INFINITY, Mode::Planner, &tiny()), Some(4));
    }

    #[test]
    fn modes_round_trip() {
        for m in [Mode::Planner, Mode::Baseline] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("greedy".parse::<Mode>().is_err());
    }
}
