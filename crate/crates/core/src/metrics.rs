//! Served-slot statistics of a solution.

use serde::{Deserialize, Serialize};

use crate::planner::PlanSolution;
use crate::scenario::{validate_separation, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub network_objective: f64,
    pub served_mean: f64,
    /// Population standard deviation of the served-slot pathloss.
    pub served_std: f64,
    /// `(pathloss, fraction of samples at or below it)` at each distinct value.
    pub cdf: Vec<(f64, f64)>,
    pub min_separation: f64,
    /// Fraction of served slots spent within half a grid cell of the AoI.
    pub hovering_fraction: f64,
    pub hovering_per_drone: Vec<f64>,
    /// Largest served-slot pathloss.
    pub max_pathloss: f64,
    pub runtime_s: f64,
    pub iterations: usize,
}

/// Pathloss of every served slot, drone-major then slot order.
pub fn served_samples(sol: &PlanSolution, s: &Scenario) -> Vec<f64> {
    let mut out = Vec::new();
    for (d, t) in sol.fleet.trajectories.iter().enumerate() {
        for (n, slot) in sol.schedule.slot_table(d).into_iter().enumerate() {
            if let Some(u) = slot {
                out.push(s.pathloss(t.at(n), u));
            }
        }
    }
    out
}

/// Mean and population standard deviation.
pub fn mean_std(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn empirical_cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut cdf: Vec<(f64, f64)> = Vec::new();
    for (k, x) in sorted.iter().enumerate() {
        let frac = (k + 1) as f64 / n;
        match cdf.last_mut() {
            Some(last) if last.0 == *x => last.1 = frac,
            _ => cdf.push((*x, frac)),
        }
    }
    cdf
}

pub fn compute_metrics(sol: &PlanSolution, s: &Scenario, runtime_s: f64) -> Metrics {
    let samples = served_samples(sol, s);
    let (served_mean, served_std) = mean_std(&samples);

    let radius = s.grid_len / 2.0;
    let mut hovering = 0;
    let mut served = 0;
    let mut hovering_per_drone = Vec::new();
    for (d, t) in sol.fleet.trajectories.iter().enumerate() {
        let (mut near, mut total) = (0, 0);
        for (n, slot) in sol.schedule.slot_table(d).into_iter().enumerate() {
            if let Some(u) = slot {
                total += 1;
                if t.at(n).horizontal().distance(&s.aois[u]) <= radius {
                    near += 1;
                }
            }
        }
        hovering += near;
        served += total;
        hovering_per_drone.push(if total > 0 { near as f64 / total as f64 } else { 0.0 });
    }

    Metrics {
        network_objective: sol.objective.network,
        served_mean,
        served_std,
        cdf: empirical_cdf(&samples),
        min_separation: validate_separation(&sol.fleet, s),
        hovering_fraction: if served > 0 { hovering as f64 / served as f64 } else { 0.0 },
        hovering_per_drone,
        max_pathloss: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        runtime_s,
        iterations: sol.iterations,
    }
}
