//! Block coordinate descent over association, schedule and 3D trajectories.

use serde::{Deserialize, Serialize};

use crate::channel;
use crate::error::{ConstraintClass, Error, Result};
use crate::init::initial_trajectories;
use crate::scenario::{validate_trajectory, FleetPlan, Scenario, Trajectory};
use crate::scheduling::{optimize_association, optimize_schedule, Association, Schedule};
use crate::start_slots::schedule_start_slots;
use crate::trajectory_opt::{height_sweep, horizontal_sweep};

/// Allowed objective increase between iterations, in dB.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Stop once no waypoint moves more than this between iterations (m).
    pub epsilon_w: f64,
    pub max_iterations: usize,
    /// Radius of the initial circles (m).
    pub init_radius: f64,
    /// Height used for clustering and the initial circles (m).
    pub init_height: f64,
    pub seed: u64,
    pub kmeans_restarts: usize,
    /// Fresh plans from the next clustering seeds tried when no start offsets
    /// keep the drones apart.
    pub separation_restarts: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            epsilon_w: 0.1,
            max_iterations: 100,
            init_radius: 1.0,
            init_height: 80.0,
            seed: 0,
            kmeans_restarts: 10,
            separation_restarts: 5,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_w > 0.0) {
            return Err(Error::InvalidParameter("epsilon_w must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(self.init_radius >= 0.0 && self.init_height > 0.0) {
            return Err(Error::InvalidParameter("initial circle radius and height must be positive".into()));
        }
        Ok(())
    }
}

/// Objective of a plan in its two normalizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    /// Served pathloss summed over slots, divided by `N * |U|`.
    pub network: f64,
    /// Mean pathloss over served slots.
    pub served_mean: f64,
    pub served_samples: usize,
}

/// Evaluates the schedule over trajectory-local slots. Start offsets shift a
/// whole period and so leave the value unchanged.
pub fn objective_value(assoc: &Association, schedule: &Schedule, trajectories: &[Trajectory], s: &Scenario) -> Objective {
    let tables: Vec<Vec<Option<usize>>> = (0..trajectories.len()).map(|d| schedule.slot_table(d)).collect();
    let mut sum = 0.0;
    let mut count = 0;
    for u in 0..assoc.owner.len() {
        let d = assoc.owner[u];
        for (n, slot) in tables[d].iter().enumerate() {
            if *slot == Some(u) {
                sum += s.pathloss(trajectories[d].at(n), u);
                count += 1;
            }
        }
    }
    let network = sum / (schedule.n_slots * assoc.owner.len()).max(1) as f64;
    let served_mean = if count > 0 { sum / count as f64 } else { 0.0 };
    Objective {
        network,
        served_mean,
        served_samples: count,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSolution {
    pub association: Association,
    pub schedule: Schedule,
    pub fleet: FleetPlan,
    pub objective: Objective,
    /// Objective before the first iteration and after each one.
    pub objective_log: Vec<f64>,
    /// Largest waypoint move of each iteration.
    pub displacement_log: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Clustering seed the plan was built from.
    pub seed: u64,
}

/// Association and schedule for the current trajectories. A new association
/// is only taken when it does strictly better than the previous one after
/// rescheduling, so the objective never goes up.
fn association_step(
    s: &Scenario,
    trajectories: &[Trajectory],
    previous: Option<&Association>,
) -> Result<(Association, Schedule, Objective)> {
    let assoc = optimize_association(s, trajectories)?;
    let schedule = optimize_schedule(s, trajectories, &assoc)?;
    let value = objective_value(&assoc, &schedule, trajectories, s);
    let Some(prev) = previous else {
        return Ok((assoc, schedule, value));
    };
    let kept_schedule = optimize_schedule(s, trajectories, prev)?;
    let kept = objective_value(prev, &kept_schedule, trajectories, s);
    if value.network < kept.network {
        Ok((assoc, schedule, value))
    } else {
        Ok((prev.clone(), kept_schedule, kept))
    }
}

/// Plans trajectories, association and schedule for every drone.
pub fn plan(s: &Scenario, config: &PlannerConfig) -> Result<PlanSolution> {
    s.validate()?;
    config.validate()?;
    s.check_capacity()?;
    let theta = channel::optimal_elevation_angle(&s.d2u);
    let mut attempt = 0;
    loop {
        let seed = config.seed.wrapping_add(attempt as u64);
        match plan_from_seed(s, config, theta, seed) {
            Err(e) if e.constraint_class() == Some(ConstraintClass::Separation) && attempt < config.separation_restarts => {
                attempt += 1;
            }
            other => return other,
        }
    }
}

fn plan_from_seed(s: &Scenario, config: &PlannerConfig, theta: f64, seed: u64) -> Result<PlanSolution> {
    let mut trajectories = initial_trajectories(s, config.init_radius, config.init_height, config.kmeans_restarts, seed)?;
    let (mut assoc, mut schedule, mut value) = association_step(s, &trajectories, None)?;
    let mut objective_log = vec![value.network];
    let mut displacement_log = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        if iterations > 1 {
            let before = value.network;
            (assoc, schedule, value) = association_step(s, &trajectories, Some(&assoc))?;
            debug_assert!(value.network <= before + MONOTONICITY_TOLERANCE);
        }

        let previous = trajectories.clone();
        for (d, t) in trajectories.iter_mut().enumerate() {
            horizontal_sweep(t, &schedule.slot_table(d), s)?;
        }
        for (d, t) in trajectories.iter_mut().enumerate() {
            height_sweep(t, &schedule.slot_table(d), s, theta)?;
        }
        let after = objective_value(&assoc, &schedule, &trajectories, s);
        debug_assert!(
            after.network <= value.network + MONOTONICITY_TOLERANCE,
            "trajectory step raised the objective from {} to {}",
            value.network,
            after.network
        );
        value = after;
        objective_log.push(value.network);

        let moved = previous
            .iter()
            .zip(&trajectories)
            .map(|(a, b)| a.max_displacement(b))
            .fold(0.0, f64::max);
        displacement_log.push(moved);
        if moved <= config.epsilon_w {
            converged = true;
            break;
        }
    }

    for t in &trajectories {
        if let Some(v) = validate_trajectory(t, s)?.first() {
            return Err(Error::Validation(format!("drone {}: {v}", t.drone_id)));
        }
    }
    let start_offsets = schedule_start_slots(&trajectories, s.n_slots, s.z_min)?;
    Ok(PlanSolution {
        association: assoc,
        schedule,
        fleet: FleetPlan::with_offsets(trajectories, start_offsets),
        objective: value,
        objective_log,
        displacement_log,
        iterations,
        converged,
        seed,
    })
}
