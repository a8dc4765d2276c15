//! Static deployment baseline: one hover point per drone placed by
//! per-drone iterated particle swarm optimization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::{objective_value, Objective, PlanSolution};
use crate::scenario::{validate_trajectory, FleetPlan, Point2, Point3, Scenario, Trajectory};
use crate::scheduling::{optimize_association, optimize_schedule, Association, Schedule};

/// Highest altitude a particle may take (m).
const CEILING: f64 = 1000.0;
const PLACEMENT_ATTEMPTS: usize = 10_000;
/// Fitness penalty per metre of missing separation.
const SEPARATION_PENALTY: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub swarm: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub iterations: usize,
    /// Passes over all drones.
    pub rounds: usize,
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            swarm: 40,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
            iterations: 300,
            rounds: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticDeployment {
    pub positions: Vec<Point3>,
    pub association: Association,
    pub schedule: Schedule,
    pub objective: Objective,
    /// Objective of the random initial placement.
    pub initial_objective: Objective,
}

impl StaticDeployment {
    pub fn trajectories(&self, n_slots: usize) -> Vec<Trajectory> {
        hovers(&self.positions, n_slots)
    }

    /// The deployment as a plan of hovering trajectories.
    pub fn to_solution(&self, s: &Scenario) -> PlanSolution {
        PlanSolution {
            association: self.association.clone(),
            schedule: self.schedule.clone(),
            fleet: FleetPlan::new(self.trajectories(s.n_slots)),
            objective: self.objective,
            objective_log: vec![self.initial_objective.network, self.objective.network],
            displacement_log: Vec::new(),
            iterations: 1,
            converged: true,
            seed: 0,
        }
    }
}

fn hovers(positions: &[Point3], n_slots: usize) -> Vec<Trajectory> {
    positions
        .iter()
        .enumerate()
        .map(|(d, p)| Trajectory::hover(d, *p, n_slots))
        .collect()
}

struct Evaluation {
    association: Association,
    schedule: Schedule,
    objective: Objective,
    /// Total separation shortfall over all pairs (m).
    shortfall: f64,
}

impl Evaluation {
    fn better_than(&self, other: &Evaluation) -> bool {
        if self.shortfall != other.shortfall {
            return self.shortfall < other.shortfall;
        }
        self.objective.network < other.objective.network
    }
}

fn shortfall(positions: &[Point3], z_min: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            total += (z_min - crate::scenario::slot_3d_distance(&positions[i], &positions[j])).max(0.0);
        }
    }
    total
}

fn evaluate(s: &Scenario, positions: &[Point3]) -> Result<Evaluation> {
    let trajectories = hovers(positions, s.n_slots);
    let association = optimize_association(s, &trajectories)?;
    let schedule = optimize_schedule(s, &trajectories, &association)?;
    let objective = objective_value(&association, &schedule, &trajectories, s);
    Ok(Evaluation {
        association,
        schedule,
        objective,
        shortfall: shortfall(positions, s.z_min),
    })
}

/// Moves a particle into the coverage disk and its feasible heights.
/// Returns `None` when no height is feasible at the clamped location.
fn project(s: &Scenario, p: [f64; 3]) -> Option<[f64; 3]> {
    let mut xy = Point2::new(p[0], p[1]);
    let r = xy.norm();
    if r > s.r_bs {
        xy = Point2::new(xy.x * s.r_bs / r, xy.y * s.r_bs / r);
    }
    let bounds = s.height_bounds(&xy);
    if bounds.is_empty() {
        return None;
    }
    Some([xy.x, xy.y, bounds.clamp(p[2]).min(CEILING.max(bounds.lower))])
}

fn random_position(s: &Scenario, rng: &mut ChaCha8Rng) -> Option<[f64; 3]> {
    let r = s.r_bs * rng.gen::<f64>().sqrt();
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let h = rng.gen_range(s.min_altitude..s.min_altitude.max(150.0) + 1.0);
    project(s, [r * phi.cos(), r * phi.sin(), h])
}

/// Random initial placement, kept apart by rejection sampling when possible.
fn initial_positions(s: &Scenario, rng: &mut ChaCha8Rng) -> Vec<Point3> {
    let mut positions: Vec<Point3> = Vec::with_capacity(s.n_drones);
    while positions.len() < s.n_drones {
        let mut fallback = None;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let Some(p) = random_position(s, rng) else { continue };
            let p = Point3::new(p[0], p[1], p[2]);
            fallback.get_or_insert(p);
            if shortfall(&[&positions[..], &[p]].concat(), s.z_min) == 0.0 {
                fallback = Some(p);
                break;
            }
        }
        positions.push(fallback.unwrap_or(Point3::new(0.0, 0.0, s.min_altitude)));
    }
    positions
}

/// Swarm search for drone `d` against the fixed association and the other
/// drones. The first particle starts at the current position, so the result
/// is never worse than it.
fn pso_drone(s: &Scenario, positions: &[Point3], d: usize, assoc: &Association, params: &PsoParams, rng: &mut ChaCha8Rng) -> Point3 {
    let aois = assoc.aois_of(d);
    let fitness = |p: &[f64; 3]| -> f64 {
        let w = Point3::new(p[0], p[1], p[2]);
        let loss = if aois.is_empty() {
            0.0
        } else {
            aois.iter().map(|&u| s.pathloss(&w, u)).sum::<f64>() / aois.len() as f64
        };
        let gap: f64 = positions
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != d)
            .map(|(_, q)| (s.z_min - crate::scenario::slot_3d_distance(&w, q)).max(0.0))
            .sum();
        loss + SEPARATION_PENALTY * gap
    };

    let span = [2.0 * s.r_bs, 2.0 * s.r_bs, CEILING - s.min_altitude];
    let vmax: Vec<f64> = span.iter().map(|x| 0.2 * x).collect();
    let here = positions[d];
    let mut pos: Vec<[f64; 3]> = vec![[here.x, here.y, here.h]];
    while pos.len() < params.swarm.max(1) {
        if let Some(p) = random_position(s, rng) {
            pos.push(p);
        }
    }
    let mut vel: Vec<[f64; 3]> = (0..pos.len())
        .map(|_| std::array::from_fn(|k| rng.gen_range(-vmax[k]..vmax[k]) * 0.1))
        .collect();
    let mut best_pos = pos.clone();
    let mut best_fit: Vec<f64> = pos.iter().map(&fitness).collect();
    let mut g = 0;
    for i in 1..pos.len() {
        if best_fit[i] < best_fit[g] {
            g = i;
        }
    }

    for _ in 0..params.iterations {
        for i in 0..pos.len() {
            let mut next = [0.0; 3];
            for k in 0..3 {
                let (r1, r2) = (rng.gen::<f64>(), rng.gen::<f64>());
                let v = params.inertia * vel[i][k]
                    + params.cognitive * r1 * (best_pos[i][k] - pos[i][k])
                    + params.social * r2 * (best_pos[g][k] - pos[i][k]);
                vel[i][k] = v.clamp(-vmax[k], vmax[k]);
                next[k] = pos[i][k] + vel[i][k];
            }
            let Some(p) = project(s, next) else { continue };
            pos[i] = p;
            let f = fitness(&p);
            if f < best_fit[i] {
                best_fit[i] = f;
                best_pos[i] = p;
                if f < best_fit[g] {
                    g = i;
                }
            }
        }
    }
    let b = best_pos[g];
    Point3::new(b[0], b[1], b[2])
}

/// Static hover points for every drone.
pub fn plan_static_pso(s: &Scenario, params: &PsoParams) -> Result<StaticDeployment> {
    s.validate()?;
    s.check_capacity()?;
    if params.swarm == 0 {
        return Err(Error::InvalidParameter("swarm must hold at least one particle".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut positions = initial_positions(s, &mut rng);
    let mut current = evaluate(s, &positions)?;
    let initial_objective = current.objective;

    for _ in 0..params.rounds {
        for d in 0..s.n_drones {
            let p = pso_drone(s, &positions, d, &current.association, params, &mut rng);
            let mut trial = positions.clone();
            trial[d] = p;
            let next = evaluate(s, &trial)?;
            if next.better_than(&current) {
                positions = trial;
                current = next;
            }
        }
    }

    if current.shortfall > 0.0 {
        return Err(Error::infeasible(
            crate::error::ConstraintClass::Separation,
            "static drones could not be placed the protect distance apart",
        ));
    }
    let deployment = StaticDeployment {
        positions,
        association: current.association,
        schedule: current.schedule,
        objective: current.objective,
        initial_objective,
    };
    for t in deployment.trajectories(s.n_slots) {
        if let Some(v) = validate_trajectory(&t, s)?.first() {
            return Err(Error::Validation(format!("drone {}: {v}", t.drone_id)));
        }
    }
    Ok(deployment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel;
    use crate::scenario::{generate_scenario, validate_separation};

    #[test]
    fn single_drone_hovers_over_its_aoi() {
        let aoi = Point2::new(-310.0, 450.0);
        let s = Scenario {
            n_drones: 1,
            ..Scenario::default().with_aois(vec![aoi])
        };
        let dep = plan_static_pso(&s, &PsoParams::default()).unwrap();
        let p = dep.positions[0];
        assert!(p.horizontal().distance(&aoi) < 1.0, "{p:?}");
        let h = s.height_bounds(&p.horizontal()).lower;
        assert!((p.h - h).abs() < 0.5, "{p:?} vs {h}");
        let best = channel::d2u_pathloss(0.0, s.height_bounds(&aoi).lower, &s.d2u).unwrap();
        assert!(dep.objective.served_mean - best < 0.1);
    }

    #[test]
    fn elitist_and_deterministic() {
        let s = generate_scenario(5, 20, 5, &Scenario::default()).unwrap();
        let params = PsoParams {
            iterations: 60,
            rounds: 1,
            seed: 9,
            ..PsoParams::default()
        };
        let a = plan_static_pso(&s, &params).unwrap();
        let b = plan_static_pso(&s, &params).unwrap();
        assert_eq!(a, b);
        assert!(a.objective.network <= a.initial_objective.network);
        let sol = a.to_solution(&s);
        assert!(validate_separation(&sol.fleet, &s) >= s.z_min);
        sol.schedule.validate(&sol.association, &s).unwrap();
    }
}
