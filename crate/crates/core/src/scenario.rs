//! Scenario model, trajectories and constraint validators.
//!
//! The base station sits at the origin. AoIs are centers of square grid
//! cells inside the coverage disk. A trajectory is a cyclic sequence of one
//! waypoint per slot; the step from the last waypoint back to the first is
//! checked like any other step. Speeds are per slot.

use std::fmt;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{self, D2bEnv, D2uEnv};
use crate::error::{ConstraintClass, Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Geometric tolerance of every validator, meters.
pub const GEOMETRY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn at_height(&self, h: f64) -> Point3 {
        Point3::new(self.x, self.y, h)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, h: f64) -> Self {
        Point3 { x, y, h }
    }

    pub fn horizontal(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Point3::new(v[0], v[1], v[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.h]
    }
}

/// Euclidean distance between two waypoints.
pub fn slot_3d_distance(p: &Point3, q: &Point3) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dh = p.h - q.h;
    (dx * dx + dy * dy + dh * dh).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    /// Coverage radius of the base station, m.
    pub r_bs: f64,
    /// Grid cell side, m.
    pub grid_len: f64,
    /// AoI cell centers.
    pub aois: Vec<Point2>,
    pub n_drones: usize,
    pub n_slots: usize,
    /// Horizontal speed limit, m/slot.
    pub v_max: f64,
    /// Vertical speed limit, m/slot.
    pub h_max_rate: f64,
    /// Protect distance between drones, m.
    pub z_min: f64,
    /// Minimum slots per served AoI.
    pub s_min: usize,
    /// Maximum AoIs per drone.
    pub capacity: usize,
    /// Lowest admissible flying height, m.
    pub min_altitude: f64,
    pub d2u: D2uEnv,
    pub d2b: D2bEnv,
    pub seed: u64,
}

impl Default for Scenario {
    /// Simulation defaults with five drones at 90 m/slot and no AoIs.
    fn default() -> Self {
        Scenario {
            schema_version: SCHEMA_VERSION,
            r_bs: 900.0,
            grid_len: 20.0,
            aois: Vec::new(),
            n_drones: 5,
            n_slots: 60,
            v_max: 90.0,
            h_max_rate: 10.0,
            z_min: 200.0,
            s_min: 10,
            capacity: 6,
            min_altitude: 20.0,
            d2u: D2uEnv::SUBURBAN,
            d2b: D2bEnv::SUBURBAN,
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn n_aois(&self) -> usize {
        self.aois.len()
    }

    /// Per-drone AoI limit combining the capacity and the minimum service time.
    pub fn effective_capacity(&self) -> usize {
        if self.s_min == 0 {
            self.capacity
        } else {
            self.capacity.min(self.n_slots / self.s_min)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Structure(format!(
                "unsupported scenario schema version {}",
                self.schema_version
            )));
        }
        self.d2u.validate()?;
        self.d2b.validate()?;
        if self.n_slots == 0 {
            return Err(Error::InvalidParameter("slot count must be positive".into()));
        }
        if self.s_min > self.n_slots {
            return Err(Error::InvalidParameter(
                "minimum service slots exceed the period".into(),
            ));
        }
        if !(self.r_bs > 0.0 && self.grid_len > 0.0) {
            return Err(Error::InvalidParameter(
                "coverage radius and grid size must be positive".into(),
            ));
        }
        if !(self.v_max >= 0.0 && self.h_max_rate >= 0.0 && self.z_min >= 0.0) {
            return Err(Error::InvalidParameter("kinematic limits must be non-negative".into()));
        }
        if !(self.min_altitude > 0.0) {
            return Err(Error::InvalidParameter("minimum altitude must be positive".into()));
        }
        if let Some(p) = self.aois.iter().find(|p| p.norm() > self.r_bs + GEOMETRY_TOLERANCE) {
            return Err(Error::InvalidParameter(format!(
                "AoI ({}, {}) outside coverage radius",
                p.x, p.y
            )));
        }
        Ok(())
    }

    /// Fails when the fleet cannot own every AoI.
    pub fn check_capacity(&self) -> Result<()> {
        let cap = self.effective_capacity();
        if cap * self.n_drones < self.n_aois() {
            return Err(Error::infeasible(
                ConstraintClass::Capacity,
                format!(
                    "{} drones with at most {} AoIs each cannot cover {} AoIs",
                    self.n_drones,
                    cap,
                    self.n_aois()
                ),
            ));
        }
        Ok(())
    }

    /// Centers of all grid cells inside the coverage disk, row-major.
    pub fn grid_cells(&self) -> Vec<Point2> {
        let half = (self.r_bs / self.grid_len).ceil() as i64;
        let mut cells = Vec::new();
        for j in -half..half {
            for i in -half..half {
                let c = Point2::new(
                    (i as f64 + 0.5) * self.grid_len,
                    (j as f64 + 0.5) * self.grid_len,
                );
                if c.norm() <= self.r_bs {
                    cells.push(c);
                }
            }
        }
        cells
    }

    /// Pathloss from a waypoint to AoI `u`.
    pub fn pathloss(&self, w: &Point3, u: usize) -> f64 {
        let r = w.horizontal().distance(&self.aois[u]);
        channel::d2u_pathloss(r, w.h, &self.d2u).unwrap_or(f64::INFINITY)
    }

    /// Backhaul-feasible height range at a horizontal position, floored at
    /// the minimum altitude.
    pub fn height_bounds(&self, p: &Point2) -> channel::HeightInterval {
        channel::d2b_feasible_height_interval(p.norm(), &self.d2b)
            .intersect(&channel::HeightInterval::new(self.min_altitude, f64::INFINITY))
    }

    pub fn with_aois(mut self, aois: Vec<Point2>) -> Self {
        self.aois = aois;
        self
    }
}

/// Draw `n_aois` distinct grid cells uniformly at random.
pub fn generate_scenario(seed: u64, n_aois: usize, n_drones: usize, template: &Scenario) -> Result<Scenario> {
    let cells = template.grid_cells();
    if n_aois > cells.len() {
        return Err(Error::infeasible(
            ConstraintClass::Capacity,
            format!("{} AoIs requested but the grid holds {} cells", n_aois, cells.len()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let aois = index::sample(&mut rng, cells.len(), n_aois)
        .into_iter()
        .map(|i| cells[i])
        .collect();
    Ok(Scenario {
        aois,
        n_drones,
        seed,
        ..template.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub drone_id: usize,
    pub waypoints: Vec<Point3>,
}

impl Trajectory {
    /// `n` waypoints spaced uniformly on a horizontal circle.
    pub fn circle(drone_id: usize, center: Point2, radius: f64, height: f64, n: usize) -> Self {
        let waypoints = (0..n)
            .map(|k| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                Point3::new(center.x + radius * phi.cos(), center.y + radius * phi.sin(), height)
            })
            .collect();
        Trajectory { drone_id, waypoints }
    }

    pub fn hover(drone_id: usize, at: Point3, n: usize) -> Self {
        Trajectory {
            drone_id,
            waypoints: vec![at; n],
        }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Waypoint at slot `n`, cyclically.
    pub fn at(&self, n: usize) -> &Point3 {
        &self.waypoints[n % self.waypoints.len()]
    }

    /// Largest 3D displacement between matching waypoints.
    pub fn max_displacement(&self, other: &Trajectory) -> f64 {
        self.waypoints
            .iter()
            .zip(&other.waypoints)
            .map(|(p, q)| slot_3d_distance(p, q))
            .fold(0.0, f64::max)
    }
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetPlan {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub trajectories: Vec<Trajectory>,
    /// Per-drone cyclic offset: drone `d` flies waypoint `(n + offset) mod N` in slot `n`.
    pub start_offsets: Vec<usize>,
}

impl FleetPlan {
    pub fn new(trajectories: Vec<Trajectory>) -> Self {
        let start_offsets = vec![0; trajectories.len()];
        FleetPlan::with_offsets(trajectories, start_offsets)
    }

    pub fn with_offsets(trajectories: Vec<Trajectory>, start_offsets: Vec<usize>) -> Self {
        FleetPlan {
            schema_version: SCHEMA_VERSION,
            trajectories,
            start_offsets,
        }
    }

    /// Position of drone `d` in global slot `n`.
    pub fn position(&self, d: usize, n: usize) -> &Point3 {
        self.trajectories[d].at(n + self.start_offsets[d])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Step from the last waypoint back to the first breaks a kinematic limit.
    Closure { horizontal: f64, vertical: f64 },
    Speed { slot: usize, step: f64 },
    Climb { slot: usize, step: f64 },
    Backhaul { slot: usize, pathloss: f64 },
    Coverage { slot: usize, radius: f64 },
    Altitude { slot: usize, height: f64 },
}

impl Violation {
    pub fn class(&self) -> ConstraintClass {
        match self {
            Violation::Closure { .. } | Violation::Speed { .. } | Violation::Coverage { .. } => {
                ConstraintClass::Speed
            }
            Violation::Climb { .. } | Violation::Altitude { .. } => ConstraintClass::Climb,
            Violation::Backhaul { .. } => ConstraintClass::Backhaul,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Closure { horizontal, vertical } => write!(
                f,
                "closing step of {horizontal:.6} m horizontal / {vertical:.6} m vertical exceeds limits"
            ),
            Violation::Speed { slot, step } => write!(f, "slot {slot}: horizontal step {step:.6} m"),
            Violation::Climb { slot, step } => write!(f, "slot {slot}: vertical step {step:.6} m"),
            Violation::Backhaul { slot, pathloss } => {
                write!(f, "slot {slot}: backhaul pathloss {pathloss:.4} dB")
            }
            Violation::Coverage { slot, radius } => {
                write!(f, "slot {slot}: {radius:.3} m from the base station")
            }
            Violation::Altitude { slot, height } => write!(f, "slot {slot}: height {height:.6} m"),
        }
    }
}

/// Backhaul check with the validator's geometric slack: a waypoint passes
/// if it, or a point within the tolerance of it, meets the cap.
pub fn backhaul_ok(w: &Point3, d2b: &D2bEnv) -> bool {
    let r = w.horizontal().norm();
    let t = GEOMETRY_TOLERANCE;
    let offsets = [0.0, -t, t];
    offsets
        .iter()
        .flat_map(|dr| offsets.iter().map(move |dh| (r + dr, w.h + dh)))
        .any(|(r, h)| r >= 0.0 && h >= 0.0 && channel::backhaul_feasible(r, h, d2b))
}

/// All constraint violations of one trajectory.
pub fn validate_trajectory(t: &Trajectory, s: &Scenario) -> Result<Vec<Violation>> {
    let n = t.len();
    if n != s.n_slots && n != 1 {
        return Err(Error::Structure(format!(
            "trajectory {} has {} waypoints, expected {}",
            t.drone_id, n, s.n_slots
        )));
    }
    let tol = GEOMETRY_TOLERANCE;
    let mut out = Vec::new();
    for k in 0..n {
        let w = &t.waypoints[k];
        let next = &t.waypoints[(k + 1) % n];
        let horizontal = w.horizontal().distance(&next.horizontal());
        let vertical = (next.h - w.h).abs();
        if k + 1 == n {
            if horizontal > s.v_max + tol || vertical > s.h_max_rate + tol {
                out.push(Violation::Closure { horizontal, vertical });
            }
        } else {
            if horizontal > s.v_max + tol {
                out.push(Violation::Speed { slot: k, step: horizontal });
            }
            if vertical > s.h_max_rate + tol {
                out.push(Violation::Climb { slot: k, step: vertical });
            }
        }
        let radius = w.horizontal().norm();
        if radius > s.r_bs + tol {
            out.push(Violation::Coverage { slot: k, radius });
        }
        if w.h < s.min_altitude - tol {
            out.push(Violation::Altitude { slot: k, height: w.h });
        }
        if !backhaul_ok(w, &s.d2b) {
            let pathloss = channel::d2b_pathloss_at(radius, w.h, &s.d2b).unwrap_or(f64::NAN);
            out.push(Violation::Backhaul { slot: k, pathloss });
        }
    }
    Ok(out)
}

/// Smallest pairwise 3D distance over all slots with offsets applied.
/// Infinite for fewer than two drones.
pub fn validate_separation(plan: &FleetPlan, s: &Scenario) -> f64 {
    let d = plan.trajectories.len();
    let mut best = f64::INFINITY;
    for n in 0..s.n_slots {
        for i in 0..d {
            for j in (i + 1)..d {
                best = best.min(slot_3d_distance(plan.position(i, n), plan.position(j, n)));
            }
        }
    }
    best
}
