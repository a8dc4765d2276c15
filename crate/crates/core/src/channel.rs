//! Air-to-ground channel models.
//!
//! Two links are modelled. The drone-to-user (D2U) link uses a sigmoid LoS
//! probability in the elevation angle and averages the LoS/NLoS excess losses
//! on top of free-space pathloss. The drone-to-BS (D2B) link uses a
//! log-distance term plus an angle-dependent excess term and is capped at a
//! backhaul pathloss limit, which carves out the drone's working zone.
//!
//! All elevation angles are in degrees and all logarithms are base 10.

use std::f64::consts::{LN_10, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Convergence tolerance of the elevation-angle Newton iteration, degrees.
pub const ELEVATION_TOLERANCE_DEG: f64 = 1e-6;

const DEG: f64 = PI / 180.0;
const BISECTION_STEPS: usize = 100;
/// Grid size of the radial scan of the backhaul working zone.
const RADIUS_SAMPLES: usize = 256;

/// D2U environment constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct D2uEnv {
    /// LoS sigmoid scale.
    pub a: f64,
    /// LoS sigmoid slope, per degree.
    pub b: f64,
    /// Excess loss on LoS links, dB.
    pub eta_los: f64,
    /// Excess loss on NLoS links, dB.
    pub eta_nlos: f64,
    /// Carrier frequency, Hz.
    pub carrier_hz: f64,
}

impl D2uEnv {
    /// Suburban constants at 2.4 GHz.
    pub const SUBURBAN: D2uEnv = D2uEnv {
        a: 4.88,
        b: 0.43,
        eta_los: 0.1,
        eta_nlos: 21.0,
        carrier_hz: 2.4e9,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.carrier_hz > 0.0) {
            return Err(Error::InvalidParameter(
                "D2U constants a, b and carrier frequency must be positive".into(),
            ));
        }
        if self.eta_nlos < self.eta_los {
            return Err(Error::InvalidParameter(
                "NLoS excess loss must not be below LoS excess loss".into(),
            ));
        }
        Ok(())
    }

    /// Free-space pathloss at 3D distance `d`, dB.
    pub fn free_space_db(&self, d: f64) -> f64 {
        20.0 * (4.0 * PI * self.carrier_hz * d / SPEED_OF_LIGHT).log10()
    }

    fn los_sigmoid(&self, theta_deg: f64) -> f64 {
        1.0 / (1.0 + self.a * (-self.b * (theta_deg - self.a)).exp())
    }
}

impl Default for D2uEnv {
    fn default() -> Self {
        D2uEnv::SUBURBAN
    }
}

/// D2B environment constants and the backhaul pathloss cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct D2bEnv {
    /// Terrestrial pathloss exponent.
    pub alpha: f64,
    /// Excess pathloss scalar, dB.
    pub excess_scale: f64,
    /// Angle offset, degrees.
    pub angle_offset_deg: f64,
    /// Angle scalar, degrees.
    pub angle_scale_deg: f64,
    /// Excess pathloss offset, dB.
    pub excess_offset: f64,
    /// Backhaul pathloss cap, dB.
    pub max_pathloss_db: f64,
}

impl D2bEnv {
    /// Suburban constants with an 80 dB backhaul cap.
    pub const SUBURBAN: D2bEnv = D2bEnv {
        alpha: 3.04,
        excess_scale: -23.29,
        angle_offset_deg: -3.61,
        angle_scale_deg: 4.14,
        excess_offset: 20.7,
        max_pathloss_db: 80.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.angle_scale_deg > 0.0) {
            return Err(Error::InvalidParameter(
                "D2B exponent and angle scalar must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn with_cap(mut self, max_pathloss_db: f64) -> Self {
        self.max_pathloss_db = max_pathloss_db;
        self
    }

    /// Angle-dependent excess term of the D2B model.
    pub fn excess_db(&self, theta_deg: f64) -> f64 {
        let shifted = theta_deg - self.angle_offset_deg;
        self.excess_scale * shifted * (-shifted / self.angle_scale_deg).exp()
    }

    /// Stationary point of the excess term (its minimum for a negative scalar).
    pub fn excess_extremum_deg(&self) -> f64 {
        self.angle_offset_deg + self.angle_scale_deg
    }

    fn distance_db(&self, r_db: f64) -> f64 {
        10.0 * self.alpha * r_db.log10() + self.excess_offset
    }
}

impl Default for D2bEnv {
    fn default() -> Self {
        D2bEnv::SUBURBAN
    }
}

/// Feasible flying heights at one horizontal position, `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightInterval {
    pub lower: f64,
    pub upper: f64,
}

impl HeightInterval {
    pub const EMPTY: HeightInterval = HeightInterval {
        lower: f64::INFINITY,
        upper: f64::NEG_INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        HeightInterval { lower, upper }
    }

    pub fn unbounded() -> Self {
        HeightInterval::new(0.0, f64::INFINITY)
    }

    pub fn is_empty(&self) -> bool {
        !(self.lower <= self.upper)
    }

    pub fn contains(&self, h: f64) -> bool {
        !self.is_empty() && h >= self.lower && h <= self.upper
    }

    pub fn intersect(&self, other: &HeightInterval) -> HeightInterval {
        let lower = self.lower.max(other.lower);
        let upper = self.upper.min(other.upper);
        if lower <= upper {
            HeightInterval { lower, upper }
        } else {
            HeightInterval::EMPTY
        }
    }

    pub fn clamp(&self, h: f64) -> f64 {
        h.max(self.lower).min(self.upper)
    }
}

/// Elevation angle in degrees of a point at height `h` seen from horizontal
/// distance `r`. A point straight overhead maps to 90°.
pub fn elevation_deg(r: f64, h: f64) -> Result<f64> {
    if !(r >= 0.0 && h >= 0.0) {
        return Err(Error::UndefinedGeometry("negative distance or height"));
    }
    if r == 0.0 && h == 0.0 {
        return Err(Error::UndefinedGeometry("coincident endpoints"));
    }
    Ok(h.atan2(r) / DEG)
}

pub fn los_probability(r_du: f64, h: f64, env: &D2uEnv) -> Result<f64> {
    let theta = elevation_deg(r_du, h)?;
    Ok(env.los_sigmoid(theta))
}

/// Mean D2U pathloss in dB.
pub fn d2u_pathloss(r_du: f64, h: f64, env: &D2uEnv) -> Result<f64> {
    let p_los = los_probability(r_du, h, env)?;
    let d = r_du.hypot(h);
    Ok(env.free_space_db(d) + p_los * env.eta_los + (1.0 - p_los) * env.eta_nlos)
}

/// D2B pathloss in dB for horizontal distance `r_db` and elevation `theta_deg`.
pub fn d2b_pathloss(r_db: f64, theta_deg: f64, env: &D2bEnv) -> Result<f64> {
    if !(r_db > 0.0) {
        return Err(Error::UndefinedGeometry(
            "non-positive horizontal distance to the base station",
        ));
    }
    Ok(env.distance_db(r_db) + env.excess_db(theta_deg))
}

/// D2B pathloss of a drone at horizontal distance `r_db` and height `h`.
pub fn d2b_pathloss_at(r_db: f64, h: f64, env: &D2bEnv) -> Result<f64> {
    let theta = elevation_deg(r_db, h)?;
    d2b_pathloss(r_db, theta, env)
}

/// Whether a drone at (`r_db`, `h`) meets the backhaul cap.
///
/// A drone directly above the antenna is always feasible (the log-distance
/// term diverges to minus infinity).
pub fn backhaul_feasible(r_db: f64, h: f64, env: &D2bEnv) -> bool {
    if r_db <= 0.0 || env.max_pathloss_db == f64::INFINITY {
        return true;
    }
    match d2b_pathloss_at(r_db, h, env) {
        Ok(pl) => pl <= env.max_pathloss_db,
        Err(_) => false,
    }
}

/// Angle part `F(θ)` of the D2U pathloss once the `r`-dependent terms are
/// split off: `20·log10(sec θ) + (η_LoS − η_NLoS) / (1 + a·exp(−b(θ − a)))`.
pub fn elevation_objective(theta_deg: f64, env: &D2uEnv) -> f64 {
    -20.0 * (theta_deg * DEG).cos().log10() + (env.eta_los - env.eta_nlos) * env.los_sigmoid(theta_deg)
}

/// dF/dθ per degree.
pub fn elevation_objective_slope(theta_deg: f64, env: &D2uEnv) -> f64 {
    let g = env.a * (-env.b * (theta_deg - env.a)).exp();
    let spread = env.eta_los - env.eta_nlos;
    20.0 / LN_10 * (theta_deg * DEG).tan() * DEG + spread * env.b * g / (1.0 + g).powi(2)
}

/// d²F/dθ² per degree squared.
pub fn elevation_objective_curvature(theta_deg: f64, env: &D2uEnv) -> f64 {
    let g = env.a * (-env.b * (theta_deg - env.a)).exp();
    let spread = env.eta_los - env.eta_nlos;
    let sec = 1.0 / (theta_deg * DEG).cos();
    20.0 / LN_10 * sec * sec * DEG * DEG + spread * env.b * env.b * g * (g - 1.0) / (1.0 + g).powi(3)
}

/// Lower end of the bracket holding the unique stationary point of `F`.
pub fn elevation_bracket_floor(env: &D2uEnv) -> f64 {
    (env.a + env.a.ln() / env.b).max(0.0)
}

/// Elevation angle minimizing the D2U pathloss at any fixed horizontal distance.
///
/// Newton iteration on `F'` safeguarded by a sign bracket; steps leaving the
/// bracket fall back to bisection. Returns 0° when the NLoS excess does not
/// exceed the LoS excess, since `F` is then non-decreasing.
pub fn optimal_elevation_angle(env: &D2uEnv) -> f64 {
    if env.eta_nlos <= env.eta_los {
        return 0.0;
    }
    let mut lo = elevation_bracket_floor(env);
    let mut hi = 90.0 - 1e-9;
    if elevation_objective_slope(lo, env) >= 0.0 {
        // The minimizer sits at or below the bracket floor; search from 0°.
        lo = 0.0;
        if elevation_objective_slope(lo, env) >= 0.0 {
            return 0.0;
        }
    }
    let mut theta = 0.5 * (lo + hi);
    for _ in 0..200 {
        let slope = elevation_objective_slope(theta, env);
        if slope < 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        let curvature = elevation_objective_curvature(theta, env);
        let newton = theta - slope / curvature;
        let next = if curvature > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - theta).abs();
        theta = next;
        if step <= ELEVATION_TOLERANCE_DEG {
            break;
        }
    }
    theta
}

// Boundary of a sublevel set on a monotone stretch. `inside` satisfies the
// predicate and `outside` does not; the returned point is on the inside.
fn bisect_boundary(mut inside: f64, mut outside: f64, feasible: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if feasible(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Heights at which a drone at horizontal distance `r_db` meets the backhaul cap.
///
/// The excess term is unimodal in the elevation angle, so the feasible angles
/// form one interval; its ends are located by bisection and mapped to heights.
/// An upper end at 90° maps to an unbounded height.
pub fn d2b_feasible_height_interval(r_db: f64, env: &D2bEnv) -> HeightInterval {
    if r_db <= 0.0 || env.max_pathloss_db == f64::INFINITY {
        return HeightInterval::unbounded();
    }
    let base = env.distance_db(r_db);
    let cap = env.max_pathloss_db;
    let ok = |theta: f64| base + env.excess_db(theta) <= cap;
    let pivot = env.excess_extremum_deg().clamp(0.0, 90.0);

    let (theta_lo, theta_hi) = if env.excess_scale < 0.0 {
        // Valley: decreasing on [0, pivot], increasing on [pivot, 90].
        if !ok(pivot) {
            return HeightInterval::EMPTY;
        }
        let lo = if ok(0.0) {
            0.0
        } else {
            bisect_boundary(pivot, 0.0, ok)
        };
        let hi = if ok(90.0) {
            90.0
        } else {
            bisect_boundary(pivot, 90.0, ok)
        };
        (lo, hi)
    } else if ok(0.0) {
        // Hill or flat: keep the stretch attached to the ground.
        let hi = if ok(90.0) && ok(pivot) {
            90.0
        } else if ok(pivot) {
            bisect_boundary(pivot, 90.0, ok)
        } else {
            bisect_boundary(0.0, pivot, ok)
        };
        (0.0, hi)
    } else if ok(90.0) {
        (bisect_boundary(90.0, pivot, ok), 90.0)
    } else {
        return HeightInterval::EMPTY;
    };

    let to_height = |theta: f64| {
        if theta >= 90.0 {
            f64::INFINITY
        } else {
            r_db * (theta * DEG).tan()
        }
    };
    let lower = to_height(theta_lo);
    let upper = to_height(theta_hi);
    // Conversion rounding can push an endpoint just outside the cap.
    let lower = if lower > 0.0 && !backhaul_feasible(r_db, lower, env) {
        lower * (1.0 + 1e-12) + 1e-12
    } else {
        lower
    };
    let upper = if upper.is_finite() && !backhaul_feasible(r_db, upper, env) {
        upper * (1.0 - 1e-12)
    } else {
        upper
    };
    HeightInterval::new(lower, upper)
}

/// Horizontal distances in `[0, r_cap]` where a drone at height `h` meets
/// the backhaul cap, as sorted disjoint closed intervals.
///
/// The pathloss is sampled on a uniform grid; local extrema between samples
/// are refined by golden-section search so thin feasible bands and narrow
/// pockets are not missed, and every sign change is bisected.
pub fn d2b_feasible_radii(h: f64, env: &D2bEnv, r_cap: f64) -> Vec<(f64, f64)> {
    if env.max_pathloss_db == f64::INFINITY {
        return vec![(0.0, r_cap)];
    }
    let margin = |r: f64| {
        if r <= 0.0 {
            f64::NEG_INFINITY
        } else {
            d2b_pathloss_at(r, h, env).unwrap_or(f64::INFINITY) - env.max_pathloss_db
        }
    };
    let ok = |r: f64| margin(r) <= 0.0;

    let mut samples: Vec<(f64, f64)> = (0..=RADIUS_SAMPLES)
        .map(|k| {
            let r = r_cap * k as f64 / RADIUS_SAMPLES as f64;
            (r, margin(r))
        })
        .collect();
    let mut extra = Vec::new();
    for w in samples.windows(3) {
        let (a, m) = (w[0], w[1]);
        let c = w[2];
        let is_min = m.1 <= a.1 && m.1 <= c.1 && m.1 > 0.0;
        let is_max = m.1 >= a.1 && m.1 >= c.1 && m.1 <= 0.0;
        if is_min {
            let r = golden_section(a.0, c.0, &margin);
            extra.push((r, margin(r)));
        } else if is_max {
            let r = golden_section(a.0, c.0, &|r| -margin(r));
            extra.push((r, margin(r)));
        }
    }
    samples.extend(extra);
    samples.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut out = Vec::new();
    let mut open: Option<f64> = None;
    for w in samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (a.1 <= 0.0, b.1 <= 0.0);
        if fa && open.is_none() {
            open = Some(a.0);
        }
        if fa && !fb {
            out.push((open.take().unwrap(), bisect_boundary(a.0, b.0, ok)));
        } else if !fa && fb {
            open = Some(bisect_boundary(b.0, a.0, ok));
        }
    }
    if let Some(lo) = open {
        out.push((lo, r_cap));
    }
    out
}

/// Outer radius of the backhaul working zone at height `h`, capped at
/// `r_cap`. Infeasible pockets nearer the antenna are ignored; returns 0 when
/// no radius is feasible.
pub fn d2b_feasible_horizontal_radius(h: f64, env: &D2bEnv, r_cap: f64) -> f64 {
    d2b_feasible_radii(h, env, r_cap).last().map_or(0.0, |iv| iv.1)
}

fn golden_section(mut lo: f64, mut hi: f64, f: &impl Fn(f64) -> f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= 1e-9 * hi.max(1.0) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}
