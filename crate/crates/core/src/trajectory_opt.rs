//! Per-slot coordinate updates of a single trajectory.
//!
//! With the schedule fixed, the pathloss of a slot depends only on that
//! slot's waypoint, while the kinematic limits couple it to its two cyclic
//! neighbours. Moving one waypoint at a time therefore reduces to a nearest
//! point problem in the plane and a clamp in height.

use crate::channel::{self, D2bEnv, HeightInterval};
use crate::error::{ConstraintClass, Error, Result};
use crate::scenario::{backhaul_ok, Point2, Point3, Scenario, Trajectory};

const DISK_SLACK: f64 = 1e-9;

/// Data of a single horizontal update.
#[derive(Debug, Clone, Copy)]
pub struct SlotContext {
    pub prev: Point2,
    pub next: Point2,
    pub current: Point2,
    /// Scheduled AoI position.
    pub target: Point2,
    pub height: f64,
    pub v_max: f64,
    pub r_bs: f64,
    pub d2b: D2bEnv,
}

#[derive(Debug, Clone, Copy)]
struct Disk {
    center: Point2,
    radius: f64,
}

impl Disk {
    fn contains(&self, p: &Point2) -> bool {
        p.distance(&self.center) <= self.radius + DISK_SLACK * self.radius.max(1.0)
    }

    /// Intersection points of the two boundary circles.
    fn boundary_crossings(&self, other: &Disk) -> Vec<Point2> {
        let d = self.center.distance(&other.center);
        let (r1, r2) = (self.radius, other.radius);
        if d == 0.0 || d > r1 + r2 || d < (r1 - r2).abs() {
            return Vec::new();
        }
        let along = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
        let off = (r1 * r1 - along * along).max(0.0).sqrt();
        let ux = (other.center.x - self.center.x) / d;
        let uy = (other.center.y - self.center.y) / d;
        let mx = self.center.x + along * ux;
        let my = self.center.y + along * uy;
        vec![
            Point2::new(mx - off * uy, my + off * ux),
            Point2::new(mx + off * uy, my - off * ux),
        ]
    }
}

/// Nearest and farthest points of the circle bounding `disk` from `p`.
fn circle_extremes(disk: &Disk, p: &Point2) -> Vec<Point2> {
    let d = p.distance(&disk.center);
    if d == 0.0 || disk.radius == 0.0 {
        return vec![Point2::new(disk.center.x + disk.radius, disk.center.y)];
    }
    let s = disk.radius / d;
    let dx = (p.x - disk.center.x) * s;
    let dy = (p.y - disk.center.y) * s;
    vec![
        Point2::new(disk.center.x + dx, disk.center.y + dy),
        Point2::new(disk.center.x - dx, disk.center.y - dy),
    ]
}

/// Point nearest to `target` inside both speed disks and the annulus
/// `inner <= |p| <= outer` around the origin, or `None` when that set is
/// empty. A minimizer is either the target itself, a critical point of the
/// distance on one boundary circle, or a crossing of two boundary circles,
/// so checking those candidates is exact.
fn nearest_in_region(speed: &[Disk; 2], inner: f64, outer: f64, target: &Point2) -> Option<Point2> {
    let mut circles = vec![speed[0], speed[1], Disk { center: Point2::ORIGIN, radius: outer }];
    if inner > 0.0 {
        circles.push(Disk { center: Point2::ORIGIN, radius: inner });
    }
    let mut candidates = vec![*target];
    for c in &circles {
        candidates.extend(circle_extremes(c, target));
    }
    for i in 0..circles.len() {
        for j in (i + 1)..circles.len() {
            candidates.extend(circles[i].boundary_crossings(&circles[j]));
        }
    }
    let slack = DISK_SLACK * outer.max(1.0);
    candidates
        .into_iter()
        .filter(|c| speed.iter().all(|d| d.contains(c)))
        .filter(|c| c.norm() <= outer + slack && c.norm() >= inner - slack)
        .min_by(|a, b| a.distance(target).total_cmp(&b.distance(target)))
}

/// Horizontal position of one slot nearest to its scheduled AoI.
///
/// Feasible positions lie within `v_max` of both neighbours and inside the
/// backhaul working zone at the current height, which is a union of annuli
/// around the base station. The current point is kept when nothing is closer.
pub fn optimize_slot_position(ctx: &SlotContext) -> Result<Point2> {
    let speed = [
        Disk {
            center: ctx.prev,
            radius: ctx.v_max,
        },
        Disk {
            center: ctx.next,
            radius: ctx.v_max,
        },
    ];
    let current_ok = speed.iter().all(|d| d.contains(&ctx.current));
    let mut best = current_ok.then_some(ctx.current);
    for (lo, hi) in channel::d2b_feasible_radii(ctx.height, &ctx.d2b, ctx.r_bs) {
        let Some(p) = nearest_in_region(&speed, lo, hi, &ctx.target) else { continue };
        let waypoint = Point3::new(p.x, p.y, ctx.height);
        if !backhaul_ok(&waypoint, &ctx.d2b) {
            continue;
        }
        if best.is_none_or(|b| p.distance(&ctx.target) < b.distance(&ctx.target)) {
            best = Some(p);
        }
    }
    best.ok_or_else(|| {
        Error::infeasible(
            ConstraintClass::Speed,
            "no position satisfies the speed and backhaul limits",
        )
    })
}

/// Height minimizing the pathloss at horizontal distance `r_du` within `bounds`.
pub fn optimize_slot_height(r_du: f64, bounds: &HeightInterval, theta_opt_deg: f64) -> Result<f64> {
    if bounds.is_empty() {
        return Err(Error::infeasible(ConstraintClass::Backhaul, "empty height interval"));
    }
    if r_du <= 0.0 {
        return Ok(bounds.lower);
    }
    Ok(bounds.clamp(r_du * theta_opt_deg.to_radians().tan()))
}

/// Sum of scheduled-slot pathloss of one trajectory.
pub fn drone_objective(t: &Trajectory, slots: &[Option<usize>], s: &Scenario) -> f64 {
    slots
        .iter()
        .enumerate()
        .filter_map(|(n, u)| u.map(|u| s.pathloss(t.at(n), u)))
        .sum()
}

fn neighbours(n: usize, len: usize) -> (usize, usize) {
    ((n + len - 1) % len, (n + 1) % len)
}

/// One in-order pass of horizontal slot updates.
pub fn horizontal_sweep(t: &mut Trajectory, slots: &[Option<usize>], s: &Scenario) -> Result<()> {
    let len = t.len();
    for n in 0..len {
        let Some(u) = slots[n] else { continue };
        let (p, q) = neighbours(n, len);
        let w = t.waypoints[n];
        let ctx = SlotContext {
            prev: t.waypoints[p].horizontal(),
            next: t.waypoints[q].horizontal(),
            current: w.horizontal(),
            target: s.aois[u],
            height: w.h,
            v_max: s.v_max,
            r_bs: s.r_bs,
            d2b: s.d2b,
        };
        let l = optimize_slot_position(&ctx)?;
        t.waypoints[n] = Point3::new(l.x, l.y, w.h);
    }
    Ok(())
}

/// Height interval of slot `n` from the backhaul cap, the altitude floor and
/// the climb limit towards both neighbours.
pub fn slot_height_bounds(t: &Trajectory, n: usize, s: &Scenario) -> HeightInterval {
    let w = &t.waypoints[n];
    let mut bounds = s.height_bounds(&w.horizontal());
    if t.len() > 1 {
        let (p, q) = neighbours(n, t.len());
        for k in [p, q] {
            let h = t.waypoints[k].h;
            bounds = bounds.intersect(&HeightInterval::new(h - s.h_max_rate, h + s.h_max_rate));
        }
    }
    bounds
}

/// One in-order pass of height updates.
pub fn height_sweep(t: &mut Trajectory, slots: &[Option<usize>], s: &Scenario, theta_opt_deg: f64) -> Result<()> {
    for n in 0..t.len() {
        let Some(u) = slots[n] else { continue };
        let bounds = slot_height_bounds(t, n, s);
        if bounds.is_empty() {
            // The current height is feasible, so emptiness is rounding at a bound.
            continue;
        }
        let w = t.waypoints[n];
        let r_du = w.horizontal().distance(&s.aois[u]);
        let h = optimize_slot_height(r_du, &bounds, theta_opt_deg)?;
        // Keep the old height if rounding makes the clamp no better.
        if s.pathloss(&Point3::new(w.x, w.y, h), u) <= s.pathloss(&w, u) {
            t.waypoints[n].h = h;
        }
    }
    Ok(())
}

/// Horizontal pass followed by a height pass.
pub fn sweep_update(t: &Trajectory, slots: &[Option<usize>], s: &Scenario, theta_opt_deg: f64) -> Result<Trajectory> {
    let mut out = t.clone();
    horizontal_sweep(&mut out, slots, s)?;
    height_sweep(&mut out, slots, s, theta_opt_deg)?;
    Ok(out)
}
