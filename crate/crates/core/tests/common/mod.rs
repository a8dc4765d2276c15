//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use dbs_planner::channel::{D2bEnv, D2uEnv};
use dbs_planner::scenario::{Point2, Point3, Scenario};
use dbs_planner::scheduling::blocks_for;

pub const C: f64 = 299_792_458.0;

/// D2U pathloss written out from the model formulas.
pub fn d2u(r: f64, h: f64, env: &D2uEnv) -> f64 {
    let theta = (h / r).atan().to_degrees();
    let p_los = 1.0 / (1.0 + env.a * (-env.b * (theta - env.a)).exp());
    let d = (r * r + h * h).sqrt();
    let fspl = 20.0 * d.log10() + 20.0 * env.carrier_hz.log10() + 20.0 * (4.0 * std::f64::consts::PI / C).log10();
    fspl + p_los * env.eta_los + (1.0 - p_los) * env.eta_nlos
}

/// D2B pathloss written out from the model formulas.
pub fn d2b(r: f64, h: f64, env: &D2bEnv) -> f64 {
    let theta = (h / r).atan().to_degrees();
    let x = theta - env.angle_offset_deg;
    10.0 * env.alpha * r.log10() + env.excess_scale * x * (-x / env.angle_scale_deg).exp() + env.excess_offset
}

/// Backhaul check with the geometric tolerance of the validators.
pub fn backhaul(r: f64, h: f64, env: &D2bEnv) -> bool {
    const T: f64 = 1e-6;
    [0.0, -T, T].iter().any(|dr| {
        [0.0, -T, T].iter().any(|dh| {
            let (r, h) = (r + dr, h + dh);
            r >= 0.0 && h >= 0.0 && (r <= 0.0 || d2b(r, h, env) <= env.max_pathloss_db)
        })
    })
}

pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Every owner map with at most `cap` tasks per agent, as (owners, cost).
/// Costs are summed in task order.
pub fn brute_association(cost: &[Vec<f64>], n_tasks: usize, cap: usize) -> (Vec<usize>, f64) {
    let agents = cost.len();
    let mut owner = vec![0; n_tasks];
    let mut best = (Vec::new(), f64::INFINITY);
    loop {
        let mut load = vec![0; agents];
        owner.iter().for_each(|&a| load[a] += 1);
        if load.iter().all(|&l| l <= cap) {
            let c = association_total(cost, &owner);
            if c < best.1 {
                best = (owner.clone(), c);
            }
        }
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == n_tasks {
                return best;
            }
            owner[k] += 1;
            if owner[k] < agents {
                break;
            }
            owner[k] = 0;
            k += 1;
        }
    }
}

pub fn association_total(cost: &[Vec<f64>], owner: &[usize]) -> f64 {
    owner.iter().enumerate().map(|(u, &d)| cost[d][u]).sum()
}

/// Total pathloss of a slot labeling; `rows[i][n]` is the cost of serving
/// AoI `i` in slot `n`.
pub fn labeling_cost(rows: &[Vec<f64>], labels: &[usize]) -> f64 {
    labels.iter().enumerate().map(|(n, &i)| rows[i][n]).sum()
}

/// Whether each label forms one cyclic run whose lengths follow the fair
/// block rule and the minimum service time.
fn fair_contiguous(labels: &[usize], m: usize, s_min: usize) -> bool {
    let n = labels.len();
    let mut lengths = vec![0; m];
    let mut runs = vec![0; m];
    for k in 0..n {
        lengths[labels[k]] += 1;
        if labels[k] != labels[(k + n - 1) % n] {
            runs[labels[k]] += 1;
        }
    }
    if m == 1 {
        return lengths[0] == n && n >= s_min;
    }
    let mut want = blocks_for(n, m);
    let mut got = lengths.clone();
    want.sort_unstable();
    got.sort_unstable();
    runs.iter().all(|&r| r == 1) && got == want && got.iter().all(|&l| l >= s_min)
}

/// Exhaustive best fair contiguous labeling of `n` slots with `rows.len()` AoIs.
pub fn brute_schedule(rows: &[Vec<f64>], n: usize, s_min: usize) -> Option<(Vec<usize>, f64)> {
    let m = rows.len();
    let mut labels = vec![0; n];
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        if fair_contiguous(&labels, m, s_min) {
            let c = labeling_cost(rows, &labels);
            if best.as_ref().is_none_or(|b| c < b.1) {
                best = Some((labels.clone(), c));
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            labels[k] += 1;
            if labels[k] < m {
                break;
            }
            labels[k] = 0;
            k += 1;
        }
    }
}

/// Feasibility of a horizontal candidate for a slot update.
pub fn slot_feasible(p: &Point2, prev: &Point2, next: &Point2, v: f64, h: f64, r_bs: f64, env: &D2bEnv) -> bool {
    let tol = 1e-9 * v.max(1.0);
    p.distance(prev) <= v + tol && p.distance(next) <= v + tol && p.norm() <= r_bs + 1e-9 * r_bs && backhaul(p.norm(), h, env)
}

/// Distance to `target` of the best point on a `step` grid inside the box,
/// or `None` when no grid point is feasible.
fn grid_best(
    lo: Point2,
    hi: Point2,
    step: f64,
    feasible: &impl Fn(&Point2) -> bool,
    target: &Point2,
) -> Vec<(f64, Point2)> {
    let nx = ((hi.x - lo.x) / step).ceil() as usize + 1;
    let ny = ((hi.y - lo.y) / step).ceil() as usize + 1;
    let mut out = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let p = Point2::new(lo.x + i as f64 * step, lo.y + j as f64 * step);
            if feasible(&p) {
                out.push((p.distance(target), p));
            }
        }
    }
    out
}

/// Grid search for the feasible point nearest to `target`: a coarse pass over
/// the intersection of the two speed disks, then a 0.01 m pass around every
/// coarse point within reach of the coarse optimum.
pub fn grid_nearest(prev: &Point2, next: &Point2, v: f64, h: f64, r_bs: f64, env: &D2bEnv, target: &Point2) -> Option<(f64, Point2)> {
    let feasible = |p: &Point2| slot_feasible(p, prev, next, v, h, r_bs, env);
    let lo = Point2::new(prev.x.max(next.x) - v, prev.y.max(next.y) - v);
    let hi = Point2::new(prev.x.min(next.x) + v, prev.y.min(next.y) + v);
    let coarse_step = 0.1;
    let mut coarse = grid_best(lo, hi, coarse_step, &feasible, target);
    coarse.sort_by(|a, b| a.0.total_cmp(&b.0));
    let best = coarse.first()?.0;
    let mut result: Option<(f64, Point2)> = None;
    for &(d, p) in coarse.iter().take_while(|c| c.0 <= best + 2.0 * coarse_step) {
        let w = coarse_step;
        let fine = grid_best(Point2::new(p.x - w, p.y - w), Point2::new(p.x + w, p.y + w), 0.01, &feasible, target);
        for f in fine.into_iter().chain(std::iter::once((d, p))) {
            if result.is_none_or(|r| f.0 < r.0) {
                result = Some(f);
            }
        }
    }
    result
}

/// Height on a 0.01 m grid minimizing the D2U pathloss at horizontal distance `r`.
pub fn grid_height(r: f64, lower: f64, upper: f64, env: &D2uEnv) -> f64 {
    let n = ((upper - lower) / 0.01).floor() as usize;
    let mut best = (f64::INFINITY, lower);
    for k in 0..=n {
        let h = (lower + k as f64 * 0.01).min(upper);
        if h <= 0.0 && r <= 0.0 {
            continue;
        }
        let p = d2u(r, h, env);
        if p < best.0 {
            best = (p, h);
        }
    }
    let p = d2u(r, upper, env);
    if p < best.0 {
        best = (p, upper);
    }
    best.1
}

/// Smallest pairwise 3D distance over all slots with cyclic offsets applied.
pub fn min_separation(waypoints: &[Vec<Point3>], offsets: &[usize]) -> f64 {
    let n = waypoints.first().map_or(0, Vec::len);
    let mut best = f64::INFINITY;
    for slot in 0..n {
        for i in 0..waypoints.len() {
            for j in (i + 1)..waypoints.len() {
                let p = waypoints[i][(slot + offsets[i]) % n];
                let q = waypoints[j][(slot + offsets[j]) % n];
                let d = ((p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.h - q.h).powi(2)).sqrt();
                best = best.min(d);
            }
        }
    }
    best
}

/// Violated constraint names of one closed trajectory.
pub fn trajectory_violations(w: &[Point3], s: &Scenario) -> Vec<String> {
    let tol = 1e-6;
    let mut out = Vec::new();
    let n = w.len();
    if n != s.n_slots {
        out.push(format!("length {n}"));
    }
    for k in 0..n {
        let (p, q) = (w[k], w[(k + 1) % n]);
        let dxy = ((q.x - p.x).powi(2) + (q.y - p.y).powi(2)).sqrt();
        if dxy > s.v_max + tol {
            out.push(format!("speed {dxy} at {k}"));
        }
        if (q.h - p.h).abs() > s.h_max_rate + tol {
            out.push(format!("climb {} at {k}", (q.h - p.h).abs()));
        }
        if !backhaul(p.horizontal().norm(), p.h, &s.d2b) {
            out.push(format!("backhaul at {k}"));
        }
        if p.h < s.min_altitude - tol {
            out.push(format!("altitude {} at {k}", p.h));
        }
    }
    out
}
