//! Initial circle trajectories centered by k-means++ clustering of the AoIs.
//!
//! Distances are measured in pathloss: the excess of the D2U pathloss from a
//! center at the clustering height over the pathloss straight above the AoI.
//! A cluster center minimizes the summed pathloss to its members.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{self, HeightInterval};
use crate::error::{ConstraintClass, Error, Result};
use crate::scenario::{Point2, Scenario, Trajectory};

const LLOYD_ITERATIONS: usize = 100;
const CENTER_TOLERANCE: f64 = 1e-3;

struct PathlossMetric<'a> {
    s: &'a Scenario,
    height: f64,
    floor: f64,
}

impl<'a> PathlossMetric<'a> {
    fn new(s: &'a Scenario, height: f64) -> Self {
        let floor = channel::d2u_pathloss(0.0, height, &s.d2u).unwrap_or(0.0);
        PathlossMetric { s, height, floor }
    }

    fn pathloss(&self, c: &Point2, u: usize) -> f64 {
        channel::d2u_pathloss(c.distance(&self.s.aois[u]), self.height, &self.s.d2u).unwrap_or(f64::INFINITY)
    }

    fn distance(&self, c: &Point2, u: usize) -> f64 {
        (self.pathloss(c, u) - self.floor).max(0.0)
    }

    fn nearest(&self, centers: &[Point2], u: usize) -> (usize, f64) {
        centers
            .iter()
            .enumerate()
            .map(|(k, c)| (k, self.distance(c, u)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    /// Compass search for the point minimizing summed pathloss to `members`.
    fn center_of(&self, members: &[usize]) -> Point2 {
        let n = members.len() as f64;
        let mut c = Point2::new(
            members.iter().map(|&u| self.s.aois[u].x).sum::<f64>() / n,
            members.iter().map(|&u| self.s.aois[u].y).sum::<f64>() / n,
        );
        let cost = |p: &Point2| members.iter().map(|&u| self.pathloss(p, u)).sum::<f64>();
        let mut best = cost(&c);
        let mut step = members
            .iter()
            .map(|&u| self.s.aois[u].distance(&c))
            .fold(self.s.grid_len, f64::max);
        while step > CENTER_TOLERANCE {
            let mut moved = false;
            for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                let p = Point2::new(c.x + dx * step, c.y + dy * step);
                let v = cost(&p);
                if v < best {
                    best = v;
                    c = p;
                    moved = true;
                    break;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        c
    }
}

/// Result of one clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub centers: Vec<Point2>,
    pub labels: Vec<usize>,
    pub inertia: f64,
}

fn kmeans_once(metric: &PathlossMetric, k: usize, rng: &mut ChaCha8Rng) -> Clustering {
    let n = metric.s.n_aois();
    let mut centers = vec![metric.s.aois[rng.gen_range(0..n)]];
    while centers.len() < k {
        let weights: Vec<f64> = (0..n).map(|u| metric.nearest(&centers, u).1.powi(2)).collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = n - 1;
        for (u, w) in weights.iter().enumerate() {
            if pick < *w {
                chosen = u;
                break;
            }
            pick -= w;
        }
        centers.push(metric.s.aois[chosen]);
    }

    let mut labels = vec![usize::MAX; n];
    for _ in 0..LLOYD_ITERATIONS {
        let next: Vec<usize> = (0..n).map(|u| metric.nearest(&centers, u).0).collect();
        if next == labels {
            break;
        }
        labels = next;
        for (j, c) in centers.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&u| labels[u] == j).collect();
            if !members.is_empty() {
                *c = metric.center_of(&members);
            }
        }
    }
    let inertia = (0..n).map(|u| metric.nearest(&centers, u).1).sum();
    Clustering {
        centers,
        labels,
        inertia,
    }
}

/// k-means++ with restarts under the pathloss metric at `height`; the run
/// with the lowest inertia wins. May return fewer than `k` centers when
/// there are fewer distinct AoIs.
pub fn kmeans_pp(s: &Scenario, k: usize, height: f64, restarts: usize, seed: u64) -> Clustering {
    if s.aois.is_empty() || k == 0 {
        return Clustering {
            centers: Vec::new(),
            labels: vec![0; s.n_aois()],
            inertia: 0.0,
        };
    }
    let metric = PathlossMetric::new(s, height);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Clustering> = None;
    for _ in 0..restarts.max(1) {
        let run = kmeans_once(&metric, k.min(s.n_aois()), &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    best.expect("at least one restart")
}

/// Grid cell farthest from all existing centers.
fn farthest_cell(s: &Scenario, centers: &[Point2], margin: f64) -> Point2 {
    s.grid_cells()
        .into_iter()
        .filter(|c| c.norm() <= s.r_bs - margin)
        .map(|c| {
            let d = centers.iter().map(|o| o.distance(&c)).fold(f64::INFINITY, f64::min);
            (c, d)
        })
        .fold((Point2::ORIGIN, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0
}

/// Circle trajectories of radius `radius` around k-means++ centers.
///
/// The flying height is `height` clamped into the feasible heights of every
/// waypoint on the circle. Drones beyond the number of distinct AoIs are
/// centered on the grid cells farthest from the other centers.
pub fn initial_trajectories(
    s: &Scenario,
    radius: f64,
    height: f64,
    restarts: usize,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    if s.n_drones == 0 {
        return Err(Error::InvalidParameter("at least one drone is required".into()));
    }
    let mut centers = kmeans_pp(s, s.n_drones, height, restarts, seed).centers;
    while centers.len() < s.n_drones {
        let c = farthest_cell(s, &centers, radius);
        centers.push(c);
    }

    centers
        .into_iter()
        .enumerate()
        .map(|(d, c)| {
            // Keep the whole circle inside the coverage disk.
            let limit = (s.r_bs - radius).max(0.0);
            let c = if c.norm() > limit {
                Point2::new(c.x * limit / c.norm(), c.y * limit / c.norm())
            } else {
                c
            };
            let circle = Trajectory::circle(d, c, radius, 0.0, s.n_slots);
            let bounds = circle
                .waypoints
                .iter()
                .fold(HeightInterval::new(0.0, f64::INFINITY), |acc, w| {
                    acc.intersect(&s.height_bounds(&w.horizontal()))
                });
            if bounds.is_empty() {
                return Err(Error::infeasible(
                    ConstraintClass::Backhaul,
                    format!("no common feasible height on the initial circle of drone {d}"),
                ));
            }
            Ok(Trajectory::circle(d, c, radius, bounds.clamp(height), s.n_slots))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_scenario, validate_trajectory};

    #[test]
    fn one_cluster_per_aoi() {
        let s = generate_scenario(3, 6, 6, &Scenario::default()).unwrap();
        let c = kmeans_pp(&s, 6, 80.0, 10, 1);
        assert_eq!(c.centers.len(), 6);
        for (u, a) in s.aois.iter().enumerate() {
            let nearest = c.centers.iter().map(|x| x.distance(a)).fold(f64::INFINITY, f64::min);
            assert!(nearest <= s.grid_len, "AoI {u} is {nearest} m from every center");
        }
    }

    #[test]
    fn initial_circles_are_valid_and_deterministic() {
        let s = generate_scenario(9, 20, 5, &Scenario::default()).unwrap();
        let a = initial_trajectories(&s, 1.0, 80.0, 10, 4).unwrap();
        let b = initial_trajectories(&s, 1.0, 80.0, 10, 4).unwrap();
        assert_eq!(a, b);
        for t in &a {
            assert!(validate_trajectory(t, &s).unwrap().is_empty());
            let step = t.waypoints[0].horizontal().distance(&t.waypoints[1].horizontal());
            assert!((step - 2.0 * (std::f64::consts::PI / 60.0).sin()).abs() < 1e-12);
            assert!(step <= 30.0);
        }
    }

    #[test]
    fn surplus_drones_get_distinct_centers() {
        let s = generate_scenario(2, 2, 4, &Scenario::default()).unwrap();
        let t = initial_trajectories(&s, 1.0, 80.0, 10, 0).unwrap();
        assert_eq!(t.len(), 4);
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert!(t[i].waypoints[0].horizontal().distance(&t[j].waypoints[0].horizontal()) > 1.0);
            }
        }
    }
}
