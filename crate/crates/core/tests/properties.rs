mod common;

use dbs_planner::assignment::{brute_force_assignment, capacity_assignment, min_cost_assignment, CostMatrix};
use dbs_planner::channel::{d2b_feasible_height_interval, elevation_objective, optimal_elevation_angle, D2bEnv, D2uEnv, HeightInterval};
use dbs_planner::init::initial_trajectories;
use dbs_planner::metrics::{empirical_cdf, mean_std};
use dbs_planner::scenario::{generate_scenario, validate_separation, validate_trajectory, FleetPlan, Point2, Point3, Scenario, Trajectory};
use dbs_planner::scheduling::{blocks_for, schedule_drone, Block};
use dbs_planner::trajectory_opt::{optimize_slot_height, optimize_slot_position, SlotContext};
use proptest::prelude::*;

use common::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = CostMatrix> {
    prop::collection::vec(-50.0..150.0f64, rows * cols).prop_map(move |d| CostMatrix::new(rows, cols, d).unwrap())
}

fn block_cost(costs: &[Vec<f64>], aois: &[usize], blocks: &[Block], n: usize) -> f64 {
    blocks
        .iter()
        .map(|b| {
            let i = aois.iter().position(|&a| a == b.aoi).unwrap();
            (0..b.len).map(|k| costs[i][(b.start + k) % n]).sum::<f64>()
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn block_lengths_are_fair(n in 1usize..200, m in 1usize..12) {
        let b = blocks_for(n, m);
        prop_assert_eq!(b.iter().sum::<usize>(), n);
        prop_assert!(b.iter().max().unwrap() - b.iter().min().unwrap() <= 1);
        prop_assert!(b.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn capacity_assignment_is_optimal(c in (1usize..4, 1usize..7).prop_flat_map(|(r, t)| matrix(r, t)), extra in 0usize..3) {
        let cap = c.cols().div_ceil(c.rows()) + extra;
        let a = capacity_assignment(&c, cap).unwrap();
        let b = brute_force_assignment(&c, cap).unwrap();
        prop_assert!((a.cost - b.cost).abs() < 1e-9);
        prop_assert!(a.load(c.rows()).iter().all(|&l| l <= cap));
    }

    #[test]
    fn hungarian_beats_any_permutation(c in (1usize..7).prop_flat_map(|n| matrix(n, n)), seed in any::<u64>()) {
        let a = min_cost_assignment(&c).unwrap();
        let n = c.rows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (x >> 33) as usize % (i + 1));
        }
        let other: f64 = perm.iter().enumerate().map(|(r, &k)| c.get(r, k)).sum();
        prop_assert!(a.cost <= other + 1e-9);
    }

    #[test]
    fn drone_schedule_is_exhaustive_optimum(
        (m, n, costs) in (1usize..4, 3usize..9).prop_flat_map(|(m, n)| (Just(m), Just(n.max(m)), prop::collection::vec(prop::collection::vec(60.0..120.0f64, n.max(m)), m)))
    ) {
        let aois: Vec<usize> = (0..m).map(|i| 10 + i).collect();
        let blocks = schedule_drone(&costs, &aois, n, 1).unwrap();
        let got = block_cost(&costs, &aois, &blocks, n);
        let (_, best) = brute_schedule(&costs, n, 1).unwrap();
        prop_assert!((got - best).abs() < 1e-9, "{} vs {}", got, best);
        // Never worse than the plain in-order layout from slot 0.
        let mut start = 0;
        let naive: Vec<Block> = blocks_for(n, m).iter().zip(&aois).map(|(&len, &aoi)| {
            let b = Block { aoi, start, len };
            start += len;
            b
        }).collect();
        prop_assert!(got <= block_cost(&costs, &aois, &naive, n) + 1e-9);
    }

    #[test]
    fn elevation_objective_is_quasi_convex(x in 0.0..89.9f64, y in 0.0..89.9f64, l in 0.0..=1.0f64) {
        let env = D2uEnv::SUBURBAN;
        let mid = elevation_objective(l * x + (1.0 - l) * y, &env);
        prop_assert!(mid <= elevation_objective(x, &env).max(elevation_objective(y, &env)) + 1e-9);
    }

    #[test]
    fn height_step_never_raises_pathloss(r in 0.0..900.0f64, r_db in 0.0..900.0f64, start in 0.0..1.0f64) {
        let env = D2uEnv::SUBURBAN;
        let bounds = d2b_feasible_height_interval(r_db, &D2bEnv::SUBURBAN).intersect(&HeightInterval::new(20.0, 2000.0));
        prop_assume!(!bounds.is_empty());
        let current = bounds.lower + start * (bounds.upper - bounds.lower);
        let h = optimize_slot_height(r, &bounds, optimal_elevation_angle(&env)).unwrap();
        prop_assert!(bounds.contains(h));
        prop_assert!(d2u(r, h, &env) <= d2u(r, current, &env) + 1e-9);
    }

    #[test]
    fn position_step_never_moves_away(
        h in 20.0..90.0f64, v in 1.0..60.0f64, r in 0.0..900.0f64, phi in 0.0..6.28f64,
        dp in (0.0..1.0f64, 0.0..6.28f64), dn in (0.0..1.0f64, 0.0..6.28f64), target in (-900.0..900.0f64, -900.0..900.0f64),
    ) {
        let d2b = D2bEnv::SUBURBAN;
        let current = Point2::new(r * phi.cos(), r * phi.sin());
        prop_assume!(backhaul(r, h, &d2b));
        let off = |(f, a): (f64, f64)| Point2::new(current.x + f * v * a.cos(), current.y + f * v * a.sin());
        let ctx = SlotContext {
            prev: off(dp),
            next: off(dn),
            current,
            target: Point2::new(target.0, target.1),
            height: h,
            v_max: v,
            r_bs: 900.0,
            d2b,
        };
        let p = optimize_slot_position(&ctx).unwrap();
        prop_assert!(p.distance(&ctx.target) <= current.distance(&ctx.target) + 1e-9);
        prop_assert!(slot_feasible(&p, &ctx.prev, &ctx.next, v, h, 900.0, &d2b));
    }

    #[test]
    fn separation_ignores_order_and_common_rotation(
        pts in prop::collection::vec((-500.0..500.0f64, -500.0..500.0f64, 20.0..100.0f64, 10.0..200.0f64), 2..5),
        offsets in prop::collection::vec(0usize..12, 5),
        shift in 0usize..12,
    ) {
        let s = Scenario { n_slots: 12, ..Scenario::default() };
        let trajectories: Vec<Trajectory> = pts.iter().enumerate()
            .map(|(d, &(x, y, h, r))| Trajectory::circle(d, Point2::new(x, y), r, h, 12)).collect();
        let k = trajectories.len();
        let plan = |ts: Vec<Trajectory>, offs: Vec<usize>| FleetPlan::with_offsets(ts, offs);
        let base = validate_separation(&plan(trajectories.clone(), offsets[..k].to_vec()), &s);
        let rotated = validate_separation(&plan(trajectories.clone(), offsets[..k].iter().map(|o| (o + shift) % 12).collect()), &s);
        let mut rev = trajectories.clone();
        rev.reverse();
        let mut rev_offs = offsets[..k].to_vec();
        rev_offs.reverse();
        let reversed = validate_separation(&plan(rev, rev_offs), &s);
        prop_assert!((base - rotated).abs() < 1e-9 && (base - reversed).abs() < 1e-9);
        let waypoints: Vec<Vec<Point3>> = trajectories.iter().map(|t| t.waypoints.clone()).collect();
        prop_assert!((base - min_separation(&waypoints, &offsets[..k])).abs() < 1e-9);
    }

    #[test]
    fn scenario_generation_is_pure_and_on_grid(seed in any::<u64>(), n in 0usize..40) {
        let a = generate_scenario(seed, n, 5, &Scenario::default()).unwrap();
        prop_assert_eq!(&a, &generate_scenario(seed, n, 5, &Scenario::default()).unwrap());
        let cells = a.grid_cells();
        for (i, p) in a.aois.iter().enumerate() {
            prop_assert!(p.norm() <= a.r_bs);
            prop_assert!(cells.contains(p));
            prop_assert!(!a.aois[..i].contains(p));
        }
    }

    #[test]
    fn initial_circles_are_valid(seed in any::<u64>(), n in 1usize..25, extra in 0usize..3) {
        let s = generate_scenario(seed, n, n.div_ceil(6) + extra, &Scenario::default()).unwrap();
        for t in initial_trajectories(&s, 1.0, 80.0, 2, seed).unwrap() {
            prop_assert!(validate_trajectory(&t, &s).unwrap().is_empty());
        }
    }

    #[test]
    fn cdf_and_std_are_well_formed(xs in prop::collection::vec(50.0..130.0f64, 1..60)) {
        let cdf = empirical_cdf(&xs);
        prop_assert!(cdf.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        prop_assert_eq!(cdf.last().unwrap().1, 1.0);
        prop_assert!(mean_std(&xs).1 >= 0.0);
    }
}
