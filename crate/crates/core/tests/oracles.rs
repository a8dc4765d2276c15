mod common;

use std::process::Command;

use dbs_planner::channel::{d2b_feasible_height_interval, d2b_pathloss_at, d2u_pathloss, D2bEnv, D2uEnv};
use dbs_planner::experiment::{parse_config, run_jobs};
use dbs_planner::init::initial_trajectories;
use dbs_planner::planner::PlanSolution;
use dbs_planner::scenario::{generate_scenario, validate_trajectory, Point2, Point3, Scenario, Trajectory};
use dbs_planner::scheduling::{optimize_association, optimize_schedule};
use dbs_planner::start_slots::schedule_start_slots;
use dbs_planner::trajectory_opt::{drone_objective, sweep_update};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

#[test]
fn pathloss_matches_written_out_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (u, b) = (D2uEnv::SUBURBAN, D2bEnv::SUBURBAN);
    for _ in 0..1000 {
        let r = rng.gen_range(0.5..1500.0);
        let h = rng.gen_range(0.5..800.0);
        assert!((d2u_pathloss(r, h, &u).unwrap() - d2u(r, h, &u)).abs() < 1e-9);
        assert!((d2b_pathloss_at(r, h, &b).unwrap() - d2b(r, h, &b)).abs() < 1e-9);
    }
}

#[test]
fn height_interval_matches_fine_scan() {
    let env = D2bEnv::SUBURBAN;
    for r in [30.0, 95.0, 200.0, 480.0, 650.0, 899.0] {
        let iv = d2b_feasible_height_interval(r, &env);
        let ok: Vec<f64> = (0..=20_000).map(|k| k as f64 * 0.05).filter(|&h| h > 0.0 && d2b(r, h, &env) <= 80.0).collect();
        let (lo, hi) = (ok.first().copied().unwrap_or(0.0), ok.last().copied().unwrap());
        assert!((iv.lower - lo).abs() <= 0.05 || iv.lower == 0.0 && lo <= 0.05, "r {r}: {iv:?} vs {lo}");
        if hi >= 1000.0 {
            assert!(iv.upper >= 1000.0, "r {r}: {iv:?}");
        } else {
            assert!((iv.upper - hi).abs() <= 0.05, "r {r}: {iv:?} vs {hi}");
        }
    }
}

#[test]
fn start_slots_match_exhaustive_offsets() {
    let n = 12;
    let circle = |c: Point2| Trajectory::circle(0, c, 150.0, 60.0, n);
    let trajectories = vec![circle(Point2::new(0.0, 0.0)), circle(Point2::new(60.0, 0.0)), circle(Point2::new(0.0, 60.0))];
    let waypoints: Vec<Vec<Point3>> = trajectories.iter().map(|t| t.waypoints.clone()).collect();
    let z = 200.0;
    let any_feasible = (0..n).any(|a| (0..n).any(|b| min_separation(&waypoints, &[0, a, b]) >= z));
    match schedule_start_slots(&trajectories, n, z) {
        Ok(offsets) => {
            assert!(any_feasible);
            assert!(min_separation(&waypoints, &offsets) >= z);
        }
        Err(_) => assert!(!any_feasible),
    }
}

#[test]
fn sweeps_keep_speed_and_climb_limits() {
    for seed in 0..100u64 {
        let n_aois = 4 + (seed % 12) as usize;
        let n_drones = n_aois.div_ceil(6) + (seed % 3) as usize;
        let s = generate_scenario(seed, n_aois, n_drones, &Scenario {
            v_max: [30.0, 50.0, 70.0, 90.0, 110.0][(seed % 5) as usize],
            ..Scenario::default()
        })
        .unwrap();
        let init = initial_trajectories(&s, 1.0, 80.0, 2, seed).unwrap();
        let assoc = optimize_association(&s, &init).unwrap();
        let schedule = optimize_schedule(&s, &init, &assoc).unwrap();
        let theta = dbs_planner::channel::optimal_elevation_angle(&s.d2u);
        for (d, t) in init.iter().enumerate() {
            let slots = schedule.slot_table(d);
            let next = sweep_update(t, &slots, &s, theta).unwrap();
            assert!(validate_trajectory(&next, &s).unwrap().is_empty(), "seed {seed} drone {d}");
            assert!(trajectory_violations(&next.waypoints, &s).is_empty(), "seed {seed} drone {d}");
            assert!(drone_objective(&next, &slots, &s) <= drone_objective(t, &slots, &s) + 1e-9);
        }
    }
}

const TINY: &str = r#"{
  "solvers": {
    "planner": { "kmeans_restarts": 2 },
    "pso": { "swarm": 8, "iterations": 20, "rounds": 1 }
  },
  "workers": 1
}"#;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dbs-planner"))
}

#[test]
fn cli_verbs_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.json");
    std::fs::write(&config, TINY).unwrap();
    let run = |args: &[&str], out: &str| {
        let status = cli()
            .args(args)
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(dir.path().join(out))
            .output()
            .unwrap();
        assert!(status.status.success(), "{args:?}: {}", String::from_utf8_lossy(&status.stderr));
        dir.path().join(out)
    };

    let g = run(&["generate", "--seed", "4", "--aois", "8", "--drones", "2"], "g");
    let scenario = g.join("scenario.json");
    let s: Scenario = serde_json::from_str(&std::fs::read_to_string(&scenario).unwrap()).unwrap();
    assert_eq!((s.n_aois(), s.n_drones, s.seed), (8, 2, 4));

    for (verb, mode) in [("plan", "planner"), ("baseline", "baseline")] {
        let out = run(&[verb, "--scenario", scenario.to_str().unwrap()], verb);
        let sol: PlanSolution = serde_json::from_str(&std::fs::read_to_string(out.join(format!("{mode}_solution.json"))).unwrap()).unwrap();
        assert_eq!(sol.fleet.trajectories.len(), 2);
        assert!(out.join("metrics.csv").exists() && out.join("manifest.json").exists());
    }

    let out = run(&["sweep", "--aois", "8", "--drones", "2,3", "--v-max", "50", "--seeds", "2", "--modes", "planner"], "sweep");
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 1 + 4);
    assert!(out.join("fig7_means.csv").exists());

    let out = run(&["min-dbs", "--aois", "8", "--v-max", "90", "--thresholds", "200", "--modes", "planner", "--max-drones", "3"], "min");
    let table = std::fs::read_to_string(out.join("table3_min_dbs.csv")).unwrap();
    assert!(table.lines().nth(1).unwrap().ends_with(",2"), "{table}");
}

#[test]
fn cli_reports_malformed_config_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, "{\n  \"jobs\": [\n    oops\n  ]\n}\n").unwrap();
    let out = cli().args(["reproduce", "--config"]).arg(&config).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn empty_job_list_leaves_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("empty.json");
    std::fs::write(&config, "{\"jobs\": []}").unwrap();
    let out_dir = dir.path().join("o");
    let out = cli().args(["reproduce", "--config"]).arg(&config).arg("--out").arg(&out_dir).output().unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_dir(&out_dir).unwrap().count(), 0);
}

#[test]
fn reruns_are_byte_identical() {
    let config = parse_config(
        r#"{
          "solvers": { "pso": { "iterations": 30, "rounds": 1 } },
          "jobs": [
            { "kind": "plan", "name": "p", "seed": 1, "n_aois": 10, "n_drones": 3, "v_max": 70, "mode": "planner" },
            { "kind": "sweep", "name": "s", "grid": { "n_aois": 10, "v_max": [50, 90], "n_drones": [2, 3], "seeds": [0, 1] } }
          ]
        }"#,
    )
    .unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_jobs(&config).unwrap().write(a.path()).unwrap();
    run_jobs(&config).unwrap().write(b.path()).unwrap();
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let p = entry.unwrap().path();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(b.path().join(p.file_name().unwrap())).unwrap(), "{p:?}");
    }
}

#[test]
fn bundled_config_parses_and_covers_all_tables() {
    let config = parse_config(dbs_planner::experiment::REPRODUCE_CONFIG).unwrap();
    let kinds: Vec<String> = config
        .jobs
        .iter()
        .map(|j| serde_json::to_value(j).unwrap()["kind"].as_str().unwrap().to_string())
        .collect();
    for k in ["plan", "sweep", "min_dbs"] {
        assert!(kinds.iter().any(|x| x == k));
    }
}
