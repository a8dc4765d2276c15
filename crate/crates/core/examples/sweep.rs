//! Small speed and fleet-size sweep with seed-averaged means.

use dbs_planner::harness::{summarize, sweep, worker_count, Mode, Solvers, SweepSpec};
use dbs_planner::scenario::Scenario;

fn main() -> dbs_planner::error::Result<()> {
    let spec = SweepSpec {
        v_max: vec![30.0, 110.0],
        n_drones: vec![4, 6],
        seeds: vec![0, 1],
        modes: vec![Mode::Planner],
        ..SweepSpec::default()
    };
    let rows = sweep(&Scenario::default(), &spec, &Solvers::default(), worker_count(None))?;
    println!("mode     drones  v_max  runs  mean (dB)  seed std");
    for c in summarize(&rows) {
        println!(
            "{:8} {:6} {:6} {:5} {:10.2} {:9.2}",
            c.mode.to_string(),
            c.n_drones,
            c.v_max,
            c.runs,
            c.mean_pathloss,
            c.seed_std
        );
    }
    Ok(())
}
