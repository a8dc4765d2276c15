//! Smallest fleet keeping every served slot under a pathloss threshold.

use dbs_planner::harness::{max_pathloss_profile, min_dbs_from_profile, Mode, Solvers};
use dbs_planner::scenario::{generate_scenario, Scenario};

fn main() -> dbs_planner::error::Result<()> {
    let s = generate_scenario(0, 20, 4, &Scenario::default())?;
    let profile = max_pathloss_profile(&s, Mode::Planner, &Solvers::default(), 12);
    for (d, worst) in &profile {
        match worst {
            Some(p) => println!("{d:2} drones: worst served slot {p:.2} dB"),
            None => println!("{d:2} drones: no valid plan"),
        }
    }
    for threshold in [98.0, 95.0, 92.0] {
        let n = min_dbs_from_profile(&profile, threshold);
        println!("threshold {threshold} dB -> {}", n.map_or("none".into(), |n| n.to_string()));
    }
    Ok(())
}
