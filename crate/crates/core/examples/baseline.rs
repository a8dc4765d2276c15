//! Static hovering deployment from the particle swarm baseline.

use dbs_planner::baseline::{plan_static_pso, PsoParams};
use dbs_planner::scenario::{generate_scenario, Scenario};

fn main() -> dbs_planner::error::Result<()> {
    let s = generate_scenario(0, 20, 5, &Scenario::default())?;
    let dep = plan_static_pso(&s, &PsoParams::default())?;
    for (d, p) in dep.positions.iter().enumerate() {
        println!(
            "drone {d}: ({:7.1}, {:7.1}) at {:5.1} m serving {:?}",
            p.x,
            p.y,
            p.h,
            dep.association.aois_of(d)
        );
    }
    println!(
        "served mean {:.2} dB (random start {:.2} dB)",
        dep.objective.served_mean, dep.initial_objective.served_mean
    );
    Ok(())
}
