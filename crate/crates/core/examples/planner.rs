//! Plan periodic 3D trajectories for five drones serving twenty AoIs.

use dbs_planner::metrics::compute_metrics;
use dbs_planner::planner::{plan, PlannerConfig};
use dbs_planner::scenario::{generate_scenario, Scenario};

fn main() -> dbs_planner::error::Result<()> {
    let s = generate_scenario(0, 20, 5, &Scenario::default())?;
    let sol = plan(&s, &PlannerConfig::default())?;

    println!("iterations {} (converged: {})", sol.iterations, sol.converged);
    for (t, (obj, dw)) in sol.objective_log.iter().skip(1).zip(&sol.displacement_log).enumerate() {
        println!("  {t:2}: objective {obj:.4} dB, largest move {dw:.3} m");
    }
    let m = compute_metrics(&sol, &s, 0.0);
    println!(
        "served mean {:.2} dB, std {:.2} dB, hovering {:.0}%, closest pair {:.0} m",
        m.served_mean,
        m.served_std,
        100.0 * m.hovering_fraction,
        m.min_separation
    );
    println!("start offsets {:?}", sol.fleet.start_offsets);
    Ok(())
}
