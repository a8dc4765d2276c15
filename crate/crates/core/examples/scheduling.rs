//! Association and contiguous slot blocks for a fixed set of hovering drones.

use dbs_planner::planner::objective_value;
use dbs_planner::scenario::{generate_scenario, Point3, Scenario, Trajectory};
use dbs_planner::scheduling::{optimize_association, optimize_schedule};

fn main() -> dbs_planner::error::Result<()> {
    let s = generate_scenario(7, 8, 3, &Scenario::default())?;
    let hovers: Vec<Trajectory> = [(-300.0, 0.0), (150.0, 260.0), (150.0, -260.0)]
        .iter()
        .enumerate()
        .map(|(d, &(x, y))| Trajectory::hover(d, Point3::new(x, y, 30.0), s.n_slots))
        .collect();

    let assoc = optimize_association(&s, &hovers)?;
    let schedule = optimize_schedule(&s, &hovers, &assoc)?;
    for (d, blocks) in schedule.drones.iter().enumerate() {
        let spans: Vec<String> = blocks
            .iter()
            .map(|b| format!("aoi {} for {} slots from {}", b.aoi, b.len, b.start))
            .collect();
        println!("drone {d}: {}", spans.join(", "));
    }
    let obj = objective_value(&assoc, &schedule, &hovers, &s);
    println!("objective {:.3} dB, served mean {:.2} dB", obj.network, obj.served_mean);
    Ok(())
}
