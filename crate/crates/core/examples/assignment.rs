//! Min-cost assignment with and without a per-agent capacity, checked
//! against exhaustive search.

use dbs_planner::assignment::{brute_force_assignment, capacity_assignment, min_cost_assignment, CostMatrix};

fn main() -> dbs_planner::error::Result<()> {
    let square = CostMatrix::new(3, 3, vec![4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0])?;
    let a = min_cost_assignment(&square)?;
    println!("one-to-one: {:?} cost {}", a.perm, a.cost);

    // Two drones, five AoIs, at most three AoIs each.
    let costs = CostMatrix::from_fn(2, 5, |d, u| ((d as f64 * 2.5) - u as f64).abs() + 0.1 * u as f64)?;
    let c = capacity_assignment(&costs, 3)?;
    let b = brute_force_assignment(&costs, 3)?;
    println!("capacitated: owners {:?} cost {:.2} (load {:?})", c.owner, c.cost, c.load(2));
    println!("exhaustive:  cost {:.2}", b.cost);
    Ok(())
}
