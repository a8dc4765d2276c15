//! Air-to-ground pathloss, the best elevation angle and the backhaul working zone.

use dbs_planner::channel::{
    d2b_feasible_height_interval, d2b_feasible_radii, d2u_pathloss, optimal_elevation_angle, D2bEnv, D2uEnv,
};

fn main() -> dbs_planner::error::Result<()> {
    let d2u = D2uEnv::SUBURBAN;
    let d2b = D2bEnv::SUBURBAN;

    let theta = optimal_elevation_angle(&d2u);
    println!("optimal elevation angle: {theta:.4} deg");

    println!("\n r (m)   h=40    h=80    h=120");
    for r in [0.0, 50.0, 100.0, 200.0, 400.0] {
        let row: Vec<String> = [40.0, 80.0, 120.0]
            .iter()
            .map(|&h| d2u_pathloss(r, h, &d2u).map(|p| format!("{p:6.2}")))
            .collect::<Result<_, _>>()?;
        println!("{r:6.0}  {}", row.join("  "));
    }

    println!("\nfeasible heights at distance r from the base station:");
    for r in [0.0, 200.0, 500.0, 900.0] {
        let iv = d2b_feasible_height_interval(r, &d2b);
        println!("  r = {r:4.0} m: [{:.1}, {:.1}]", iv.lower, iv.upper);
    }

    println!("\nworking zone rings at fixed height:");
    for h in [20.0, 50.0, 80.0] {
        let rings: Vec<String> = d2b_feasible_radii(h, &d2b, 900.0)
            .iter()
            .map(|(a, b)| format!("[{a:.1}, {b:.1}]"))
            .collect();
        println!("  h = {h:2.0} m: {}", rings.join(" "));
    }
    Ok(())
}
