//! Runs an experiment config and writes the plot-data CSVs.
//!
//! Usage: `cargo run --release --example reproduce -- [config.json] [out_dir]`.
//! Without arguments a reduced version of the bundled reproduction is run.

use std::path::PathBuf;

use dbs_planner::experiment::{load_config, parse_config, run_jobs, Job, REPRODUCE_CONFIG};

fn main() -> dbs_planner::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = match args.next() {
        Some(path) => load_config(path.as_ref())?,
        None => {
            let mut c = parse_config(REPRODUCE_CONFIG)?;
            for job in &mut c.jobs {
                match job {
                    Job::Sweep(j) => j.grid.seeds.truncate(1),
                    Job::MinDbs(j) => j.max_drones = Some(8),
                    Job::Plan(_) => {}
                }
            }
            c
        }
    };
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "reproduce_out".into()));
    let out = run_jobs(&config)?;
    for path in out.write(&out_dir)? {
        println!("{}", path.display());
    }
    for f in &out.validation_failures {
        eprintln!("validation failure: {f}");
    }
    Ok(())
}
