//! Start-slot scheduling: cyclic phase offsets that keep every pair of drones
//! at least the protect distance apart without touching trajectory shapes.

use crate::error::{ConstraintClass, Error, Result};
use crate::scenario::{slot_3d_distance, Trajectory};

/// `table[i][k][δ]`: smallest distance over the period between drone `i`
/// shifted by `δ` slots relative to drone `k`.
fn relative_separation(trajectories: &[Trajectory], n_slots: usize) -> Vec<Vec<Vec<f64>>> {
    let d = trajectories.len();
    let mut table = vec![vec![Vec::new(); d]; d];
    for i in 0..d {
        for k in 0..i {
            table[i][k] = (0..n_slots)
                .map(|shift| {
                    (0..n_slots)
                        .map(|m| slot_3d_distance(trajectories[i].at(m + shift), trajectories[k].at(m)))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
        }
    }
    table
}

/// Greedy offset search in drone order. Each drone takes the first offset
/// that clears every earlier drone; when some drone has none, the search
/// restarts with the first drone's offset advanced by one slot.
pub fn schedule_start_slots(trajectories: &[Trajectory], n_slots: usize, z_min: f64) -> Result<Vec<usize>> {
    let d = trajectories.len();
    if trajectories.iter().any(|t| t.len() != n_slots && t.len() != 1) {
        return Err(Error::Structure("trajectories must share the period length".into()));
    }
    if d == 0 {
        return Ok(Vec::new());
    }
    let table = relative_separation(trajectories, n_slots);
    let clears = |offsets: &[usize], i: usize, j: usize| {
        (0..i).all(|k| table[i][k][(j + n_slots - offsets[k]) % n_slots] >= z_min)
    };

    let mut offsets = vec![0; d];
    'first: for first in 0..n_slots {
        offsets.iter_mut().for_each(|o| *o = 0);
        offsets[0] = first;
        for i in 1..d {
            match (0..n_slots).find(|&j| clears(&offsets, i, j)) {
                Some(j) => offsets[i] = j,
                None => continue 'first,
            }
        }
        return Ok(offsets);
    }
    Err(Error::infeasible(
        ConstraintClass::Separation,
        format!("no start offsets keep all drones {z_min} m apart"),
    ))
}
