//! AoI association and per-drone slot scheduling.
//!
//! A drone splits its period into one contiguous cyclic block per owned AoI.
//! Block lengths differ by at most one slot and never drop below the minimum
//! service time.

use serde::{Deserialize, Serialize};

use crate::assignment::{self, CostMatrix};
use crate::error::{ConstraintClass, Error, Result};
use crate::scenario::{Scenario, Trajectory};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Association {
    pub n_drones: usize,
    /// Owning drone of each AoI.
    pub owner: Vec<usize>,
}

impl Association {
    /// AoIs owned by drone `d`, ascending.
    pub fn aois_of(&self, d: usize) -> Vec<usize> {
        (0..self.owner.len()).filter(|&u| self.owner[u] == d).collect()
    }

    pub fn is_associated(&self, d: usize, u: usize) -> bool {
        self.owner[u] == d
    }

    pub fn load(&self) -> Vec<usize> {
        let mut load = vec![0; self.n_drones];
        for &d in &self.owner {
            load[d] += 1;
        }
        load
    }
}

/// Contiguous service block, `len` slots starting at `start` (cyclic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub aoi: usize,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub n_slots: usize,
    /// Blocks of each drone in slot order starting from its first block.
    pub drones: Vec<Vec<Block>>,
}

impl Schedule {
    /// AoI served by drone `d` in each slot.
    pub fn slot_table(&self, d: usize) -> Vec<Option<usize>> {
        let mut table = vec![None; self.n_slots];
        for b in &self.drones[d] {
            for k in 0..b.len {
                table[(b.start + k) % self.n_slots] = Some(b.aoi);
            }
        }
        table
    }

    /// `k_{d,u}[n]` as a boolean.
    pub fn serves(&self, d: usize, u: usize, n: usize) -> bool {
        self.drones[d].iter().any(|b| {
            b.aoi == u && (n + self.n_slots - b.start) % self.n_slots < b.len
        })
    }

    /// Checks one-AoI-per-slot coverage, ownership, block sizes and minimum
    /// service time.
    pub fn validate(&self, assoc: &Association, s: &Scenario) -> Result<()> {
        if self.n_slots != s.n_slots || self.drones.len() != assoc.n_drones {
            return Err(Error::Structure("schedule dimensions do not match".into()));
        }
        for (d, blocks) in self.drones.iter().enumerate() {
            let owned = assoc.aois_of(d);
            if owned.is_empty() {
                if !blocks.is_empty() {
                    return Err(Error::Validation(format!("drone {d} serves AoIs it does not own")));
                }
                continue;
            }
            let mut aois: Vec<usize> = blocks.iter().map(|b| b.aoi).collect();
            aois.sort_unstable();
            if aois != owned {
                return Err(Error::Validation(format!(
                    "drone {d} blocks {aois:?} do not match its AoIs {owned:?}"
                )));
            }
            let mut covered = vec![0u32; self.n_slots];
            for b in blocks {
                for k in 0..b.len {
                    covered[(b.start + k) % self.n_slots] += 1;
                }
            }
            if covered.iter().any(|&c| c != 1) {
                return Err(Error::Validation(format!(
                    "drone {d} does not serve exactly one AoI per slot"
                )));
            }
            let mut lens: Vec<usize> = blocks.iter().map(|b| b.len).collect();
            lens.sort_unstable_by(|a, b| b.cmp(a));
            if lens != blocks_for(self.n_slots, owned.len()) {
                return Err(Error::Validation(format!("drone {d} has unfair block lengths {lens:?}")));
            }
            if lens.iter().any(|&l| l < s.s_min) {
                return Err(Error::infeasible(
                    ConstraintClass::MinService,
                    format!("drone {d} has a block shorter than {} slots", s.s_min),
                ));
            }
        }
        Ok(())
    }
}

/// Block lengths for `n_aois` AoIs sharing `n_slots` slots: the first
/// `n_slots mod n_aois` blocks get one extra slot.
pub fn blocks_for(n_slots: usize, n_aois: usize) -> Vec<usize> {
    assert!(n_aois >= 1, "at least one AoI required");
    let base = n_slots / n_aois;
    let extra = n_slots % n_aois;
    (0..n_aois).map(|k| base + usize::from(k < extra)).collect()
}

/// Pathloss table `costs[u][n]` from the trajectory of one drone to each AoI.
pub fn slot_costs(s: &Scenario, t: &Trajectory, aois: &[usize]) -> Vec<Vec<f64>> {
    aois.iter()
        .map(|&u| (0..s.n_slots).map(|n| s.pathloss(t.at(n), u)).collect())
        .collect()
}

/// Trajectory-mean pathloss `c[d][u]` from every drone to every AoI.
pub fn association_cost(s: &Scenario, trajectories: &[Trajectory]) -> Result<CostMatrix> {
    CostMatrix::from_fn(trajectories.len(), s.n_aois(), |d, u| {
        let t = &trajectories[d];
        t.waypoints.iter().map(|w| s.pathloss(w, u)).sum::<f64>() / t.len() as f64
    })
}

/// Optimal association for the trajectory-mean costs.
pub fn optimize_association(s: &Scenario, trajectories: &[Trajectory]) -> Result<Association> {
    s.check_capacity()?;
    let cost = association_cost(s, trajectories)?;
    let best = assignment::capacity_assignment(&cost, s.effective_capacity())?;
    Ok(Association {
        n_drones: trajectories.len(),
        owner: best.owner,
    })
}

/// Cyclic block sums: `sum(table, start, len)` over `table[start..start+len]`.
struct CyclicPrefix {
    prefix: Vec<f64>,
    n: usize,
}

impl CyclicPrefix {
    fn new(row: &[f64]) -> Self {
        let n = row.len();
        let mut prefix = Vec::with_capacity(2 * n + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for k in 0..2 * n {
            acc += row[k % n];
            prefix.push(acc);
        }
        CyclicPrefix { prefix, n }
    }

    fn sum(&self, start: usize, len: usize) -> f64 {
        let start = start % self.n;
        self.prefix[start + len] - self.prefix[start]
    }
}

/// Every way to place `extra` long blocks among `m` positions, lexicographic.
fn long_block_patterns(m: usize, extra: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(extra);
    fn rec(m: usize, extra: usize, from: usize, chosen: &mut Vec<usize>, out: &mut Vec<Vec<bool>>) {
        if chosen.len() == extra {
            let mut pattern = vec![false; m];
            for &k in chosen.iter() {
                pattern[k] = true;
            }
            out.push(pattern);
            return;
        }
        for k in from..m {
            chosen.push(k);
            rec(m, extra, k + 1, chosen, out);
            chosen.pop();
        }
    }
    rec(m, extra, 0, &mut chosen, &mut out);
    out
}

/// Best contiguous-block schedule of one drone given its pathloss table.
///
/// Enumerates the position of the first block boundary and the cyclic order
/// of long and short blocks, and matches AoIs to blocks exactly for each
/// layout. Together these cover every fair contiguous schedule.
pub fn schedule_drone(costs: &[Vec<f64>], aois: &[usize], n_slots: usize, s_min: usize) -> Result<Vec<Block>> {
    let m = aois.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let base = n_slots / m;
    if base < s_min.max(1) {
        return Err(Error::infeasible(
            ConstraintClass::MinService,
            format!("{m} AoIs x {s_min} slots exceed the {n_slots}-slot period"),
        ));
    }
    let prefixes: Vec<CyclicPrefix> = costs.iter().map(|row| CyclicPrefix::new(row)).collect();
    let patterns = long_block_patterns(m, n_slots % m);
    let starts = if n_slots.is_multiple_of(m) { base } else { n_slots };

    let mut best: Option<(f64, usize, usize)> = None;
    let mut block_cost = vec![0.0; m * m];
    for first in 0..starts {
        for (pi, pattern) in patterns.iter().enumerate() {
            let mut pos = first;
            for (k, &long) in pattern.iter().enumerate() {
                let len = base + usize::from(long);
                for (i, p) in prefixes.iter().enumerate() {
                    block_cost[k * m + i] = p.sum(pos, len);
                }
                pos += len;
            }
            let cols = assignment::hungarian(m, m, |k, i| block_cost[k * m + i]);
            let total: f64 = cols.iter().enumerate().map(|(k, &i)| block_cost[k * m + i]).sum();
            if best.is_none_or(|(b, _, _)| total < b) {
                best = Some((total, first, pi));
            }
        }
    }

    let (_, first, pi) = best.expect("at least one layout");
    let pattern = &patterns[pi];
    let mut layout = Vec::with_capacity(m);
    let mut pos = first;
    for &long in pattern {
        let len = base + usize::from(long);
        layout.push((pos % n_slots, len));
        pos += len;
    }
    let matrix = CostMatrix::from_fn(m, m, |k, i| prefixes[i].sum(layout[k].0, layout[k].1))?;
    let matching = assignment::min_cost_assignment(&matrix)?;
    Ok(layout
        .iter()
        .zip(&matching.perm)
        .map(|(&(start, len), &i)| Block {
            aoi: aois[i],
            start,
            len,
        })
        .collect())
}

/// Optimal schedule of every drone for fixed trajectories and association.
pub fn optimize_schedule(s: &Scenario, trajectories: &[Trajectory], assoc: &Association) -> Result<Schedule> {
    let drones = trajectories
        .iter()
        .enumerate()
        .map(|(d, t)| {
            let aois = assoc.aois_of(d);
            let costs = slot_costs(s, t, &aois);
            schedule_drone(&costs, &aois, s.n_slots, s.s_min)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Schedule {
        n_slots: s.n_slots,
        drones,
    })
}
