//! Exact assignment kernels.
//!
//! All solvers report the lexicographically smallest optimum: among equal-cost
//! solutions the one whose first task has the lowest agent, then the second
//! task, and so on. Totals are summed in task order so that two solvers that
//! agree on the assignment agree on the cost bit for bit.

use crate::error::{ConstraintClass, Error, Result};

/// Largest task count accepted by the brute-force oracle.
pub const BRUTE_FORCE_MAX_TASKS: usize = 8;
const BRUTE_FORCE_MAX_STATES: u64 = 20_000_000;

/// Dense row-major cost matrix, rows are agents and columns tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Structure(format!(
                "cost matrix {}x{} needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|c| !c.is_finite()) {
            return Err(Error::Structure("cost matrix holds a non-finite entry".into()));
        }
        Ok(CostMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CostMatrix::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }
}

/// One-to-one assignment: `perm[row]` is the column given to `row`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub perm: Vec<usize>,
    pub cost: f64,
}

/// Many-to-one assignment: `owner[task]` is the agent serving `task`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityAssignment {
    pub owner: Vec<usize>,
    pub cost: f64,
}

impl CapacityAssignment {
    pub fn load(&self, agents: usize) -> Vec<usize> {
        let mut load = vec![0; agents];
        for &a in &self.owner {
            load[a] += 1;
        }
        load
    }
}

/// Hungarian algorithm with potentials for `n ≤ m`; `cost(i, j)` is the cost
/// of row `i` taking column `j`. Returns the column of every row.
pub(crate) fn hungarian(n: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    debug_assert!(n <= m);
    // 1-based arrays, index 0 is the virtual root.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=m {
        if row_of[j] != 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    col_of
}

fn tie_tolerance(total: f64) -> f64 {
    1e-9 * total.abs().max(1.0)
}

/// Optimal total of assigning `tasks` to agents with remaining `caps`.
fn capacity_optimum(c: &CostMatrix, tasks: &[usize], caps: &[usize]) -> f64 {
    if tasks.is_empty() {
        return 0.0;
    }
    let slots: Vec<usize> = caps
        .iter()
        .enumerate()
        .flat_map(|(a, &k)| std::iter::repeat_n(a, k.min(tasks.len())))
        .collect();
    if slots.len() < tasks.len() {
        return f64::INFINITY;
    }
    let cols = hungarian(tasks.len(), slots.len(), |i, j| c.get(slots[j], tasks[i]));
    tasks.iter().zip(&cols).map(|(&t, &j)| c.get(slots[j], t)).sum()
}

/// Minimum-cost perfect matching of a square matrix.
pub fn min_cost_assignment(c: &CostMatrix) -> Result<Assignment> {
    if c.rows() != c.cols() {
        return Err(Error::Structure(format!(
            "square matrix required, got {}x{}",
            c.rows(),
            c.cols()
        )));
    }
    // A square matching is a capacity-one assignment of columns to rows.
    let t = CostMatrix::from_fn(c.cols(), c.rows(), |j, i| c.get(i, j))?;
    let rows = capacity_assignment_unchecked(&t, 1);
    Ok(Assignment {
        cost: rows.cost,
        perm: rows.owner,
    })
}

/// Assign every task (column) to one agent (row), at most `cap` tasks per agent.
pub fn capacity_assignment(c: &CostMatrix, cap: usize) -> Result<CapacityAssignment> {
    if c.rows() * cap < c.cols() {
        return Err(Error::infeasible(
            ConstraintClass::Capacity,
            format!("{} agents x capacity {} < {} tasks", c.rows(), cap, c.cols()),
        ));
    }
    Ok(capacity_assignment_unchecked(c, cap))
}

fn capacity_assignment_unchecked(c: &CostMatrix, cap: usize) -> CapacityAssignment {
    let n_tasks = c.cols();
    let mut caps = vec![cap; c.rows()];
    let all: Vec<usize> = (0..n_tasks).collect();
    let optimum = capacity_optimum(c, &all, &caps);
    let tol = tie_tolerance(optimum);

    // Fix tasks one by one to the lowest agent that still admits an optimum.
    let mut owner = Vec::with_capacity(n_tasks);
    let mut fixed = 0.0;
    for t in 0..n_tasks {
        let rest = &all[t + 1..];
        let mut choice = None;
        let mut fallback: Option<(usize, f64)> = None;
        for a in 0..c.rows() {
            if caps[a] == 0 {
                continue;
            }
            caps[a] -= 1;
            let total = fixed + c.get(a, t) + capacity_optimum(c, rest, &caps);
            caps[a] += 1;
            if total <= optimum + tol {
                choice = Some(a);
                break;
            }
            if fallback.is_none_or(|(_, best)| total < best) {
                fallback = Some((a, total));
            }
        }
        let a = choice.or(fallback.map(|(a, _)| a)).expect("capacity checked by caller");
        caps[a] -= 1;
        fixed += c.get(a, t);
        owner.push(a);
    }
    let cost = owner.iter().enumerate().map(|(t, &a)| c.get(a, t)).sum();
    CapacityAssignment { owner, cost }
}

/// Exhaustive search over every capacity-feasible map, for testing.
pub fn brute_force_assignment(c: &CostMatrix, cap: usize) -> Result<CapacityAssignment> {
    let n_tasks = c.cols();
    let agents = c.rows();
    if n_tasks > BRUTE_FORCE_MAX_TASKS {
        return Err(Error::TooLarge(format!("{n_tasks} tasks (limit {BRUTE_FORCE_MAX_TASKS})")));
    }
    if (agents as u64).checked_pow(n_tasks as u32).is_none_or(|s| s > BRUTE_FORCE_MAX_STATES) {
        return Err(Error::TooLarge(format!("{agents}^{n_tasks} candidate maps")));
    }
    if agents * cap < n_tasks {
        return Err(Error::infeasible(
            ConstraintClass::Capacity,
            format!("{agents} agents x capacity {cap} < {n_tasks} tasks"),
        ));
    }
    let mut owner = vec![0usize; n_tasks];
    let mut best: Option<CapacityAssignment> = None;
    loop {
        let mut load = vec![0usize; agents];
        for &a in &owner {
            load[a] += 1;
        }
        if load.iter().all(|&l| l <= cap) {
            let cost: f64 = owner.iter().enumerate().map(|(t, &a)| c.get(a, t)).sum();
            if best.as_ref().is_none_or(|b| cost < b.cost) {
                best = Some(CapacityAssignment {
                    owner: owner.clone(),
                    cost,
                });
            }
        }
        // Odometer increment, last task fastest, so visits are lexicographic.
        let mut k = n_tasks;
        loop {
            if k == 0 {
                return Ok(best.unwrap_or(CapacityAssignment {
                    owner: Vec::new(),
                    cost: 0.0,
                }));
            }
            k -= 1;
            owner[k] += 1;
            if owner[k] < agents {
                break;
            }
            owner[k] = 0;
        }
    }
}
