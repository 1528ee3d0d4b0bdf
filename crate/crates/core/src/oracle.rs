//! Exhaustive single-step solver for small instances.
//!
//! Works directly on the grid and distance tables without the planners'
//! candidate machinery, so it can serve as an independent reference.

use std::collections::HashMap;

use crate::grid::{Cell, GridMap};
use crate::heuristics::{fvalue, HeuristicTable};
use crate::pibt::{AgentId, StepPlan};

/// A complete, collision-free next configuration and its f-sum over all agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointAssignment {
    pub next: Vec<Cell>,
    pub fsum: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("no collision-free joint assignment exists")]
    Infeasible,
    #[error("agent {0} is neither free nor frozen")]
    Unassigned(AgentId),
    #[error("frozen plan for agent {0} is not a valid move")]
    InvalidFrozen(AgentId),
}

/// Which agents to enumerate and how.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleQuery<'q> {
    /// Agents to enumerate; `None` means every agent without a frozen plan.
    pub subset: Option<&'q [AgentId]>,
    /// Fixed next cells for agents outside the enumeration.
    pub frozen: Option<&'q StepPlan>,
    /// Skip branches that cannot beat the best assignment found so far.
    pub pruning: bool,
}

impl OracleQuery<'_> {
    pub fn all() -> Self {
        Self {
            subset: None,
            frozen: None,
            pruning: true,
        }
    }
}

/// Minimum f-sum assignment with default settings (all agents free, pruned).
pub fn brute_force_step(
    map: &GridMap,
    config: &[Cell],
    tables: &[HeuristicTable],
) -> Result<JointAssignment, OracleError> {
    brute_force_query(map, config, tables, OracleQuery::all())
}

/// Enumerates the product of the free agents' moves in agent id order and
/// base neighbor order, returning the first assignment reaching the minimum.
/// Pruning never changes the result.
pub fn brute_force_query(
    map: &GridMap,
    config: &[Cell],
    tables: &[HeuristicTable],
    query: OracleQuery<'_>,
) -> Result<JointAssignment, OracleError> {
    let n = config.len();
    let mut free: Vec<AgentId> = match query.subset {
        Some(s) => s.to_vec(),
        None => (0..n)
            .filter(|&a| query.frozen.and_then(|f| f.get(a)).is_none())
            .collect(),
    };
    free.sort_unstable();
    free.dedup();

    let mut next: Vec<Option<Cell>> = vec![None; n];
    for a in 0..n {
        if free.binary_search(&a).is_ok() {
            continue;
        }
        let cell = query.frozen.and_then(|f| f.get(a)).ok_or(OracleError::Unassigned(a))?;
        if !GridMap::is_unit_step(config[a], cell) || !map.is_passable(cell) {
            return Err(OracleError::InvalidFrozen(a));
        }
        next[a] = Some(cell);
    }

    let moves: Vec<Vec<(Cell, u64)>> = free
        .iter()
        .map(|&a| {
            map.neighbors(config[a])
                .into_iter()
                .filter_map(|c| fvalue(&tables[a], config[a], c).map(|f| (c, f as u64)))
                .collect()
        })
        .collect();
    // suffix[i]: sum of the smallest f over free agents i..
    let mut suffix = vec![0u64; free.len() + 1];
    for i in (0..free.len()).rev() {
        suffix[i] = suffix[i + 1] + moves[i].iter().map(|m| m.1).min().unwrap_or(0);
    }

    let current: HashMap<Cell, AgentId> = config.iter().enumerate().map(|(a, &c)| (c, a)).collect();
    let mut taken: HashMap<Cell, AgentId> = HashMap::new();
    for (a, c) in next.iter().enumerate() {
        if let Some(c) = c {
            if taken.insert(*c, a).is_some() {
                return Err(OracleError::Infeasible);
            }
        }
    }
    for (a, c) in next.iter().enumerate() {
        if let Some(c) = c {
            if let Some(&b) = current.get(c) {
                if b != a && next[b] == Some(config[a]) {
                    return Err(OracleError::Infeasible);
                }
            }
        }
    }

    let frozen_f: u64 = (0..n)
        .filter_map(|a| next[a].map(|c| fvalue(&tables[a], config[a], c).map_or(u64::MAX / 4, u64::from)))
        .sum();

    let mut e = Enumeration {
        config,
        free: &free,
        moves: &moves,
        suffix: &suffix,
        current: &current,
        taken,
        next,
        best: None,
        pruning: query.pruning,
    };
    e.dfs(0, 0);
    let (fsum, next) = e.best.ok_or(OracleError::Infeasible)?;
    Ok(JointAssignment {
        next,
        fsum: fsum + frozen_f,
    })
}

struct Enumeration<'e> {
    config: &'e [Cell],
    free: &'e [AgentId],
    moves: &'e [Vec<(Cell, u64)>],
    suffix: &'e [u64],
    current: &'e HashMap<Cell, AgentId>,
    taken: HashMap<Cell, AgentId>,
    next: Vec<Option<Cell>>,
    best: Option<(u64, Vec<Cell>)>,
    pruning: bool,
}

impl Enumeration<'_> {
    fn dfs(&mut self, i: usize, acc: u64) {
        if i == self.free.len() {
            if self.best.as_ref().is_none_or(|(f, _)| acc < *f) {
                let cells = self.next.iter().map(|c| c.expect("all assigned")).collect();
                self.best = Some((acc, cells));
            }
            return;
        }
        if self.pruning {
            if let Some((f, _)) = &self.best {
                if acc + self.suffix[i] >= *f {
                    return;
                }
            }
        }
        let a = self.free[i];
        let from = self.config[a];
        for &(c, f) in &self.moves[i] {
            if self.taken.contains_key(&c) {
                continue;
            }
            if let Some(&b) = self.current.get(&c) {
                if b != a && self.next[b] == Some(from) {
                    continue;
                }
            }
            self.taken.insert(c, a);
            self.next[a] = Some(c);
            self.dfs(i + 1, acc + f);
            self.next[a] = None;
            self.taken.remove(&c);
        }
    }
}
