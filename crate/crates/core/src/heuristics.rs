//! Exact cost-to-go tables and the single-step cost model.

use std::collections::VecDeque;

use crate::grid::{Cell, GridMap};

/// Sentinel distance for cells that cannot reach the goal.
pub const UNREACHABLE: u32 = u32::MAX;

/// Shortest-path distance from every cell to one goal, stored row-major.
#[derive(Debug, Clone)]
pub struct HeuristicTable {
    goal: Cell,
    width: u32,
    dist: Vec<u32>,
}

impl HeuristicTable {
    pub fn goal(&self) -> Cell {
        self.goal
    }

    /// Distance in timesteps, or `None` when the goal is unreachable.
    #[inline]
    pub fn dist(&self, cell: Cell) -> Option<u32> {
        match self.raw(cell) {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    /// Distance with [`UNREACHABLE`] as the infinity sentinel.
    #[inline]
    pub fn raw(&self, cell: Cell) -> u32 {
        self.dist[cell.row as usize * self.width as usize + cell.col as usize]
    }
}

/// Backward breadth-first expansion from `goal`. With unit edge costs this
/// is exactly Dijkstra's algorithm.
pub fn compute_table(map: &GridMap, goal: Cell) -> HeuristicTable {
    assert!(map.is_passable(goal), "goal {goal} is not passable");
    let mut dist = vec![UNREACHABLE; map.num_cells()];
    let mut queue = VecDeque::new();
    dist[map.index(goal)] = 0;
    queue.push_back(goal);
    while let Some(u) = queue.pop_front() {
        let d = dist[map.index(u)] + 1;
        for v in map.neighbors(u).into_iter().skip(1) {
            let slot = &mut dist[map.index(v)];
            if *slot == UNREACHABLE {
                *slot = d;
                queue.push_back(v);
            }
        }
    }
    HeuristicTable {
        goal,
        width: map.width(),
        dist,
    }
}

/// One table per goal, in agent order.
pub fn compute_tables(map: &GridMap, goals: &[Cell]) -> Vec<HeuristicTable> {
    goals.iter().map(|&g| compute_table(map, g)).collect()
}

/// Transition cost: free only when resting on the goal.
#[inline]
pub fn step_cost(s: Cell, s_next: Cell, goal: Cell) -> u32 {
    if s == goal && s_next == goal {
        0
    } else {
        1
    }
}

/// Single-step f-value `step_cost + h*(s_next)`; `None` when `s_next` cannot
/// reach the goal, which callers treat as an invalid candidate.
#[inline]
pub fn fvalue(table: &HeuristicTable, s: Cell, s_next: Cell) -> Option<u32> {
    table.dist(s_next).map(|d| d + step_cost(s, s_next, table.goal))
}

/// Smallest f-value over the neighbors of `s`.
pub fn min_fvalue(map: &GridMap, table: &HeuristicTable, s: Cell) -> Option<u32> {
    map.neighbors(s).into_iter().filter_map(|n| fvalue(table, s, n)).min()
}
