#![allow(dead_code)]

use std::collections::HashMap;

use anytime_pibt::instances::{random_step_instance, StepInstance};
use anytime_pibt::*;

/// Tables and seeded priorities for a single-step instance.
#[derive(Debug)]
pub struct Prepared {
    pub inst: StepInstance,
    pub tables: Vec<HeuristicTable>,
    pub priorities: PriorityState,
}

impl Prepared {
    pub fn new(inst: StepInstance) -> Self {
        let tables = compute_tables(&inst.map, &inst.goals);
        let priorities = PriorityState::new(inst.config.len(), inst.seed);
        Self {
            inst,
            tables,
            priorities,
        }
    }

    pub fn random(width: u32, height: u32, ratio: f64, n: usize, seed: u64) -> Self {
        Self::new(random_step_instance(width, height, ratio, n, seed))
    }

    pub fn ctx(&self) -> StepContext<'_> {
        StepContext::new(
            &self.inst.map,
            &self.tables,
            &self.inst.config,
            &self.priorities,
            self.inst.seed,
            0,
        )
    }
}

/// Passability, unit moves, vertex and edge collisions, recomputed from
/// scratch.
pub fn step_is_valid(map: &GridMap, from: &[Cell], to: &[Cell]) -> bool {
    if from.len() != to.len() {
        return false;
    }
    let mut seen = HashMap::new();
    for (a, (&s, &t)) in from.iter().zip(to).enumerate() {
        let d = s.row.abs_diff(t.row) + s.col.abs_diff(t.col);
        if d > 1 || !map.is_passable(t) || seen.insert(t, a).is_some() {
            return false;
        }
    }
    for i in 0..from.len() {
        for j in i + 1..from.len() {
            if from[i] != to[i] && to[i] == from[j] && to[j] == from[i] {
                return false;
            }
        }
    }
    true
}

/// Per-agent f of a move: 0 when resting on the goal, else 1 + distance.
pub fn f_of(tables: &[HeuristicTable], goals: &[Cell], from: &[Cell], to: &[Cell]) -> Vec<u64> {
    (0..from.len())
        .map(|a| {
            let rest = from[a] == goals[a] && to[a] == goals[a];
            let h = tables[a].dist(to[a]).expect("reachable") as u64;
            if rest {
                0
            } else {
                1 + h
            }
        })
        .collect()
}

pub fn cells_of(plan: &StepPlan) -> Vec<Cell> {
    plan.to_configuration().expect("complete plan").into_cells()
}
