//! Single-step multi-agent path finding on 4-connected grids: PIBT, Anytime
//! PIBT with disjoint agent groups, a brute-force reference solver, a
//! minimal LaCAM host, and an experiment runner.

pub mod anytime;
pub mod djag;
pub mod grid;
pub mod heuristics;
pub mod instances;
pub mod lacam;
pub mod oracle;
pub mod pibt;
pub mod runner;

pub use anytime::{anytime_pibt, anytime_pibt_forced, AnytimeOptions, AnytimeOutcome, Budget, Deadline, SolveMode};
pub use djag::{Group, GroupQueue, GroupSet};
pub use grid::{parse_map, parse_scenario, Cell, GridError, GridMap, ScenarioEntry};
pub use heuristics::{compute_table, compute_tables, fvalue, step_cost, HeuristicTable};
pub use pibt::{pibt_step, AgentId, Configuration, PriorityState, StepContext, StepPlan};
