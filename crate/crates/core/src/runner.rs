//! Experiment orchestration: full-horizon runs, the single-step budget
//! study, path validation, and CSV/JSON output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::anytime::{anytime_pibt, AnytimeOptions, Budget, SolveMode};
use crate::grid::{Cell, GridMap, ScenarioEntry};
use crate::heuristics::{compute_tables, step_cost, HeuristicTable};
use crate::lacam::{lacam_solve, AnytimeGenerator, LacamLimits, PibtGenerator, StepGenerator, StepOutcome};
use crate::pibt::{AgentId, ElapsedSinceGoal, PriorityPolicy, PriorityState, StepContext, StepPlan};

/// Version of the CSV and JSON layouts below.
pub const SCHEMA_VERSION: u32 = 1;

/// Header of the per-step CSV.
pub const STEP_CSV_HEADER: [&str; 8] = [
    "t",
    "f_initial",
    "f_final",
    "f_lowerbound",
    "groups",
    "merges",
    "plan_time_ms",
    "finished_all_groups",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "pibt")]
    Pibt,
    #[serde(rename = "apibt")]
    Apibt,
    #[serde(rename = "apibt-tb")]
    ApibtTb,
    #[serde(rename = "lacam+pibt")]
    LacamPibt,
    #[serde(rename = "lacam+apibt")]
    LacamApibt,
    #[serde(rename = "lacam+apibt-tb")]
    LacamApibtTb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Pibt,
        Algorithm::Apibt,
        Algorithm::ApibtTb,
        Algorithm::LacamPibt,
        Algorithm::LacamApibt,
        Algorithm::LacamApibtTb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pibt => "pibt",
            Algorithm::Apibt => "apibt",
            Algorithm::ApibtTb => "apibt-tb",
            Algorithm::LacamPibt => "lacam+pibt",
            Algorithm::LacamApibt => "lacam+apibt",
            Algorithm::LacamApibtTb => "lacam+apibt-tb",
        }
    }

    pub fn uses_lacam(self) -> bool {
        matches!(
            self,
            Algorithm::LacamPibt | Algorithm::LacamApibt | Algorithm::LacamApibtTb
        )
    }

    /// Search mode of the step generator, or `None` for plain PIBT.
    pub fn mode(self) -> Option<SolveMode> {
        match self {
            Algorithm::Pibt | Algorithm::LacamPibt => None,
            Algorithm::Apibt | Algorithm::LacamApibt => Some(SolveMode::Optimal),
            Algorithm::ApibtTb | Algorithm::LacamApibtTb => Some(SolveMode::Tiebreak),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetMode {
    #[default]
    Wall,
    /// Milliseconds are converted to search nodes at a fixed rate.
    Nodes,
}

impl FromStr for BudgetMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wall" => Ok(BudgetMode::Wall),
            "nodes" => Ok(BudgetMode::Nodes),
            _ => Err(format!("unknown budget mode `{s}`")),
        }
    }
}

/// Node rate used to express millisecond budgets deterministically.
pub const DEFAULT_NODES_PER_MS: f64 = 10_000.0;

/// A per-step budget in milliseconds and how to measure it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBudget {
    pub ms: f64,
    pub mode: BudgetMode,
    pub nodes_per_ms: f64,
}

impl StepBudget {
    pub fn wall(ms: f64) -> Self {
        Self {
            ms,
            mode: BudgetMode::Wall,
            nodes_per_ms: DEFAULT_NODES_PER_MS,
        }
    }

    pub fn nodes(ms: f64) -> Self {
        Self {
            ms,
            mode: BudgetMode::Nodes,
            nodes_per_ms: DEFAULT_NODES_PER_MS,
        }
    }

    pub fn to_budget(self) -> Budget {
        match self.mode {
            BudgetMode::Wall => Budget::from_millis(self.ms),
            BudgetMode::Nodes => Budget::Nodes((self.ms.max(0.0) * self.nodes_per_ms).round() as u64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub agents: usize,
    pub step_budget: StepBudget,
    pub seed: u64,
    /// Cap on the sum of planning times over all steps.
    pub time_limit: Duration,
    pub max_steps: usize,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, agents: usize) -> Self {
        Self {
            algorithm,
            agents,
            step_budget: StepBudget::wall(0.0),
            seed: 0,
            time_limit: Duration::from_secs(60),
            max_steps: 10_000,
        }
    }

    fn generator(&self) -> Box<dyn StepGenerator> {
        match self.algorithm.mode() {
            None => Box::new(PibtGenerator),
            Some(mode) => Box::new(AnytimeGenerator {
                options: AnytimeOptions::new(self.step_budget.to_budget(), mode),
            }),
        }
    }
}

/// Metrics of one planning step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub f_initial: u64,
    pub f_final: u64,
    pub f_lowerbound: u64,
    pub groups: usize,
    pub merges: usize,
    pub plan_time_ms: f64,
    pub finished_all_groups: bool,
}

impl StepRecord {
    fn from_outcome(t: u64, out: &StepOutcome, plan_time: Duration) -> Self {
        Self {
            t,
            f_initial: out.f_initial,
            f_final: out.f_final,
            f_lowerbound: out.f_lowerbound,
            groups: out.groups,
            merges: out.merges,
            plan_time_ms: plan_time.as_secs_f64() * 1e3,
            finished_all_groups: out.finished,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.f_lowerbound <= self.f_final && self.f_final <= self.f_initial
    }
}

/// Outcome of one full-horizon run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub success: bool,
    pub total_cost: u64,
    pub cost_lowerbound: u64,
    /// `total_cost / cost_lowerbound` on success, 1 when both are zero.
    pub normalized_cost: Option<f64>,
    pub makespan: usize,
    pub total_plan_time_ms: f64,
    pub algorithm: Algorithm,
    pub map: String,
    pub scen: String,
    pub agents: usize,
    pub seed: u64,
    pub step_budget_ms: f64,
    pub budget_mode: BudgetMode,
    /// Why the run stopped when it did not succeed.
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub summary: RunSummary,
    pub steps: Vec<StepRecord>,
    /// Executed configurations, starting with the starts.
    pub configs: Vec<Vec<Cell>>,
}

struct Recording<'r> {
    inner: Box<dyn StepGenerator + 'r>,
    records: Vec<StepRecord>,
    plan_time: Duration,
}

impl StepGenerator for Recording<'_> {
    fn generate(&mut self, ctx: &StepContext<'_>, forced: &[(AgentId, Cell)]) -> Option<StepOutcome> {
        let start = Instant::now();
        let out = self.inner.generate(ctx, forced);
        let took = start.elapsed();
        self.plan_time += took;
        if let Some(out) = &out {
            self.records.push(StepRecord::from_outcome(ctx.timestep(), out, took));
        }
        out
    }
}

/// Plans with the configured algorithm from the first `agents` entries of
/// `scenario` until every agent rests on its goal or a limit trips.
///
/// Standalone algorithms execute one planned step at a time. LaCAM variants
/// search for a complete solution within the time limit and record one
/// [`StepRecord`] per generator call, with `t` the search depth.
pub fn run_full_horizon(
    map: &GridMap,
    scenario: &[ScenarioEntry],
    config: &RunConfig,
    map_name: &str,
    scen_name: &str,
) -> RunResult {
    assert!(
        config.agents <= scenario.len(),
        "scenario has fewer entries than agents"
    );
    let entries = &scenario[..config.agents];
    let starts: Vec<Cell> = entries.iter().map(|e| e.start).collect();
    let goals: Vec<Cell> = entries.iter().map(|e| e.goal).collect();
    let tables = compute_tables(map, &goals);
    let cost_lowerbound: u64 = starts
        .iter()
        .zip(&tables)
        .map(|(&s, t)| t.dist(s).expect("goal reachable from start") as u64)
        .sum();

    let mut rec = Recording {
        inner: config.generator(),
        records: Vec::new(),
        plan_time: Duration::ZERO,
    };
    let (configs, failure) = if config.algorithm.uses_lacam() {
        let limits = LacamLimits {
            time: config.time_limit,
            max_nodes: None,
        };
        match lacam_solve(map, &tables, &starts, &goals, &mut rec, limits, config.seed) {
            Ok(sol) => (sol.configs, None),
            Err(e) => (vec![starts.clone()], Some(e.to_string())),
        }
    } else {
        standalone(map, &tables, &starts, &goals, config, &mut rec)
    };

    let makespan = configs.len() - 1;
    let success = failure.is_none() && configs.last() == Some(&goals);
    let total_cost = forward_cost(&configs, &goals);
    if success {
        if let Err(v) = validate_paths(map, &configs, &goals) {
            panic!("{} produced an invalid solution: {v}", config.algorithm);
        }
    }
    let normalized_cost = success.then(|| {
        if cost_lowerbound == 0 {
            1.0
        } else {
            total_cost as f64 / cost_lowerbound as f64
        }
    });
    let summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        success,
        total_cost,
        cost_lowerbound,
        normalized_cost,
        makespan,
        total_plan_time_ms: rec.plan_time.as_secs_f64() * 1e3,
        algorithm: config.algorithm,
        map: map_name.to_string(),
        scen: scen_name.to_string(),
        agents: config.agents,
        seed: config.seed,
        step_budget_ms: config.step_budget.ms,
        budget_mode: config.step_budget.mode,
        failure,
    };
    RunResult {
        summary,
        steps: rec.records,
        configs,
    }
}

fn standalone(
    map: &GridMap,
    tables: &[HeuristicTable],
    starts: &[Cell],
    goals: &[Cell],
    config: &RunConfig,
    rec: &mut Recording<'_>,
) -> (Vec<Vec<Cell>>, Option<String>) {
    let mut priorities = PriorityState::new(starts.len(), config.seed);
    ElapsedSinceGoal.update(&mut priorities, starts, goals);
    let mut configs = vec![starts.to_vec()];
    loop {
        let current = configs.last().unwrap();
        if current == goals {
            return (configs, None);
        }
        if rec.plan_time >= config.time_limit {
            return (configs, Some("time limit".into()));
        }
        if configs.len() > config.max_steps {
            return (configs, Some("step limit".into()));
        }
        let t = (configs.len() - 1) as u64;
        let ctx = StepContext::new(map, tables, current, &priorities, config.seed, t);
        let out = rec
            .generate(&ctx, &[])
            .expect("unconstrained generators always succeed");
        if let Some(c) = out.plan.first_collision(current) {
            panic!("{} produced a colliding step at t={t}: {c:?}", config.algorithm);
        }
        let next = out.plan.to_configuration().expect("complete plan").into_cells();
        ElapsedSinceGoal.update(&mut priorities, &next, goals);
        configs.push(next);
    }
}

/// Sum over steps and agents of [`step_cost`].
pub fn forward_cost(configs: &[Vec<Cell>], goals: &[Cell]) -> u64 {
    configs
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .zip(goals)
                .map(|((&s, &n), &g)| step_cost(s, n, g) as u64)
                .sum::<u64>()
        })
        .sum()
}

/// First problem found in a sequence of configurations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("no configurations")]
    Empty,
    #[error("t={t}: expected {expected} agents, found {found}")]
    AgentCount { t: usize, expected: usize, found: usize },
    #[error("t={t}: agent {agent} on blocked or out-of-bounds cell {cell}")]
    Impassable { t: usize, agent: AgentId, cell: Cell },
    #[error("t={t}: agent {agent} jumps from {from} to {to}")]
    Jump {
        t: usize,
        agent: AgentId,
        from: Cell,
        to: Cell,
    },
    #[error("t={t}: agents {a} and {b} both occupy {cell}")]
    Vertex {
        t: usize,
        a: AgentId,
        b: AgentId,
        cell: Cell,
    },
    #[error("t={t}: agents {a} and {b} swap {from} and {to}")]
    Edge {
        t: usize,
        a: AgentId,
        b: AgentId,
        from: Cell,
        to: Cell,
    },
    #[error("agent {agent} ends on {cell} instead of its goal {goal}")]
    GoalNotReached { agent: AgentId, cell: Cell, goal: Cell },
}

/// Verified properties of a valid solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathReport {
    pub makespan: usize,
    pub cost: u64,
}

/// Checks passability, unit moves, vertex and edge collisions at every
/// step, and that the last configuration equals `goals`.
pub fn validate_paths(map: &GridMap, configs: &[Vec<Cell>], goals: &[Cell]) -> Result<PathReport, Violation> {
    let first = configs.first().ok_or(Violation::Empty)?;
    let n = goals.len();
    for (t, config) in configs.iter().enumerate() {
        if config.len() != n {
            return Err(Violation::AgentCount {
                t,
                expected: n,
                found: config.len(),
            });
        }
        let mut seen = std::collections::HashMap::with_capacity(n);
        for (agent, &cell) in config.iter().enumerate() {
            if !map.is_passable(cell) {
                return Err(Violation::Impassable { t, agent, cell });
            }
            if let Some(b) = seen.insert(cell, agent) {
                return Err(Violation::Vertex {
                    t,
                    a: b,
                    b: agent,
                    cell,
                });
            }
        }
        if t == 0 {
            continue;
        }
        let prev = &configs[t - 1];
        let before: std::collections::HashMap<Cell, AgentId> = prev.iter().enumerate().map(|(a, &c)| (c, a)).collect();
        for agent in 0..n {
            let (from, to) = (prev[agent], config[agent]);
            if !GridMap::is_unit_step(from, to) {
                return Err(Violation::Jump { t, agent, from, to });
            }
            if from == to {
                continue;
            }
            if let Some(&b) = before.get(&to) {
                if b != agent && config[b] == from && agent < b {
                    return Err(Violation::Edge {
                        t,
                        a: agent,
                        b,
                        from,
                        to,
                    });
                }
            }
        }
    }
    let last = configs.last().unwrap_or(first);
    for agent in 0..n {
        if last[agent] != goals[agent] {
            return Err(Violation::GoalNotReached {
                agent,
                cell: last[agent],
                goal: goals[agent],
            });
        }
    }
    Ok(PathReport {
        makespan: configs.len() - 1,
        cost: forward_cost(configs, goals),
    })
}

/// Improvement of one budget at one step of the study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub t: u64,
    pub budget_ms: f64,
    pub f_initial: u64,
    pub f_final: u64,
    pub f_lowerbound: u64,
    pub improvement: u64,
    pub finished_all_groups: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub agents: usize,
    /// Budgets in milliseconds, ascending.
    pub budgets_ms: Vec<f64>,
    pub mode: BudgetMode,
    pub nodes_per_ms: f64,
    pub solve_mode: SolveMode,
    pub seed: u64,
    pub max_steps: usize,
}

/// Drives a standalone Anytime PIBT run with the largest budget and, at
/// every step, replays each budget from the identical state.
pub fn run_single_step_study(map: &GridMap, scenario: &[ScenarioEntry], config: &StudyConfig) -> Vec<StudyRecord> {
    assert!(
        config.budgets_ms.windows(2).all(|w| w[0] <= w[1]),
        "budgets must be ascending"
    );
    let entries = &scenario[..config.agents];
    let goals: Vec<Cell> = entries.iter().map(|e| e.goal).collect();
    let tables = compute_tables(map, &goals);
    let mut current: Vec<Cell> = entries.iter().map(|e| e.start).collect();
    let mut priorities = PriorityState::new(config.agents, config.seed);
    ElapsedSinceGoal.update(&mut priorities, &current, &goals);
    let mut out = Vec::new();

    for t in 0..config.max_steps as u64 {
        if current == goals {
            break;
        }
        let ctx = StepContext::new(map, &tables, &current, &priorities, config.seed, t);
        let mut driving: Option<StepPlan> = None;
        for &ms in &config.budgets_ms {
            let budget = StepBudget {
                ms,
                mode: config.mode,
                nodes_per_ms: config.nodes_per_ms,
            };
            let r = anytime_pibt(&ctx, &AnytimeOptions::new(budget.to_budget(), config.solve_mode));
            out.push(StudyRecord {
                t,
                budget_ms: ms,
                f_initial: r.f_initial,
                f_final: r.f_final,
                f_lowerbound: r.f_lowerbound,
                improvement: r.f_initial - r.f_final,
                finished_all_groups: r.finished,
            });
            driving = Some(r.plan);
        }
        let Some(plan) = driving else { break };
        current = plan.to_configuration().expect("complete plan").into_cells();
        ElapsedSinceGoal.update(&mut priorities, &current, &goals);
    }
    out
}

/// Mean improvement per budget, in the order of `budgets_ms`.
pub fn mean_improvements(records: &[StudyRecord], budgets_ms: &[f64]) -> Vec<f64> {
    budgets_ms
        .iter()
        .map(|&b| {
            let v: Vec<u64> = records
                .iter()
                .filter(|r| r.budget_ms == b)
                .map(|r| r.improvement)
                .collect();
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<u64>() as f64 / v.len() as f64
            }
        })
        .collect()
}

pub fn write_steps_csv<W: Write>(steps: &[StepRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if steps.is_empty() {
        w.write_record(STEP_CSV_HEADER)?;
    }
    for s in steps {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_steps_csv<R: std::io::Read>(input: R) -> csv::Result<Vec<StepRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn write_study_csv<W: Write>(records: &[StudyRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record([
            "t",
            "budget_ms",
            "f_initial",
            "f_final",
            "f_lowerbound",
            "improvement",
            "finished_all_groups",
        ])?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_study_csv<R: std::io::Read>(input: R) -> csv::Result<Vec<StudyRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn write_summary_json<W: Write>(summary: &RunSummary, out: W) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(out, summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(v: &[(u32, u32)]) -> Vec<Cell> {
        v.iter().map(|&(r, c)| Cell::new(r, c)).collect()
    }

    fn entries(starts: &[(u32, u32)], goals: &[(u32, u32)]) -> Vec<ScenarioEntry> {
        cells(starts)
            .into_iter()
            .zip(cells(goals))
            .map(|(start, goal)| ScenarioEntry {
                start,
                goal,
                reference_distance: 0.0,
            })
            .collect()
    }

    #[test]
    fn algorithm_names_roundtrip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{}\"", a.name()));
        }
        assert!("astar".parse::<Algorithm>().is_err());
    }

    #[test]
    fn agents_already_at_goals() {
        let map = GridMap::open(4, 4);
        let scen = entries(&[(0, 0), (3, 3)], &[(0, 0), (3, 3)]);
        for a in Algorithm::ALL {
            let r = run_full_horizon(&map, &scen, &RunConfig::new(a, 2), "m", "s");
            assert!(r.summary.success);
            assert_eq!(r.summary.total_cost, 0);
            assert_eq!(r.summary.makespan, 0);
            assert_eq!(r.summary.normalized_cost, Some(1.0));
        }
    }

    #[test]
    fn single_agent_cost_is_distance() {
        let map = GridMap::open(5, 5);
        let scen = entries(&[(0, 0)], &[(4, 3)]);
        for a in Algorithm::ALL {
            let r = run_full_horizon(&map, &scen, &RunConfig::new(a, 1), "m", "s");
            assert!(r.summary.success);
            assert_eq!(r.summary.total_cost, 7);
            assert_eq!(r.summary.cost_lowerbound, 7);
            assert_eq!(r.summary.normalized_cost, Some(1.0));
        }
    }

    #[test]
    fn validator_detects_violations() {
        let map = GridMap::from_rows(&["...", ".@."]);
        let goals = cells(&[(0, 1), (0, 0)]);
        let swap = vec![cells(&[(0, 0), (0, 1)]), cells(&[(0, 1), (0, 0)])];
        assert!(matches!(
            validate_paths(&map, &swap, &goals),
            Err(Violation::Edge { t: 1, .. })
        ));
        let meet = vec![cells(&[(0, 0), (0, 2)]), cells(&[(0, 1), (0, 1)])];
        assert!(matches!(
            validate_paths(&map, &meet, &goals),
            Err(Violation::Vertex { t: 1, a: 0, b: 1, .. })
        ));
        let wall = vec![cells(&[(1, 0)]), cells(&[(1, 1)])];
        assert!(matches!(
            validate_paths(&map, &wall, &cells(&[(1, 1)])),
            Err(Violation::Impassable { t: 1, .. })
        ));
        let jump = vec![cells(&[(0, 0)]), cells(&[(0, 2)])];
        assert!(matches!(
            validate_paths(&map, &jump, &cells(&[(0, 2)])),
            Err(Violation::Jump { .. })
        ));
        let short = vec![cells(&[(0, 0)]), cells(&[(0, 1)])];
        assert!(matches!(
            validate_paths(&map, &short, &cells(&[(0, 2)])),
            Err(Violation::GoalNotReached { .. })
        ));
        let ok = vec![cells(&[(0, 0)]), cells(&[(0, 1)]), cells(&[(0, 2)]), cells(&[(1, 2)])];
        assert_eq!(
            validate_paths(&map, &ok, &cells(&[(1, 2)])),
            Ok(PathReport { makespan: 3, cost: 3 })
        );
        assert_eq!(validate_paths(&map, &[], &goals), Err(Violation::Empty));
    }

    #[test]
    fn forward_cost_recharges_goal_departures() {
        let goals = cells(&[(0, 1)]);
        let configs = vec![
            cells(&[(0, 0)]),
            cells(&[(0, 1)]),
            cells(&[(0, 2)]),
            cells(&[(0, 1)]),
            cells(&[(0, 1)]),
        ];
        assert_eq!(forward_cost(&configs, &goals), 3);
    }

    #[test]
    fn step_csv_roundtrip() {
        let steps = vec![StepRecord {
            t: 0,
            f_initial: 10,
            f_final: 8,
            f_lowerbound: 7,
            groups: 2,
            merges: 1,
            plan_time_ms: 0.5,
            finished_all_groups: true,
        }];
        let mut buf = Vec::new();
        write_steps_csv(&steps, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), STEP_CSV_HEADER.join(","));
        assert_eq!(read_steps_csv(&buf[..]).unwrap(), steps);
        let mut empty = Vec::new();
        write_steps_csv(&[], &mut empty).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim(), STEP_CSV_HEADER.join(","));
    }

    #[test]
    fn non_interacting_agents_show_no_improvement() {
        let map = GridMap::open(9, 3);
        let scen = entries(&[(0, 0), (0, 4), (0, 8)], &[(2, 0), (2, 4), (2, 8)]);
        let cfg = StudyConfig {
            agents: 3,
            budgets_ms: vec![0.0, 0.1, 4.0],
            mode: BudgetMode::Nodes,
            nodes_per_ms: DEFAULT_NODES_PER_MS,
            solve_mode: SolveMode::Optimal,
            seed: 0,
            max_steps: 100,
        };
        let recs = run_single_step_study(&map, &scen, &cfg);
        assert_eq!(recs.len(), 3 * 2);
        assert!(recs.iter().all(|r| r.improvement == 0 && r.f_final == r.f_lowerbound));
    }
}
