//! Minimal LaCAM: depth-first search over joint configurations where each
//! high-level node lazily enumerates constraints and a single-step generator
//! realizes successor configurations.

use std::collections::{HashMap, VecDeque};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::anytime::{anytime_pibt_forced, AnytimeOptions};
use crate::grid::{Cell, GridMap};
use crate::heuristics::HeuristicTable;
use crate::pibt::{
    apply_forced, plan_remaining, AgentId, ElapsedSinceGoal, PriorityPolicy, PriorityState, StepContext, StepPlan,
    WorkingPlan,
};

/// Result of one generator call.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub plan: StepPlan,
    pub f_initial: u64,
    pub f_final: u64,
    pub f_lowerbound: u64,
    pub groups: usize,
    pub merges: usize,
    pub finished: bool,
    pub nodes: u64,
}

/// Produces a complete collision-free next configuration honoring `forced`,
/// or `None` when no completion exists.
pub trait StepGenerator {
    fn generate(&mut self, ctx: &StepContext<'_>, forced: &[(AgentId, Cell)]) -> Option<StepOutcome>;
}

/// Plain PIBT.
#[derive(Debug, Clone, Copy, Default)]
pub struct PibtGenerator;

impl StepGenerator for PibtGenerator {
    fn generate(&mut self, ctx: &StepContext<'_>, forced: &[(AgentId, Cell)]) -> Option<StepOutcome> {
        let mut work = WorkingPlan::new(ctx.num_agents(), ctx.map().num_cells());
        apply_forced(ctx, &mut work, forced).ok()?;
        if !plan_remaining(ctx, &mut work, &mut ()) {
            return None;
        }
        let plan = work.to_step_plan(ctx.map());
        let f = ctx.plan_fsum(&plan);
        Some(StepOutcome {
            plan,
            f_initial: f,
            f_final: f,
            f_lowerbound: ctx.lower_bound(),
            groups: 0,
            merges: 0,
            finished: true,
            nodes: 0,
        })
    }
}

/// Anytime PIBT with a per-call budget.
#[derive(Debug, Clone, Copy)]
pub struct AnytimeGenerator {
    pub options: AnytimeOptions,
}

impl StepGenerator for AnytimeGenerator {
    fn generate(&mut self, ctx: &StepContext<'_>, forced: &[(AgentId, Cell)]) -> Option<StepOutcome> {
        let out = anytime_pibt_forced(ctx, &self.options, forced).ok()?;
        Some(StepOutcome {
            plan: out.plan,
            f_initial: out.f_initial,
            f_final: out.f_final,
            f_lowerbound: out.f_lowerbound,
            groups: out.initial_groups,
            merges: out.merges,
            finished: out.finished,
            nodes: out.nodes,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LacamLimits {
    pub time: Duration,
    /// Cap on high-level nodes, for deterministic failure in tests.
    pub max_nodes: Option<usize>,
}

impl Default for LacamLimits {
    fn default() -> Self {
        Self {
            time: Duration::from_secs(60),
            max_nodes: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LacamStats {
    pub high_level_nodes: usize,
    pub generator_calls: usize,
    pub generator_failures: usize,
    pub duplicates: usize,
    pub elapsed: Duration,
    /// Sum of `f_initial - f_final` over all generator calls.
    pub improvement: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LacamSolution {
    /// Configurations from the starts to the goals.
    pub configs: Vec<Vec<Cell>>,
    pub stats: LacamStats,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LacamError {
    #[error("time limit reached after {} high-level nodes", .0.high_level_nodes)]
    Timeout(LacamStats),
    #[error("node limit reached")]
    NodeLimit(LacamStats),
    #[error("search space exhausted without reaching the goals")]
    Exhausted(LacamStats),
}

impl LacamError {
    pub fn stats(&self) -> &LacamStats {
        match self {
            LacamError::Timeout(s) | LacamError::NodeLimit(s) | LacamError::Exhausted(s) => s,
        }
    }
}

struct Constraint {
    parent: Option<u32>,
    agent: AgentId,
    cell: Cell,
    depth: usize,
}

struct HighLevelNode {
    config: Vec<Cell>,
    priorities: PriorityState,
    order: Vec<AgentId>,
    tree: VecDeque<u32>,
    parent: Option<usize>,
    depth: u64,
}

/// Searches for collision-free paths from `starts` to `goals`.
pub fn lacam_solve<G: StepGenerator>(
    map: &GridMap,
    tables: &[HeuristicTable],
    starts: &[Cell],
    goals: &[Cell],
    generator: &mut G,
    limits: LacamLimits,
    seed: u64,
) -> Result<LacamSolution, LacamError> {
    let begin = Instant::now();
    let n = starts.len();
    assert_eq!(goals.len(), n);
    let mut stats = LacamStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constraints: Vec<Constraint> = Vec::new();
    let mut nodes: Vec<HighLevelNode> = Vec::new();
    let mut explored: HashMap<Vec<Cell>, usize> = HashMap::new();
    let mut open: Vec<usize> = Vec::new();

    let new_node = |config: Vec<Cell>,
                    priorities: PriorityState,
                    parent: Option<usize>,
                    depth: u64,
                    constraints: &mut Vec<Constraint>,
                    nodes: &mut Vec<HighLevelNode>| {
        constraints.push(Constraint {
            parent: None,
            agent: 0,
            cell: Cell::new(0, 0),
            depth: 0,
        });
        let root = (constraints.len() - 1) as u32;
        nodes.push(HighLevelNode {
            order: priorities.order(),
            config,
            priorities,
            tree: VecDeque::from([root]),
            parent,
            depth,
        });
        nodes.len() - 1
    };

    let mut p0 = PriorityState::new(n, seed);
    ElapsedSinceGoal.update(&mut p0, starts, goals);
    let root = new_node(starts.to_vec(), p0, None, 0, &mut constraints, &mut nodes);
    explored.insert(starts.to_vec(), root);
    open.push(root);
    stats.high_level_nodes = 1;

    let mut forced: Vec<(AgentId, Cell)> = Vec::new();
    while let Some(&top) = open.last() {
        if begin.elapsed() >= limits.time {
            stats.elapsed = begin.elapsed();
            return Err(LacamError::Timeout(stats));
        }
        if nodes[top].config == goals {
            let mut configs = Vec::new();
            let mut cur = Some(top);
            while let Some(i) = cur {
                configs.push(nodes[i].config.clone());
                cur = nodes[i].parent;
            }
            configs.reverse();
            stats.elapsed = begin.elapsed();
            return Ok(LacamSolution { configs, stats });
        }
        let Some(c) = nodes[top].tree.pop_front() else {
            open.pop();
            continue;
        };

        let depth = constraints[c as usize].depth;
        if depth < n {
            let agent = nodes[top].order[depth];
            let mut cells: Vec<Cell> = map.neighbors(nodes[top].config[agent]).into_iter().collect();
            cells.shuffle(&mut rng);
            for cell in cells {
                constraints.push(Constraint {
                    parent: Some(c),
                    agent,
                    cell,
                    depth: depth + 1,
                });
                let id = (constraints.len() - 1) as u32;
                nodes[top].tree.push_back(id);
            }
        }

        forced.clear();
        let mut cur = c;
        while let Some(parent) = constraints[cur as usize].parent {
            forced.push((constraints[cur as usize].agent, constraints[cur as usize].cell));
            cur = parent;
        }
        forced.reverse();

        let node = &nodes[top];
        let ctx = StepContext::new(map, tables, &node.config, &node.priorities, seed, node.depth);
        stats.generator_calls += 1;
        let Some(out) = generator.generate(&ctx, &forced) else {
            stats.generator_failures += 1;
            continue;
        };
        stats.improvement += out.f_initial - out.f_final;
        let next = out
            .plan
            .to_configuration()
            .expect("generator returns complete plans")
            .into_cells();
        if explored.contains_key(&next) {
            stats.duplicates += 1;
            continue;
        }
        if limits.max_nodes.is_some_and(|m| stats.high_level_nodes >= m) {
            stats.elapsed = begin.elapsed();
            return Err(LacamError::NodeLimit(stats));
        }
        let mut priorities = node.priorities.clone();
        ElapsedSinceGoal.update(&mut priorities, &next, goals);
        let depth = node.depth + 1;
        let id = new_node(next.clone(), priorities, Some(top), depth, &mut constraints, &mut nodes);
        explored.insert(next, id);
        open.push(id);
        stats.high_level_nodes += 1;
    }
    stats.elapsed = begin.elapsed();
    Err(LacamError::Exhausted(stats))
}
