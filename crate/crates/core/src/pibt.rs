//! Single-step PIBT (priority inheritance with backtracking) and its
//! grouping-instrumented form.

use std::collections::HashMap;
use std::ops::Deref;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use crate::grid::{Cell, GridMap};
use crate::heuristics::{fvalue, HeuristicTable};

pub type AgentId = usize;

/// Empty slot marker for agent and cell indexed tables.
pub(crate) const NONE: u32 = u32::MAX;

/// Cells of all agents at one timestep, indexed by agent id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration(Vec<Cell>);

impl Configuration {
    pub fn new(cells: Vec<Cell>) -> Self {
        Self(cells)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.0
    }

    pub fn into_cells(self) -> Vec<Cell> {
        self.0
    }

    /// Checks passability and that no two agents share a cell.
    pub fn is_valid(&self, map: &GridMap) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.0.len());
        self.0.iter().all(|&c| map.is_passable(c) && seen.insert(c))
    }
}

impl Deref for Configuration {
    type Target = [Cell];

    fn deref(&self) -> &[Cell] {
        &self.0
    }
}

impl From<Vec<Cell>> for Configuration {
    fn from(cells: Vec<Cell>) -> Self {
        Self(cells)
    }
}

/// A conflict between two agents over one transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Collision {
    Vertex {
        a: AgentId,
        b: AgentId,
        cell: Cell,
    },
    Edge {
        a: AgentId,
        b: AgentId,
        from: Cell,
        to: Cell,
    },
}

/// Next cells for each agent; `None` marks an unplanned agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepPlan {
    next: Vec<Option<Cell>>,
}

impl StepPlan {
    pub fn unplanned(n: usize) -> Self {
        Self { next: vec![None; n] }
    }

    pub fn from_cells(cells: &[Cell]) -> Self {
        Self {
            next: cells.iter().copied().map(Some).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.next.len()
    }

    pub fn is_empty(&self) -> bool {
        self.next.is_empty()
    }

    pub fn get(&self, agent: AgentId) -> Option<Cell> {
        self.next[agent]
    }

    pub fn set(&mut self, agent: AgentId, cell: Option<Cell>) {
        self.next[agent] = cell;
    }

    pub fn is_complete(&self) -> bool {
        self.next.iter().all(Option::is_some)
    }

    pub fn as_slice(&self) -> &[Option<Cell>] {
        &self.next
    }

    /// The planned cells as a configuration, if every agent is planned.
    pub fn to_configuration(&self) -> Option<Configuration> {
        self.next.iter().copied().collect::<Option<Vec<_>>>().map(Configuration)
    }

    /// First vertex or edge collision among planned agents, checked with
    /// hash lookups independently of the planners' reservation tables.
    pub fn first_collision(&self, config: &[Cell]) -> Option<Collision> {
        let mut at_next: HashMap<Cell, AgentId> = HashMap::with_capacity(self.next.len());
        for (a, next) in self.next.iter().enumerate() {
            if let Some(c) = *next {
                if let Some(&b) = at_next.get(&c) {
                    return Some(Collision::Vertex { a: b, b: a, cell: c });
                }
                at_next.insert(c, a);
            }
        }
        let at_now: HashMap<Cell, AgentId> = config.iter().enumerate().map(|(a, &c)| (c, a)).collect();
        for (a, next) in self.next.iter().enumerate() {
            let Some(to) = *next else { continue };
            let from = config[a];
            if to == from {
                continue;
            }
            if let Some(&b) = at_now.get(&to) {
                if b != a && self.next[b] == Some(from) {
                    return Some(Collision::Edge { a, b, from, to });
                }
            }
        }
        None
    }
}

/// Per-agent priorities. `epsilon` is a unique value in `[0, 1)` that keeps
/// priorities pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityState {
    priority: Vec<f64>,
    epsilon: Vec<f64>,
}

impl PriorityState {
    /// Fresh priorities equal to a seeded permutation of `i / n`.
    pub fn new(n: usize, seed: u64) -> Self {
        let mut ranks: Vec<usize> = (0..n).collect();
        ranks.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let epsilon: Vec<f64> = ranks.iter().map(|&r| r as f64 / n.max(1) as f64).collect();
        Self {
            priority: epsilon.clone(),
            epsilon,
        }
    }

    /// Explicit priorities; ties are broken by a small agent-index epsilon.
    pub fn from_priorities(priority: Vec<f64>) -> Self {
        let n = priority.len().max(1) as f64;
        let epsilon: Vec<f64> = (0..priority.len()).map(|i| (i as f64) / n * 1e-6).collect();
        let priority = priority.iter().zip(&epsilon).map(|(p, e)| p + e).collect();
        Self { priority, epsilon }
    }

    pub fn len(&self) -> usize {
        self.priority.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priority.is_empty()
    }

    pub fn priority(&self, agent: AgentId) -> f64 {
        self.priority[agent]
    }

    /// Agents sorted by descending priority.
    pub fn order(&self) -> Vec<AgentId> {
        let mut order: Vec<AgentId> = (0..self.priority.len()).collect();
        order.sort_by(|&a, &b| self.priority[b].total_cmp(&self.priority[a]).then(a.cmp(&b)));
        order
    }
}

/// How priorities evolve between timesteps.
pub trait PriorityPolicy {
    fn update(&self, state: &mut PriorityState, config: &[Cell], goals: &[Cell]);
}

/// Priority grows by one for every step spent away from the goal and resets
/// to its epsilon on the goal.
#[derive(Debug, Clone, Copy, Default)]
pub struct ElapsedSinceGoal;

impl PriorityPolicy for ElapsedSinceGoal {
    fn update(&self, state: &mut PriorityState, config: &[Cell], goals: &[Cell]) {
        for (i, (c, g)) in config.iter().zip(goals).enumerate() {
            if c == g {
                state.priority[i] = state.epsilon[i];
            } else {
                state.priority[i] += 1.0;
            }
        }
    }
}

/// Leaves priorities untouched.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedPriorities;

impl PriorityPolicy for FixedPriorities {
    fn update(&self, _: &mut PriorityState, _: &[Cell], _: &[Cell]) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub cell: Cell,
    pub(crate) index: u32,
    pub f: u32,
}

/// Candidate next cells of one agent, ascending by f-value.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateList(SmallVec<[Candidate; 5]>);

impl CandidateList {
    pub fn as_slice(&self) -> &[Candidate] {
        &self.0
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.0.iter().map(|c| c.cell).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_f(&self) -> Option<u32> {
        self.0.first().map(|c| c.f)
    }

    /// The prefix tied at the minimal f-value.
    pub fn best_ties(&self) -> &[Candidate] {
        let n = match self.min_f() {
            Some(f) => self.0.iter().take_while(|c| c.f == f).count(),
            None => 0,
        };
        &self.0[..n]
    }
}

/// Neighbors of `agent` sorted by f-value, unreachable cells dropped. Ties
/// follow a shuffle seeded by `(seed, timestep, agent)`.
pub fn sorted_candidates(
    map: &GridMap,
    agent: AgentId,
    config: &[Cell],
    tables: &[HeuristicTable],
    seed: u64,
    timestep: u64,
) -> CandidateList {
    let s = config[agent];
    let table = &tables[agent];
    let mut items: SmallVec<[Candidate; 5]> = map
        .neighbors(s)
        .into_iter()
        .filter_map(|c| {
            fvalue(table, s, c).map(|f| Candidate {
                cell: c,
                index: map.index(c) as u32,
                f,
            })
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(timestep.wrapping_shl(32) ^ agent as u64);
    items.shuffle(&mut rng);
    items.sort_by_key(|c| c.f);
    CandidateList(items)
}

/// Tiebreak-mode candidates: only the cells tied at the agent's minimal f-value.
pub fn tiebreak_candidates(
    map: &GridMap,
    agent: AgentId,
    config: &[Cell],
    tables: &[HeuristicTable],
    seed: u64,
    timestep: u64,
) -> CandidateList {
    let all = sorted_candidates(map, agent, config, tables, seed, timestep);
    CandidateList(all.best_ties().iter().copied().collect())
}

/// Receives `Group(k, j)` notifications from the planners.
pub trait GroupSink {
    fn group(&mut self, k: AgentId, j: AgentId);
}

impl GroupSink for () {
    #[inline]
    fn group(&mut self, _: AgentId, _: AgentId) {}
}

/// Read-only per-step data shared by PIBT, Anytime PIBT and the generators.
#[derive(Debug, Clone)]
pub struct StepContext<'a> {
    pub(crate) map: &'a GridMap,
    pub(crate) tables: &'a [HeuristicTable],
    pub(crate) cells: Vec<Cell>,
    pub(crate) current: Vec<u32>,
    pub(crate) occupant: Vec<u32>,
    pub(crate) candidates: Vec<CandidateList>,
    pub(crate) order: Vec<AgentId>,
    pub(crate) rank: Vec<u32>,
    pub(crate) priorities: PriorityState,
    pub(crate) timestep: u64,
}

impl<'a> StepContext<'a> {
    pub fn new(
        map: &'a GridMap,
        tables: &'a [HeuristicTable],
        config: &[Cell],
        priorities: &PriorityState,
        seed: u64,
        timestep: u64,
    ) -> Self {
        assert_eq!(config.len(), tables.len());
        assert_eq!(config.len(), priorities.len());
        let mut occupant = vec![NONE; map.num_cells()];
        let current: Vec<u32> = config.iter().map(|&c| map.index(c) as u32).collect();
        for (a, &i) in current.iter().enumerate() {
            debug_assert_eq!(occupant[i as usize], NONE, "agents share a cell");
            occupant[i as usize] = a as u32;
        }
        let candidates = (0..config.len())
            .map(|a| sorted_candidates(map, a, config, tables, seed, timestep))
            .collect();
        let order = priorities.order();
        let mut rank = vec![0u32; config.len()];
        for (r, &a) in order.iter().enumerate() {
            rank[a] = r as u32;
        }
        Self {
            map,
            tables,
            cells: config.to_vec(),
            current,
            occupant,
            candidates,
            order,
            rank,
            priorities: priorities.clone(),
            timestep,
        }
    }

    pub fn timestep(&self) -> u64 {
        self.timestep
    }

    pub fn priorities(&self) -> &PriorityState {
        &self.priorities
    }

    pub fn num_agents(&self) -> usize {
        self.cells.len()
    }

    pub fn map(&self) -> &GridMap {
        self.map
    }

    pub fn tables(&self) -> &[HeuristicTable] {
        self.tables
    }

    pub fn config(&self) -> &[Cell] {
        &self.cells
    }

    pub fn candidates(&self, agent: AgentId) -> &CandidateList {
        &self.candidates[agent]
    }

    /// Agents by descending priority.
    pub fn order(&self) -> &[AgentId] {
        &self.order
    }

    /// Position of `agent` in [`Self::order`].
    pub fn rank(&self, agent: AgentId) -> usize {
        self.rank[agent] as usize
    }

    /// f-value of moving `agent` to `cell`; `None` for a non-neighbor or unreachable cell.
    pub fn fvalue_of(&self, agent: AgentId, cell: Cell) -> Option<u32> {
        self.candidates[agent]
            .as_slice()
            .iter()
            .find(|c| c.cell == cell)
            .map(|c| c.f)
    }

    /// Sum of per-agent minimal f-values.
    pub fn lower_bound(&self) -> u64 {
        self.candidates.iter().map(|c| c.min_f().unwrap_or(0) as u64).sum()
    }

    /// f-sum of a plan; unplanned agents contribute nothing.
    pub fn plan_fsum(&self, plan: &StepPlan) -> u64 {
        plan.as_slice()
            .iter()
            .enumerate()
            .filter_map(|(a, c)| c.map(|c| self.fvalue_of(a, c).expect("planned cell is a candidate") as u64))
            .sum()
    }

    #[inline]
    pub(crate) fn occupant_of(&self, index: u32) -> Option<AgentId> {
        match self.occupant[index as usize] {
            NONE => None,
            a => Some(a as AgentId),
        }
    }
}

/// Mutable reservation state `π^{t+1}` with O(1) vertex and edge checks.
#[derive(Debug, Clone)]
pub(crate) struct WorkingPlan {
    pub(crate) next: Vec<u32>,
    reserved: Vec<u32>,
}

impl WorkingPlan {
    pub(crate) fn new(num_agents: usize, num_cells: usize) -> Self {
        Self {
            next: vec![NONE; num_agents],
            reserved: vec![NONE; num_cells],
        }
    }

    #[inline]
    pub(crate) fn is_planned(&self, agent: AgentId) -> bool {
        self.next[agent] != NONE
    }

    #[inline]
    pub(crate) fn reserve(&mut self, agent: AgentId, index: u32) {
        debug_assert_eq!(self.next[agent], NONE);
        debug_assert_eq!(self.reserved[index as usize], NONE);
        self.next[agent] = index;
        self.reserved[index as usize] = agent as u32;
    }

    #[inline]
    pub(crate) fn clear(&mut self, agent: AgentId) {
        let index = self.next[agent];
        if index != NONE {
            self.reserved[index as usize] = NONE;
            self.next[agent] = NONE;
        }
    }

    /// Agents whose plans collide with `agent` moving to `target`: the agent
    /// that reserved `target` (vertex), and the agent at `target` that plans
    /// to move onto `agent`'s cell (edge).
    #[inline]
    pub(crate) fn conflicts(
        &self,
        ctx: &StepContext<'_>,
        agent: AgentId,
        target: u32,
    ) -> (Option<AgentId>, Option<AgentId>) {
        let vertex = match self.reserved[target as usize] {
            NONE => None,
            j => Some(j as AgentId),
        };
        let edge = ctx
            .occupant_of(target)
            .filter(|&j| j != agent && self.next[j] == ctx.current[agent]);
        (vertex, edge)
    }

    pub(crate) fn to_step_plan(&self, map: &GridMap) -> StepPlan {
        StepPlan {
            next: self
                .next
                .iter()
                .map(|&i| (i != NONE).then(|| map.cell_at(i as usize)))
                .collect(),
        }
    }
}

/// Recursive PIBT-Gr: tries `k`'s candidates in f order, reporting every
/// blocking and every bump through `sink`. Returns `false` on failure, in
/// which case nothing reserved by this call remains reserved.
pub(crate) fn pibt_gr<S: GroupSink>(ctx: &StepContext<'_>, work: &mut WorkingPlan, k: AgentId, sink: &mut S) -> bool {
    debug_assert!(!work.is_planned(k));
    for cand in ctx.candidates[k].as_slice() {
        let (vertex, edge) = work.conflicts(ctx, k, cand.index);
        if vertex.is_some() || edge.is_some() {
            for j in vertex.into_iter().chain(edge) {
                sink.group(k, j);
            }
            continue;
        }
        work.reserve(k, cand.index);
        match ctx.occupant_of(cand.index) {
            Some(j) if j != k && !work.is_planned(j) => {
                sink.group(k, j);
                if pibt_gr(ctx, work, j, sink) {
                    return true;
                }
                work.clear(k);
            }
            _ => return true,
        }
    }
    false
}

/// Plans every still-unplanned agent in priority order. Returns `false` if a
/// root call fails, which only happens when forced assignments were applied
/// beforehand.
pub(crate) fn plan_remaining<S: GroupSink>(ctx: &StepContext<'_>, work: &mut WorkingPlan, sink: &mut S) -> bool {
    for &k in &ctx.order {
        if !work.is_planned(k) && !pibt_gr(ctx, work, k, sink) {
            return false;
        }
    }
    true
}

/// One PIBT step over a prepared context. Grouping is optional bookkeeping
/// and never changes the plan.
pub fn pibt_plan<S: GroupSink>(ctx: &StepContext<'_>, sink: &mut S) -> StepPlan {
    let mut work = WorkingPlan::new(ctx.num_agents(), ctx.map.num_cells());
    let ok = plan_remaining(ctx, &mut work, sink);
    assert!(ok, "unconstrained PIBT root call failed");
    work.to_step_plan(ctx.map)
}

/// One PIBT step from scratch.
pub fn pibt_step(
    map: &GridMap,
    config: &[Cell],
    priorities: &PriorityState,
    tables: &[HeuristicTable],
    seed: u64,
    timestep: u64,
    grouping: Option<&mut crate::djag::GroupSet>,
) -> StepPlan {
    let ctx = StepContext::new(map, tables, config, priorities, seed, timestep);
    match grouping {
        Some(set) => pibt_plan(&ctx, set),
        None => pibt_plan(&ctx, &mut ()),
    }
}

/// Why a set of forced assignments cannot be honored.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ForcedError {
    #[error("agent {agent} cannot move from {from} to {to} in one step")]
    NotANeighbor { agent: AgentId, from: Cell, to: Cell },
    #[error("forced assignments collide")]
    Collision,
    #[error("agent {0} is forced twice")]
    Duplicate(AgentId),
    #[error("no collision-free completion around the forced assignments")]
    Infeasible,
}

/// Reserves forced assignments into `work` after checking them pairwise.
pub(crate) fn apply_forced(
    ctx: &StepContext<'_>,
    work: &mut WorkingPlan,
    forced: &[(AgentId, Cell)],
) -> Result<(), ForcedError> {
    for &(agent, to) in forced {
        let from = ctx.cells[agent];
        if ctx.fvalue_of(agent, to).is_none() {
            return Err(ForcedError::NotANeighbor { agent, from, to });
        }
        if work.is_planned(agent) {
            return Err(ForcedError::Duplicate(agent));
        }
        let index = ctx.map.index(to) as u32;
        let (vertex, edge) = work.conflicts(ctx, agent, index);
        if vertex.is_some() || edge.is_some() {
            return Err(ForcedError::Collision);
        }
        work.reserve(agent, index);
    }
    Ok(())
}

/// PIBT with some agents' next cells fixed in advance. Forced agents are
/// planned first and never revisited; everyone else is planned around them.
pub fn constrained_pibt(ctx: &StepContext<'_>, forced: &[(AgentId, Cell)]) -> Result<StepPlan, ForcedError> {
    let mut work = WorkingPlan::new(ctx.num_agents(), ctx.map.num_cells());
    apply_forced(ctx, &mut work, forced)?;
    if !plan_remaining(ctx, &mut work, &mut ()) {
        return Err(ForcedError::Infeasible);
    }
    Ok(work.to_step_plan(ctx.map))
}
