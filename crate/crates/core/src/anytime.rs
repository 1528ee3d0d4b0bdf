//! Anytime PIBT: an initial PIBT pass that records disjoint agent groups,
//! followed by a depth-first branch-and-bound over each group's joint
//! actions until the deadline.
//!
//! The group search walks agents in PIBT order (highest priority first, with
//! priority inheritance into bumped agents) and each agent's candidates in
//! ascending f-value. A branch is cut as soon as the accumulated f-sum reaches
//! the group's best known value; because candidates are sorted, the cut skips
//! the remaining candidates of that agent too. Conflicts with agents outside
//! the group merge their groups, and merged groups are replanned later.

use std::time::{Duration, Instant};

use crate::djag::{allocate, extract_groups, Group, GroupQueue, GroupSet};
use crate::grid::Cell;
use crate::pibt::{
    apply_forced, plan_remaining, AgentId, Candidate, ForcedError, StepContext, StepPlan, WorkingPlan, NONE,
};

/// Planning allowance, either wall-clock or a count of candidate iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Wall(Duration),
    /// Deterministic budget in search nodes, for machine-independent runs.
    Nodes(u64),
    Unlimited,
}

impl Budget {
    pub fn from_millis(ms: f64) -> Self {
        Budget::Wall(Duration::from_secs_f64(ms.max(0.0) / 1e3))
    }
}

#[derive(Debug, Clone, Copy)]
enum Clock {
    Wall { start: Instant, budget: Duration },
    Nodes { start: u64, limit: u64 },
    Unlimited,
}

/// A running budget. Once [`Deadline::expired`] reports `true` it stays `true`.
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    clock: Clock,
    expired: bool,
}

impl Deadline {
    /// Starts the clock now. `nodes_now` is the caller's node counter.
    pub fn start(budget: Budget, nodes_now: u64) -> Self {
        let clock = match budget {
            Budget::Wall(budget) => Clock::Wall {
                start: Instant::now(),
                budget,
            },
            Budget::Nodes(limit) => Clock::Nodes {
                start: nodes_now,
                limit,
            },
            Budget::Unlimited => Clock::Unlimited,
        };
        Self { clock, expired: false }
    }

    pub fn unlimited() -> Self {
        Self::start(Budget::Unlimited, 0)
    }

    #[inline]
    pub fn expired(&mut self, nodes_now: u64) -> bool {
        if !self.expired {
            self.expired = match self.clock {
                Clock::Wall { start, budget } => start.elapsed() >= budget,
                Clock::Nodes { start, limit } => nodes_now - start >= limit,
                Clock::Unlimited => false,
            };
        }
        self.expired
    }

    /// A child deadline holding `k / (k + queued_agents)` of what is left.
    pub fn share(&self, k: usize, queued_agents: usize, nodes_now: u64) -> Deadline {
        let clock = match self.clock {
            Clock::Wall { start, budget } => {
                let left = budget.saturating_sub(start.elapsed());
                let nanos = allocate(k, queued_agents, left.as_nanos().min(u64::MAX as u128) as u64);
                Clock::Wall {
                    start: Instant::now(),
                    budget: Duration::from_nanos(nanos),
                }
            }
            Clock::Nodes { start, limit } => {
                let left = limit.saturating_sub(nodes_now - start);
                Clock::Nodes {
                    start: nodes_now,
                    limit: allocate(k, queued_agents, left),
                }
            }
            Clock::Unlimited => Clock::Unlimited,
        };
        Deadline {
            clock,
            expired: self.expired,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum SolveMode {
    /// Search every candidate; converges to the optimal single-step plan.
    #[default]
    Optimal,
    /// Search only each agent's individually best actions.
    Tiebreak,
}

/// Options for the group search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub mode: SolveMode,
    /// Cut branches whose f-sum reaches the incumbent. Disabling this is only
    /// useful for checking that the cut never changes the result.
    pub pruning: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            mode: SolveMode::Optimal,
            pruning: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnytimeOptions {
    pub budget: Budget,
    pub search: SearchOptions,
    /// Split agents into disjoint groups; when off, all agents form one group.
    pub grouping: bool,
}

impl AnytimeOptions {
    pub fn new(budget: Budget, mode: SolveMode) -> Self {
        Self {
            budget,
            search: SearchOptions { mode, pruning: true },
            grouping: true,
        }
    }
}

/// Result of one group search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSolveResult {
    /// The deadline cut the search before it exhausted all unpruned branches.
    pub early_exit: bool,
    /// The group's agents plus every agent merged in by cross-group conflicts.
    pub new_group: Vec<AgentId>,
    /// Best f-values recorded during the search, starting with the value on entry.
    pub fb_trace: Vec<u64>,
    pub nodes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Flow {
    Exhausted,
    Cutoff,
}

struct Search<'g> {
    agents: &'g [AgentId],
    best_f: u64,
    best: Vec<u32>,
    trace: Vec<u64>,
}

/// Group search state over one step: the working plan of all agents, the
/// incumbent plan, and the group partition.
#[derive(Debug, Clone)]
pub struct GroupSolver<'c, 'a> {
    ctx: &'c StepContext<'a>,
    work: WorkingPlan,
    incumbent: Vec<u32>,
    groups: GroupSet,
    options: SearchOptions,
    in_aop: Vec<bool>,
    nodes: u64,
}

impl<'c, 'a> GroupSolver<'c, 'a> {
    /// Starts from a complete, collision-free `incumbent`.
    pub fn new(ctx: &'c StepContext<'a>, incumbent: &StepPlan, groups: GroupSet, options: SearchOptions) -> Self {
        assert!(incumbent.is_complete(), "incumbent must plan every agent");
        let mut work = WorkingPlan::new(ctx.num_agents(), ctx.map.num_cells());
        for (a, c) in incumbent.as_slice().iter().enumerate() {
            work.reserve(a, ctx.map.index(c.unwrap()) as u32);
        }
        Self::from_parts(ctx, work, groups, options)
    }

    fn from_parts(ctx: &'c StepContext<'a>, work: WorkingPlan, groups: GroupSet, options: SearchOptions) -> Self {
        let incumbent = work.next.clone();
        Self {
            ctx,
            in_aop: vec![false; ctx.num_agents()],
            work,
            incumbent,
            groups,
            options,
            nodes: 0,
        }
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    pub fn groups(&mut self) -> &mut GroupSet {
        &mut self.groups
    }

    /// The best complete plan found so far.
    pub fn plan(&self) -> StepPlan {
        let mut plan = StepPlan::unplanned(self.incumbent.len());
        for (a, &i) in self.incumbent.iter().enumerate() {
            plan.set(a, Some(self.ctx.map.cell_at(i as usize)));
        }
        plan
    }

    /// f-sum of the incumbent over `agents`.
    pub fn incumbent_fsum(&self, agents: &[AgentId]) -> u64 {
        agents
            .iter()
            .map(|&a| {
                let i = self.incumbent[a];
                self.ctx.candidates[a]
                    .as_slice()
                    .iter()
                    .find(|c| c.index == i)
                    .expect("incumbent cell is a candidate")
                    .f as u64
            })
            .sum()
    }

    pub fn total_fsum(&self) -> u64 {
        let all: Vec<AgentId> = (0..self.incumbent.len()).collect();
        self.incumbent_fsum(&all)
    }

    /// Replans `group` with every other agent frozen at its incumbent plan.
    /// Improvements update `group.best_f` and the incumbent.
    pub fn solve_group(&mut self, group: &mut Group, deadline: &mut Deadline) -> GroupSolveResult {
        let nodes_before = self.nodes;
        for &a in &group.agents {
            self.work.clear(a);
            self.in_aop[a] = true;
        }
        let mut search = Search {
            agents: &group.agents,
            best_f: group.best_f,
            best: Vec::new(),
            trace: vec![group.best_f],
        };
        let flow = self.recurse(&mut search, 0, None, group.agents.len(), 0, deadline);
        debug_assert!(group.agents.iter().all(|&a| !self.work.is_planned(a)));

        if !search.best.is_empty() {
            for (&a, &cell) in group.agents.iter().zip(&search.best) {
                self.incumbent[a] = cell;
            }
        }
        group.best_f = search.best_f;
        for &a in &group.agents {
            self.in_aop[a] = false;
            let cell = self.incumbent[a];
            if cell != NONE {
                self.work.reserve(a, cell);
            }
        }

        let mut new_group = self.groups.component(group.agents[0]).to_vec();
        if new_group.len() == group.len() {
            new_group.clone_from(&group.agents);
        }
        GroupSolveResult {
            early_exit: flow == Flow::Cutoff,
            new_group,
            fb_trace: search.trace,
            nodes: self.nodes - nodes_before,
        }
    }

    fn candidates(&self, agent: AgentId) -> &'c [Candidate] {
        let list = &self.ctx.candidates[agent];
        match self.options.mode {
            SolveMode::Optimal => list.as_slice(),
            SolveMode::Tiebreak => list.best_ties(),
        }
    }

    fn recurse(
        &mut self,
        s: &mut Search<'_>,
        cursor: usize,
        agent: Option<AgentId>,
        remaining: usize,
        f_acc: u64,
        deadline: &mut Deadline,
    ) -> Flow {
        // agents before `cursor` in priority order are already planned on this branch
        let (k, cursor) = match agent {
            Some(k) => (k, cursor),
            None => {
                let mut c = cursor;
                while !self.in_aop[s.agents[c]] {
                    c += 1;
                }
                (s.agents[c], c)
            }
        };
        debug_assert!(self.in_aop[k]);
        self.in_aop[k] = false;
        let remaining = remaining - 1;
        let ctx = self.ctx;

        let mut flow = Flow::Exhausted;
        for cand in self.candidates(k) {
            if deadline.expired(self.nodes) {
                flow = Flow::Cutoff;
                break;
            }
            self.nodes += 1;

            let (vertex, edge) = self.work.conflicts(ctx, k, cand.index);
            if vertex.is_some() || edge.is_some() {
                for j in vertex.into_iter().chain(edge) {
                    self.groups.union(k, j);
                }
                continue;
            }

            let f_next = f_acc + cand.f as u64;
            if self.options.pruning && f_next >= s.best_f {
                break;
            }

            self.work.reserve(k, cand.index);
            if remaining == 0 {
                if f_next < s.best_f {
                    s.best_f = f_next;
                    s.best.clear();
                    s.best.extend(s.agents.iter().map(|&a| self.work.next[a]));
                    s.trace.push(f_next);
                }
            } else {
                let next = match ctx.occupant_of(cand.index) {
                    Some(j) if j != k && !self.work.is_planned(j) => {
                        debug_assert!(self.in_aop[j], "unplanned agents outside the group");
                        self.groups.union(k, j);
                        Some(j)
                    }
                    _ => None,
                };
                if self.recurse(s, cursor, next, remaining, f_next, deadline) == Flow::Cutoff {
                    self.work.clear(k);
                    flow = Flow::Cutoff;
                    break;
                }
            }
            self.work.clear(k);
        }

        self.in_aop[k] = true;
        flow
    }
}

/// Per-step result of [`anytime_pibt`].
#[derive(Debug, Clone)]
pub struct AnytimeOutcome {
    /// Best plan found; complete and collision-free.
    pub plan: StepPlan,
    /// The initial PIBT plan.
    pub initial_plan: StepPlan,
    pub f_initial: u64,
    pub f_final: u64,
    pub f_lowerbound: u64,
    /// Groups detected by the initial pass.
    pub initial_groups: usize,
    /// Group merges triggered by cross-group conflicts.
    pub merges: usize,
    pub group_solves: usize,
    /// The group queue emptied before the deadline.
    pub finished: bool,
    pub nodes: u64,
    /// Best-f sequence of every group search, in order.
    pub fb_traces: Vec<Vec<u64>>,
    /// Total f-sum of the incumbent after the initial pass and after each group search.
    pub fsum_trace: Vec<u64>,
}

/// Anytime PIBT over one step.
pub fn anytime_pibt(ctx: &StepContext<'_>, options: &AnytimeOptions) -> AnytimeOutcome {
    anytime_pibt_forced(ctx, options, &[]).expect("unconstrained Anytime PIBT cannot fail")
}

/// Anytime PIBT with some agents' next cells fixed; forced agents are
/// treated as frozen non-group agents.
pub fn anytime_pibt_forced(
    ctx: &StepContext<'_>,
    options: &AnytimeOptions,
    forced: &[(AgentId, Cell)],
) -> Result<AnytimeOutcome, ForcedError> {
    let n = ctx.num_agents();
    let mut work = WorkingPlan::new(n, ctx.map.num_cells());
    let mut groups = GroupSet::new(n);
    apply_forced(ctx, &mut work, forced)?;
    for &(a, _) in forced {
        groups.freeze(a);
    }
    if !plan_remaining(ctx, &mut work, &mut groups) {
        return Err(ForcedError::Infeasible);
    }

    let mut solver = GroupSolver::from_parts(ctx, work, groups, options.search);
    let initial_plan = solver.plan();
    let f_initial = solver.total_fsum();

    let initial: Vec<Group> = if options.grouping {
        let s = &solver;
        let mut set = s.groups.clone();
        let found = extract_groups(&mut set, ctx.priorities(), |m| s.incumbent_fsum(m));
        solver.groups = set;
        found
    } else {
        let free: Vec<AgentId> = ctx
            .order
            .iter()
            .copied()
            .filter(|&a| !solver.groups.is_frozen(a))
            .collect();
        for w in free.windows(2) {
            solver.groups.union(w[0], w[1]);
        }
        if free.is_empty() {
            Vec::new()
        } else {
            let f = solver.incumbent_fsum(&free);
            vec![Group {
                agents: free,
                best_f: f,
            }]
        }
    };
    let initial_groups = initial.len();
    let mut queue: GroupQueue = initial.into_iter().collect();

    let mut outcome = AnytimeOutcome {
        plan: initial_plan.clone(),
        initial_plan,
        f_initial,
        f_final: f_initial,
        f_lowerbound: ctx.lower_bound(),
        initial_groups,
        merges: 0,
        group_solves: 0,
        finished: false,
        nodes: 0,
        fb_traces: Vec::new(),
        fsum_trace: vec![f_initial],
    };

    let mut global = Deadline::start(options.budget, solver.nodes);
    while !queue.is_empty() && !global.expired(solver.nodes) {
        let mut group = queue.pop().expect("nonempty queue");
        let mut deadline = global.share(group.len(), queue.total_agents(), solver.nodes);
        let result = solver.solve_group(&mut group, &mut deadline);
        outcome.group_solves += 1;
        outcome.fb_traces.push(result.fb_trace);
        outcome.fsum_trace.push(solver.total_fsum());

        if result.new_group.len() != group.len() {
            let best_f = solver.incumbent_fsum(&result.new_group);
            let merged = Group::new(result.new_group, ctx.priorities(), best_f);
            queue.remove_not_disjoint_with(merged);
            outcome.merges += 1;
        } else if result.early_exit {
            queue.push(group);
        }
    }

    outcome.finished = queue.is_empty();
    outcome.nodes = solver.nodes;
    outcome.plan = solver.plan();
    outcome.f_final = solver.total_fsum();
    Ok(outcome)
}
