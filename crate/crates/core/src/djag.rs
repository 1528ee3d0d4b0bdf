//! Disjoint agent groups: union-find over interacting agents, the group
//! queue, and per-group time allocation.

use std::collections::VecDeque;
use std::time::Duration;

use crate::pibt::{AgentId, GroupSink, PriorityState};

/// Union-find over agent ids. Agents never passed to [`GroupSet::union`]
/// stay singletons and are not extracted as groups.
#[derive(Debug, Clone)]
pub struct GroupSet {
    parent: Vec<u32>,
    rank: Vec<u8>,
    members: Vec<Vec<AgentId>>,
    first_touch: Vec<u64>,
    frozen: Vec<bool>,
    seq: u64,
}

const UNTOUCHED: u64 = u64::MAX;

impl GroupSet {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            members: (0..n).map(|a| vec![a]).collect(),
            first_touch: vec![UNTOUCHED; n],
            frozen: vec![false; n],
            seq: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Excludes `agent` from all future unions. Used for agents whose next
    /// cell is fixed from outside, which no group may replan.
    pub fn freeze(&mut self, agent: AgentId) {
        self.frozen[agent] = true;
    }

    pub fn is_frozen(&self, agent: AgentId) -> bool {
        self.frozen[agent]
    }

    pub fn find(&mut self, x: AgentId) -> AgentId {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = x;
        while self.parent[cur] as usize != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    /// `Group(k, j)`. Idempotent; returns `true` if two sets were merged.
    pub fn union(&mut self, k: AgentId, j: AgentId) -> bool {
        debug_assert_ne!(k, j);
        if self.frozen[k] || self.frozen[j] {
            return false;
        }
        for a in [k, j] {
            if self.first_touch[a] == UNTOUCHED {
                self.first_touch[a] = self.seq;
                self.seq += 1;
            }
        }
        let (rk, rj) = (self.find(k), self.find(j));
        if rk == rj {
            return false;
        }
        let (big, small) = if (self.rank[rk], self.members[rk].len()) >= (self.rank[rj], self.members[rj].len()) {
            (rk, rj)
        } else {
            (rj, rk)
        };
        self.parent[small] = big as u32;
        if self.rank[big] == self.rank[small] {
            self.rank[big] = self.rank[big].saturating_add(1);
        }
        let moved = std::mem::take(&mut self.members[small]);
        self.members[big].extend(moved);
        true
    }

    pub fn same_group(&mut self, a: AgentId, b: AgentId) -> bool {
        self.find(a) == self.find(b)
    }

    /// All agents in `agent`'s set, in no particular order.
    pub fn component(&mut self, agent: AgentId) -> &[AgentId] {
        let root = self.find(agent);
        &self.members[root]
    }

    /// True once `agent` has been passed to a successful or idempotent union.
    pub fn is_touched(&self, agent: AgentId) -> bool {
        self.first_touch[agent] != UNTOUCHED
    }
}

impl GroupSink for GroupSet {
    #[inline]
    fn group(&mut self, k: AgentId, j: AgentId) {
        self.union(k, j);
    }
}

/// A disjoint agent group awaiting planning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    /// Agents to plan, by descending priority.
    pub agents: Vec<AgentId>,
    /// Best known f-sum for the group; [`Group::UNBOUNDED`] until one is known.
    pub best_f: u64,
}

impl Group {
    pub const UNBOUNDED: u64 = u64::MAX;

    pub fn new(mut agents: Vec<AgentId>, priorities: &PriorityState, best_f: u64) -> Self {
        assert!(!agents.is_empty(), "groups are nonempty");
        agents.sort_by(|&a, &b| {
            priorities
                .priority(b)
                .total_cmp(&priorities.priority(a))
                .then(a.cmp(&b))
        });
        Self { agents, best_f }
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn contains(&self, agent: AgentId) -> bool {
        self.agents.contains(&agent)
    }

    pub fn is_disjoint_with(&self, other: &Group) -> bool {
        !self.agents.iter().any(|a| other.agents.contains(a))
    }
}

/// FIFO queue of pairwise agent-disjoint groups.
#[derive(Debug, Clone, Default)]
pub struct GroupQueue {
    groups: VecDeque<Group>,
}

impl GroupQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, group: Group) {
        debug_assert!(self.groups.iter().all(|g| g.is_disjoint_with(&group)));
        self.groups.push_back(group);
    }

    pub fn pop(&mut self) -> Option<Group> {
        self.groups.pop_front()
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Group> {
        self.groups.iter()
    }

    /// Sum of group sizes over queued groups.
    pub fn total_agents(&self) -> usize {
        self.groups.iter().map(Group::len).sum()
    }

    /// Drops every queued group sharing an agent with `new_group`, then
    /// enqueues `new_group`. Returns the dropped groups.
    pub fn remove_not_disjoint_with(&mut self, new_group: Group) -> Vec<Group> {
        let (keep, dropped): (VecDeque<Group>, VecDeque<Group>) = std::mem::take(&mut self.groups)
            .into_iter()
            .partition(|g| g.is_disjoint_with(&new_group));
        self.groups = keep;
        self.groups.push_back(new_group);
        dropped.into()
    }
}

impl FromIterator<Group> for GroupQueue {
    fn from_iter<I: IntoIterator<Item = Group>>(iter: I) -> Self {
        let mut q = GroupQueue::new();
        for g in iter {
            q.push(g);
        }
        q
    }
}

/// Share of `time_left` for a popped group of `k` agents: `k / (k + queued)`,
/// where `queued` counts agents in groups still waiting.
pub fn time_per_group(k: usize, queue: &GroupQueue, time_left: Duration) -> Duration {
    let nanos = allocate(
        k,
        queue.total_agents(),
        time_left.as_nanos().min(u64::MAX as u128) as u64,
    );
    Duration::from_nanos(nanos)
}

/// Integer form of [`time_per_group`] over any budget unit, rounded up so a
/// nonzero budget never allocates zero.
pub fn allocate(k: usize, queued_agents: usize, left: u64) -> u64 {
    assert!(k >= 1, "a popped group has at least one agent");
    let total = (k + queued_agents) as u128;
    ((left as u128 * k as u128).div_ceil(total)) as u64
}

/// One group per set that took part in at least one union, ordered by the
/// first union touching it. `fsum` gives the incumbent f-sum for a member list.
pub fn extract_groups(set: &mut GroupSet, priorities: &PriorityState, fsum: impl Fn(&[AgentId]) -> u64) -> Vec<Group> {
    let n = set.len();
    let mut seen_root = vec![false; n];
    let mut found: Vec<(u64, Vec<AgentId>)> = Vec::new();
    for a in 0..n {
        if !set.is_touched(a) {
            continue;
        }
        let root = set.find(a);
        if seen_root[root] {
            continue;
        }
        seen_root[root] = true;
        let members = set.members[root].clone();
        let created = members.iter().map(|&m| set.first_touch[m]).min().unwrap_or(UNTOUCHED);
        found.push((created, members));
    }
    found.sort_by_key(|(created, _)| *created);
    found
        .into_iter()
        .map(|(_, members)| {
            let f = fsum(&members);
            Group::new(members, priorities, f)
        })
        .collect()
}
