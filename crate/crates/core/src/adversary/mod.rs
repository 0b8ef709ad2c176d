//! Corruption timelines, captured views and the seed-hypergraph condition.

mod intermediate;

pub use intermediate::{BitTape, IntermediateDeployment, PrgSource, RandomSource};

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::automaton::Automaton;
use crate::error::{Error, Result};
use crate::protocol::{
    owned_groups, Deployment, Group, GroupTable, Scheme, SchemeParams, Snapshot, TickInput,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Corruption {
    pub agent: usize,
    pub tick: u64,
}

/// Agents read by the adversary, in order, with the tick after which each is read.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CorruptionTimeline {
    pub entries: Vec<Corruption>,
}

impl CorruptionTimeline {
    pub fn new(entries: Vec<(usize, u64)>) -> Self {
        CorruptionTimeline {
            entries: entries
                .into_iter()
                .map(|(agent, tick)| Corruption { agent, tick })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_tick(&self) -> u64 {
        self.entries.iter().map(|c| c.tick).max().unwrap_or(0)
    }

    /// Non-decreasing ticks, agents in 1..=n, each corrupted at most once.
    pub fn is_well_formed(&self, n: usize) -> bool {
        self.entries.windows(2).all(|w| w[0].tick <= w[1].tick)
            && self.entries.iter().all(|c| (1..=n).contains(&c.agent))
            && self.entries.iter().map(|c| c.agent).all_unique()
    }

    /// Tick at which `agent` is corrupted, if ever.
    pub fn corruption_tick(&self, agent: usize) -> Option<u64> {
        self.entries
            .iter()
            .find(|c| c.agent == agent)
            .map(|c| c.tick)
    }

    /// Corruptions of members of `group`, keeping their relative order.
    pub fn restricted_to(&self, group: &Group) -> CorruptionTimeline {
        CorruptionTimeline {
            entries: self
                .entries
                .iter()
                .filter(|c| group.contains(c.agent))
                .copied()
                .collect(),
        }
    }
}

impl fmt::Display for CorruptionTimeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.entries {
            writeln!(f, "corrupt {} {}", c.agent, c.tick)?;
        }
        Ok(())
    }
}

impl FromStr for CorruptionTimeline {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            let parsed = match words[..] {
                ["corrupt", agent, tick] => agent.parse().ok().zip(tick.parse().ok()),
                _ => None,
            };
            let (agent, tick) = parsed.ok_or_else(|| Error::Parse {
                line: k + 1,
                msg: format!("expected `corrupt <agent> <tick>`, found `{line}`"),
            })?;
            entries.push(Corruption { agent, tick });
        }
        Ok(CorruptionTimeline { entries })
    }
}

/// True iff the timeline is well formed and the adversary is appropriate:
/// at most n - 1 corruptions for nn, at most t for the threshold schemes.
pub fn validate_timeline(timeline: &CorruptionTimeline, params: &SchemeParams) -> bool {
    timeline.is_well_formed(params.n) && timeline.len() <= params.corruption_bound()
}

/// First corruption step (1-based) at which the corrupted agent has no
/// seed group disjoint from the agents corrupted before it, or `None` if
/// every step has one.
pub fn hypergraph_violation(groups: &GroupTable, timeline: &CorruptionTimeline) -> Option<usize> {
    let mut corrupted: Vec<usize> = Vec::new();
    for (k, c) in timeline.entries.iter().enumerate() {
        let clean = groups
            .containing(c.agent)
            .any(|g| g.members().iter().all(|a| !corrupted.contains(a)));
        if !clean {
            return Some(k + 1);
        }
        corrupted.push(c.agent);
    }
    None
}

pub fn hypergraph_check(groups: &GroupTable, timeline: &CorruptionTimeline) -> bool {
    hypergraph_violation(groups, timeline).is_none()
}

/// Seed hypergraphs of a scheme, one per independent label instance paired
/// with the agents of that instance.
pub fn seed_hypergraphs(params: &SchemeParams) -> Vec<(Group, GroupTable)> {
    match params.scheme {
        Scheme::Nn | Scheme::Tn => {
            let all = Group::all(params.n);
            let groups = (1..=params.n)
                .flat_map(|i| owned_groups(params, &all, i))
                .unique()
                .sorted()
                .collect();
            vec![(all, GroupTable { groups })]
        }
        Scheme::TnNaive => GroupTable::subsets(params.n, params.t + 1)
            .groups
            .into_iter()
            .map(|inst| {
                let pairs = inst
                    .members()
                    .iter()
                    .copied()
                    .combinations(2)
                    .map(Group::new)
                    .collect();
                (inst, GroupTable { groups: pairs })
            })
            .collect(),
    }
}

/// Applies the hypergraph condition to every instance of the scheme. For
/// the naive scheme each instance sees only corruptions of its own members.
pub fn scheme_hypergraph_violation(
    params: &SchemeParams,
    timeline: &CorruptionTimeline,
) -> Option<(Group, usize)> {
    seed_hypergraphs(params)
        .into_iter()
        .find_map(|(members, table)| {
            hypergraph_violation(&table, &timeline.restricted_to(&members)).map(|k| (members, k))
        })
}

/// The adversary's view: snapshots of corrupted agents in timeline order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct View {
    pub snapshots: Vec<Snapshot>,
}

impl View {
    pub fn to_dump(&self) -> String {
        self.snapshots.iter().map(Snapshot::to_dump).collect()
    }

    /// All captured label values, snapshot by snapshot, instance by instance.
    pub fn label_values(&self) -> Vec<u64> {
        self.snapshots
            .iter()
            .flat_map(|s| s.state.instances.iter())
            .flat_map(|i| i.labels.iter().map(|l| l.value()))
            .collect()
    }
}

/// Takes snapshots as the clock reaches each corruption tick.
#[derive(Debug, Clone)]
pub struct Capturer {
    timeline: CorruptionTimeline,
    next: usize,
    view: View,
}

impl Capturer {
    pub fn new(timeline: CorruptionTimeline) -> Self {
        Capturer {
            timeline,
            next: 0,
            view: View::default(),
        }
    }

    /// Call at every barrier (after tick `tick` has completed on all agents).
    pub fn observe(&mut self, tick: u64, agents: &[crate::protocol::AgentState]) {
        while let Some(c) = self.timeline.entries.get(self.next) {
            if c.tick != tick {
                break;
            }
            self.view.snapshots.push(agents[c.agent - 1].snapshot());
            self.next += 1;
        }
    }

    pub fn finish(self) -> View {
        self.view
    }
}

/// Runs `schedule` on a deployment and returns the view the timeline captures.
pub fn capture(
    deployment: &mut Deployment,
    automaton: &Automaton,
    schedule: &[TickInput],
    timeline: &CorruptionTimeline,
) -> Result<View> {
    check_capture(
        timeline,
        deployment.params.n,
        deployment.tick(),
        schedule.len() as u64,
    )?;
    let mut capturer = Capturer::new(timeline.clone());
    capturer.observe(deployment.tick(), &deployment.agents);
    for input in schedule {
        deployment.tick_all(automaton, input)?;
        capturer.observe(deployment.tick(), &deployment.agents);
    }
    Ok(capturer.finish())
}

pub(crate) fn check_capture(
    timeline: &CorruptionTimeline,
    n: usize,
    start: u64,
    ticks: u64,
) -> Result<()> {
    if !timeline.is_well_formed(n) {
        return Err(Error::InvalidTimeline(
            timeline.to_string().trim().replace('\n', "; "),
        ));
    }
    let horizon = start + ticks;
    if let Some(c) = timeline
        .entries
        .iter()
        .find(|c| c.tick > horizon || c.tick < start)
    {
        return Err(Error::TickOutOfRange {
            tick: c.tick,
            horizon,
        });
    }
    Ok(())
}
