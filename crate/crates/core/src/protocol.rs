//! Scheme-independent agent machinery: parameters, seed groups, the per-tick
//! label update, deployments and the agent state file.
//!
//! Every agent holds one or more label *instances*. The (n,n) and improved
//! threshold schemes use a single instance spanning all agents; the naive
//! threshold scheme keeps one (n,n) instance per (t+1)-subset the agent
//! belongs to. Each instance carries m labels and the seeds of the groups
//! the agent shares within it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::RngCore;

use crate::automaton::{Automaton, StateIndex};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::prg::{Prg, Seed, Sha256Prg, SEED_LEN};
use crate::{scheme_nn, scheme_tn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// (n,n) reconstruction over GF(2) with pairwise seeds.
    Nn,
    /// (t+1,n) reconstruction with Shamir labels and group zero polynomials.
    Tn,
    /// (t+1,n) reconstruction by one (n,n) instance per (t+1)-subset.
    TnNaive,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Nn => "nn",
            Scheme::Tn => "tn",
            Scheme::TnNaive => "tn-naive",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nn" => Ok(Scheme::Nn),
            "tn" => Ok(Scheme::Tn),
            "tn-naive" => Ok(Scheme::TnNaive),
            other => Err(Error::InvalidParameters(format!(
                "unknown scheme `{other}`"
            ))),
        }
    }
}

/// Validated deployment parameters. `t` is 0 for the (n,n) scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeParams {
    pub scheme: Scheme,
    pub n: usize,
    pub t: usize,
    pub field: FieldSpec,
}

impl SchemeParams {
    pub fn new(scheme: Scheme, n: usize, t: usize, field: FieldSpec) -> Result<Self> {
        match scheme {
            Scheme::Nn => {
                if n < 2 {
                    return Err(Error::InvalidParameters(format!(
                        "nn needs n >= 2, got {n}"
                    )));
                }
                if !field.is_binary() {
                    return Err(Error::InvalidParameters("nn labels live in GF(2)".into()));
                }
                Ok(SchemeParams {
                    scheme,
                    n,
                    t: 0,
                    field,
                })
            }
            Scheme::Tn | Scheme::TnNaive => {
                if t == 0 || n <= 2 * t {
                    return Err(Error::ThresholdViolation { n, t });
                }
                if scheme == Scheme::TnNaive && !field.is_binary() {
                    return Err(Error::InvalidParameters(
                        "tn-naive labels live in GF(2)".into(),
                    ));
                }
                if scheme == Scheme::Tn {
                    field.check_agents(n)?;
                }
                Ok(SchemeParams {
                    scheme,
                    n,
                    t,
                    field,
                })
            }
        }
    }

    pub fn nn(n: usize) -> Result<Self> {
        Self::new(Scheme::Nn, n, 0, FieldSpec::gf2())
    }

    pub fn tn(n: usize, t: usize, field: FieldSpec) -> Result<Self> {
        Self::new(Scheme::Tn, n, t, field)
    }

    pub fn tn_naive(n: usize, t: usize) -> Result<Self> {
        Self::new(Scheme::TnNaive, n, t, FieldSpec::gf2())
    }

    /// The largest number of corruptions an appropriate adversary may make.
    pub fn corruption_bound(&self) -> usize {
        match self.scheme {
            Scheme::Nn => self.n - 1,
            Scheme::Tn | Scheme::TnNaive => self.t,
        }
    }

    /// Number of shares the dealer needs to reconstruct.
    pub fn reconstruction_quorum(&self) -> usize {
        match self.scheme {
            Scheme::Nn => self.n,
            Scheme::Tn | Scheme::TnNaive => self.t + 1,
        }
    }
}

/// A sorted set of 1-based agent indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Group(Vec<usize>);

impl Group {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Group(members)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.0.binary_search(&agent).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn all(n: usize) -> Self {
        Group((1..=n).collect())
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.iter().join(","))
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let members = s
            .split(',')
            .map(|w| {
                w.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::StateFileCorrupt(format!("bad agent list `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let g = Group::new(members.clone());
        if g.0 != members {
            return Err(Error::StateFileCorrupt(format!(
                "agent list `{s}` is not strictly increasing"
            )));
        }
        Ok(g)
    }
}

/// Canonically ordered (lexicographic) list of groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    pub groups: Vec<Group>,
}

impl GroupTable {
    pub fn subsets(n: usize, size: usize) -> Self {
        GroupTable {
            groups: (1..=n).combinations(size).map(Group).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn containing(&self, agent: usize) -> impl Iterator<Item = &Group> {
        self.groups.iter().filter(move |g| g.contains(agent))
    }
}

/// Seed-sharing groups for the (n,n) and improved threshold schemes, and the
/// reconstruction subsets (one (n,n) instance each) for the naive scheme.
pub fn enumerate_groups(n: usize, scheme: Scheme, t: usize) -> Result<GroupTable> {
    match scheme {
        Scheme::Nn => {
            if n < 2 {
                return Err(Error::InvalidParameters(format!(
                    "nn needs n >= 2, got {n}"
                )));
            }
            Ok(GroupTable::subsets(n, 2))
        }
        Scheme::Tn | Scheme::TnNaive => {
            if t == 0 || n <= 2 * t {
                return Err(Error::ThresholdViolation { n, t });
            }
            let size = if scheme == Scheme::Tn {
                n - t + 1
            } else {
                t + 1
            };
            Ok(GroupTable::subsets(n, size))
        }
    }
}

/// What arrives at a clock tick: at most one symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TickInput {
    Idle,
    Symbol(String),
}

impl TickInput {
    pub fn symbol(s: &str) -> Self {
        TickInput::Symbol(s.to_string())
    }

    /// Parses one line of a tick trace: a symbol token, or `-` for no input.
    pub fn parse_token(token: &str) -> Self {
        match token {
            "-" => TickInput::Idle,
            s => TickInput::Symbol(s.to_string()),
        }
    }

    pub fn token(&self) -> &str {
        match self {
            TickInput::Idle => "-",
            TickInput::Symbol(s) => s,
        }
    }
}

/// Reads a tick trace: one token per non-empty line, `#` comments allowed.
pub fn parse_tick_trace(text: &str) -> Vec<TickInput> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(TickInput::parse_token)
        .collect()
}

/// New label of state j is the sum of the old labels of all states that the
/// symbol maps to j; states with an empty preimage get 0.
pub fn transition_sum(
    labels: &[FieldElement],
    automaton: &Automaton,
    symbol: &str,
    f: &FieldSpec,
) -> Result<Vec<FieldElement>> {
    let a = automaton.symbol_index(symbol)?;
    if labels.len() != automaton.num_states() {
        return Err(Error::InvalidParameters(format!(
            "{} labels for an automaton with {} states",
            labels.len(),
            automaton.num_states()
        )));
    }
    Ok(transition_sum_at(labels, automaton, a, f))
}

pub(crate) fn transition_sum_at(
    labels: &[FieldElement],
    automaton: &Automaton,
    symbol: usize,
    f: &FieldSpec,
) -> Vec<FieldElement> {
    let mut out = vec![FieldElement::ZERO; labels.len()];
    for (k, &l) in labels.iter().enumerate() {
        let to = automaton.target(k, symbol);
        out[to] = f.add(out[to], l);
    }
    out
}

/// One set of labels plus the seeds shared inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    /// Agents participating in this instance (all agents except for tn-naive).
    pub members: Group,
    pub labels: Vec<FieldElement>,
    pub seeds: BTreeMap<Group, Seed>,
}

/// Everything one agent stores. The automaton is public and passed in at
/// tick time rather than copied into every agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentState {
    pub params: SchemeParams,
    pub index: usize,
    pub tick: u64,
    pub instances: Vec<Instance>,
}

impl AgentState {
    pub fn num_states(&self) -> usize {
        self.instances.first().map_or(0, |i| i.labels.len())
    }

    /// Labels of the single instance of an nn or tn agent.
    pub fn labels(&self) -> &[FieldElement] {
        &self.instances[0].labels
    }

    pub fn instance(&self, members: &Group) -> Option<&Instance> {
        self.instances.iter().find(|i| &i.members == members)
    }

    pub fn seed_count(&self) -> usize {
        self.instances.iter().map(|i| i.seeds.len()).sum()
    }

    pub fn label_count(&self) -> usize {
        self.instances.iter().map(|i| i.labels.len()).sum()
    }

    /// Bytes of protocol state: labels, seeds with their group ids, and the tick counter.
    pub fn storage_bytes(&self) -> usize {
        let label_bytes = (64 - self.params.field.modulus().leading_zeros() as usize).div_ceil(8);
        let word = std::mem::size_of::<u64>();
        self.instances
            .iter()
            .map(|i| {
                i.members.len() * word
                    + i.labels.len() * label_bytes
                    + i.seeds
                        .keys()
                        .map(|g| g.len() * word + SEED_LEN)
                        .sum::<usize>()
            })
            .sum::<usize>()
            + word
    }

    /// Runs one clock tick with the reference generator.
    pub fn tick(&mut self, automaton: &Automaton, input: &TickInput) -> Result<()> {
        self.tick_with(automaton, input, &Sha256Prg).map(|_| ())
    }

    /// Runs one clock tick and returns the re-randomizing increments R_j added
    /// to each instance. The state changes only if the whole tick succeeds.
    pub fn tick_with(
        &mut self,
        automaton: &Automaton,
        input: &TickInput,
        prg: &dyn Prg,
    ) -> Result<Vec<Vec<FieldElement>>> {
        let m = automaton.num_states();
        if self.num_states() != m {
            return Err(Error::InvalidParameters(format!(
                "agent holds {} labels but the automaton has {m} states",
                self.num_states()
            )));
        }
        let symbol = match input {
            TickInput::Idle => None,
            TickInput::Symbol(s) => Some(automaton.symbol_index(s)?),
        };
        let f = self.params.field;
        let mut next = self.instances.clone();
        let mut increments = Vec::with_capacity(next.len());
        for inst in &mut next {
            if let Some(a) = symbol {
                inst.labels = transition_sum_at(&inst.labels, automaton, a, &f);
            }
            let r = match self.params.scheme {
                Scheme::Nn | Scheme::TnNaive => scheme_nn::rerandomize_nn(inst, prg, &f),
                Scheme::Tn => scheme_tn::rerandomize_tn(inst, self.index, &self.params, prg)?,
            };
            increments.push(r);
        }
        self.instances = next;
        self.tick += 1;
        Ok(increments)
    }

    /// Deep copy of everything an adversary reading this agent's memory sees.
    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            captured_at: self.tick,
            state: self.clone(),
        }
    }

    /// Checks the seed and label layout against the parameters.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let bad = |msg: String| Err(Error::StateFileCorrupt(msg));
        if self.index == 0 || self.index > p.n {
            return bad(format!("agent index {} not in 1..={}", self.index, p.n));
        }
        let expected_instances: Vec<Group> = match p.scheme {
            Scheme::Nn | Scheme::Tn => vec![Group::all(p.n)],
            Scheme::TnNaive => GroupTable::subsets(p.n, p.t + 1)
                .containing(self.index)
                .cloned()
                .collect(),
        };
        let got: Vec<Group> = self.instances.iter().map(|i| i.members.clone()).collect();
        if got != expected_instances {
            return bad(format!("unexpected instance layout {got:?}"));
        }
        let m = self.num_states();
        if m == 0 {
            return bad("no labels".into());
        }
        for inst in &self.instances {
            if inst.labels.len() != m {
                return bad("instances disagree on the number of labels".into());
            }
            if inst.labels.iter().any(|l| l.value() >= p.field.modulus()) {
                return bad("label not reduced".into());
            }
            let expected: Vec<Group> = owned_groups(p, &inst.members, self.index);
            let have: Vec<Group> = inst.seeds.keys().cloned().collect();
            if have != expected {
                return bad(format!(
                    "unexpected seed groups {have:?} for instance {}",
                    inst.members
                ));
            }
        }
        Ok(())
    }

    pub fn to_state_file(&self) -> String {
        let p = &self.params;
        let f = p.field;
        let mut out = String::new();
        out.push_str("pfsa-agent 1\n");
        out.push_str(&format!("scheme {}\n", p.scheme));
        out.push_str(&format!("n {}\n", p.n));
        out.push_str(&format!("t {}\n", p.t));
        out.push_str(&format!("i {}\n", self.index));
        out.push_str(&format!("modulus {}\n", f.modulus()));
        // Fixed width so the file size does not grow with the clock.
        out.push_str(&format!("tick {:020}\n", self.tick));
        for inst in &self.instances {
            if p.scheme == Scheme::TnNaive {
                out.push_str(&format!("instance {}\n", inst.members));
            }
            let labels = inst.labels.iter().map(|&l| f.to_hex(l)).join(",");
            out.push_str(&format!("labels {labels}\n"));
            for (g, s) in &inst.seeds {
                out.push_str(&format!("T={}:seed={}\n", g, s.to_hex()));
            }
        }
        out
    }

    pub fn parse_state_file(text: &str) -> Result<Self> {
        parse_agent_lines(&mut text.lines().peekable(), "pfsa-agent 1")
    }
}

/// Groups the agent shares a seed with inside an instance.
pub(crate) fn owned_groups(p: &SchemeParams, members: &Group, agent: usize) -> Vec<Group> {
    match p.scheme {
        Scheme::Nn | Scheme::TnNaive => members
            .members()
            .iter()
            .copied()
            .combinations(2)
            .map(Group)
            .filter(|g| g.contains(agent))
            .collect(),
        Scheme::Tn => GroupTable::subsets(p.n, p.n - p.t + 1)
            .containing(agent)
            .cloned()
            .collect(),
    }
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::StateFileCorrupt(msg.into())
}

fn key_value<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| corrupt(format!("missing `{key}` line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| corrupt(format!("expected `{key} ...`, found `{line}`")))
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| corrupt(format!("bad {what} `{s}`")))
}

/// Parses one agent block starting at its header line. Stops before any line
/// that is not part of the block, leaving it in `lines`.
pub(crate) fn parse_agent_lines<'a, I>(
    lines: &mut std::iter::Peekable<I>,
    header: &str,
) -> Result<AgentState>
where
    I: Iterator<Item = &'a str>,
{
    let first = lines.next().ok_or_else(|| corrupt("empty state"))?;
    if first != header {
        return Err(corrupt(format!(
            "expected header `{header}`, found `{first}`"
        )));
    }
    let scheme: Scheme = key_value(lines.next(), "scheme")?
        .parse()
        .map_err(|_| corrupt("bad scheme"))?;
    let n: usize = parse_num(key_value(lines.next(), "n")?, "n")?;
    let t: usize = parse_num(key_value(lines.next(), "t")?, "t")?;
    let index: usize = parse_num(key_value(lines.next(), "i")?, "agent index")?;
    let modulus: u64 = parse_num(key_value(lines.next(), "modulus")?, "modulus")?;
    let field = FieldSpec::new(modulus).map_err(|e| corrupt(e.to_string()))?;
    let params = SchemeParams::new(scheme, n, t, field).map_err(|e| corrupt(e.to_string()))?;
    let tick_str = key_value(lines.next(), "tick")?;
    if tick_str.len() != 20 {
        return Err(corrupt("tick must be 20 digits"));
    }
    let tick: u64 = parse_num(tick_str, "tick")?;

    let mut instances = Vec::new();
    loop {
        let members = match lines.peek() {
            Some(l) if l.starts_with("instance ") => {
                let l = lines.next().unwrap();
                l["instance ".len()..].parse::<Group>()?
            }
            Some(l)
                if l.starts_with("labels ")
                    && scheme != Scheme::TnNaive
                    && instances.is_empty() =>
            {
                Group::all(n)
            }
            _ => break,
        };
        let labels = key_value(lines.next(), "labels")?
            .split(',')
            .map(|h| field.from_hex(h))
            .collect::<Result<Vec<_>>>()?;
        let mut seeds = BTreeMap::new();
        while let Some(l) = lines.peek() {
            let Some(rest) = l.strip_prefix("T=") else {
                break;
            };
            let (g, s) = rest
                .split_once(":seed=")
                .ok_or_else(|| corrupt(format!("bad group line `{l}`")))?;
            if seeds
                .insert(g.parse::<Group>()?, s.parse::<Seed>()?)
                .is_some()
            {
                return Err(corrupt(format!("duplicate group `{g}`")));
            }
            lines.next();
        }
        instances.push(Instance {
            members,
            labels,
            seeds,
        });
    }
    let state = AgentState {
        params,
        index,
        tick,
        instances,
    };
    state.validate()?;
    Ok(state)
}

/// An adversary's copy of one agent's memory, taken between ticks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub captured_at: u64,
    pub state: AgentState,
}

impl Snapshot {
    pub fn agent(&self) -> usize {
        self.state.index
    }

    pub fn to_dump(&self) -> String {
        format!(
            "captured_at {}\n{}",
            self.captured_at,
            self.state.to_state_file()
        )
    }
}

/// The dealer's omniscient record, kept only for testing and verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DealerRecord {
    pub init: StateIndex,
    pub initial_agents: Vec<AgentState>,
}

impl DealerRecord {
    pub fn to_file(&self) -> String {
        let mut out = format!("pfsa-dealer 1\ninit {}\n", self.init);
        for a in &self.initial_agents {
            out.push_str(&a.to_state_file());
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().peekable();
        if lines.next() != Some("pfsa-dealer 1") {
            return Err(corrupt("missing dealer header"));
        }
        let init = StateIndex::new(parse_num(key_value(lines.next(), "init")?, "init state")?)
            .map_err(|e| corrupt(e.to_string()))?;
        let mut initial_agents = Vec::new();
        while lines.peek().is_some() {
            initial_agents.push(parse_agent_lines(&mut lines, "pfsa-agent 1")?);
        }
        let n = initial_agents.first().map_or(0, |a| a.params.n);
        if initial_agents.is_empty()
            || initial_agents
                .iter()
                .enumerate()
                .any(|(k, a)| a.index != k + 1 || a.params != initial_agents[0].params)
            || initial_agents.len() != n
        {
            return Err(corrupt(
                "dealer file must list agents 1..=n with equal parameters",
            ));
        }
        Ok(DealerRecord {
            init,
            initial_agents,
        })
    }
}

/// All n agents of one run together with the dealer's record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deployment {
    pub params: SchemeParams,
    pub agents: Vec<AgentState>,
    pub dealer: DealerRecord,
}

impl Deployment {
    /// Dealer initialization for any scheme.
    pub fn new<R: RngCore + ?Sized>(
        automaton: &Automaton,
        params: SchemeParams,
        init: StateIndex,
        rng: &mut R,
    ) -> Result<Self> {
        match params.scheme {
            Scheme::Nn => scheme_nn::dealer_init_nn(automaton, params.n, init, rng),
            Scheme::Tn => {
                scheme_tn::dealer_init_tn(automaton, params.n, params.t, params.field, init, rng)
            }
            Scheme::TnNaive => {
                scheme_tn::dealer_init_tn_naive(automaton, params.n, params.t, init, rng)
            }
        }
    }

    /// Restarts from a dealer record, with every agent back at tick 0.
    pub fn from_dealer(dealer: DealerRecord) -> Self {
        let params = dealer.initial_agents[0].params;
        Deployment {
            params,
            agents: dealer.initial_agents.clone(),
            dealer,
        }
    }

    pub(crate) fn from_agents(
        params: SchemeParams,
        init: StateIndex,
        agents: Vec<AgentState>,
    ) -> Self {
        Deployment {
            params,
            dealer: DealerRecord {
                init,
                initial_agents: agents.clone(),
            },
            agents,
        }
    }

    pub fn tick(&self) -> u64 {
        self.agents[0].tick
    }

    /// Delivers the same input to every agent (the clock barrier).
    pub fn tick_all(&mut self, automaton: &Automaton, input: &TickInput) -> Result<()> {
        self.tick_all_with(automaton, input, &Sha256Prg).map(|_| ())
    }

    /// As [`Deployment::tick_all`], returning each agent's increments.
    pub fn tick_all_with(
        &mut self,
        automaton: &Automaton,
        input: &TickInput,
        prg: &dyn Prg,
    ) -> Result<Vec<Vec<Vec<FieldElement>>>> {
        if let TickInput::Symbol(s) = input {
            automaton.symbol_index(s)?;
        }
        self.agents
            .iter_mut()
            .map(|a| a.tick_with(automaton, input, prg))
            .collect()
    }

    /// Reconstructs from all agents.
    pub fn reconstruct(&self) -> Result<StateIndex> {
        let all: Vec<&AgentState> = self.agents.iter().collect();
        reconstruct(&all)
    }
}

/// Dealer-side reconstruction from submitted agent states.
pub fn reconstruct(states: &[&AgentState]) -> Result<StateIndex> {
    let Some(first) = states.first() else {
        return Err(Error::NotEnoughShares {
            needed: 1,
            actual: 0,
        });
    };
    let p = first.params;
    if states.iter().any(|s| s.params != p) {
        return Err(Error::InvalidParameters(
            "states come from different deployments".into(),
        ));
    }
    let mut seen = std::collections::BTreeSet::new();
    if !states.iter().all(|s| seen.insert(s.index)) {
        return Err(Error::InvalidParameters("duplicate agent index".into()));
    }
    match p.scheme {
        Scheme::Nn => {
            let lists: Vec<&[FieldElement]> = states.iter().map(|s| s.labels()).collect();
            scheme_nn::reconstruct_nn(p.n, &lists)
        }
        Scheme::Tn => {
            let shares: Vec<(usize, &[FieldElement])> =
                states.iter().map(|s| (s.index, s.labels())).collect();
            scheme_tn::reconstruct_tn(p.t, &p.field, &shares)
        }
        Scheme::TnNaive => scheme_tn::reconstruct_tn_naive(states),
    }
}

/// Decodes reconstructed per-state secrets, which must be one-hot.
pub fn decode_one_hot(secrets: &[FieldElement]) -> Result<StateIndex> {
    let mut active = None;
    for (k, s) in secrets.iter().enumerate() {
        match s.value() {
            0 => {}
            1 if active.is_none() => active = Some(k),
            _ => {
                return Err(Error::InvalidOneHot(
                    secrets.iter().map(|s| s.value()).collect(),
                ))
            }
        }
    }
    active
        .map(StateIndex::from_offset)
        .ok_or_else(|| Error::InvalidOneHot(secrets.iter().map(|s| s.value()).collect()))
}

#[cfg(test)]
pub(crate) mod test_prg {
    use super::*;
    use crate::prg::Expansion;

    /// Returns fixed elements and evolves seeds like the reference generator.
    pub struct FixedPrg(pub Vec<u64>);

    impl Prg for FixedPrg {
        fn expand(&self, seed: &Seed, m: usize, field: &FieldSpec) -> Expansion {
            Expansion {
                elements: (0..m)
                    .map(|j| field.element(self.0[j % self.0.len()]))
                    .collect(),
                next_seed: Sha256Prg.expand(seed, m, field).next_seed,
            }
        }
    }
}
