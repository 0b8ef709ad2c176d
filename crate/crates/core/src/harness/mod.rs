//! Simulation, oracle checks and statistical privacy tests.

mod exact;
mod privacy;
mod stats;

pub use exact::{exact_view_distribution, ViewDistribution, EXACT_BIT_LIMIT};
pub use privacy::{run_privacy_test, Expectation, PrivacyMode, PrivacyOutcome, PrivacySpec, Side};
pub use stats::{two_sample_view_test, view_uniformity_test, StatReport, MIN_SAMPLES};

use std::fmt::Write as _;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::adversary::{Capturer, CorruptionTimeline, IntermediateDeployment, PrgSource, View};
use crate::automaton::{Automaton, StateIndex};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::prg::{Expansion, Prg, Seed, Sha256Prg};
use crate::protocol::{
    decode_one_hot, AgentState, DealerRecord, Deployment, Group, GroupTable, Scheme, SchemeParams,
    TickInput,
};
use crate::scheme_nn::xor_secrets;
use crate::scheme_tn::{reconstruct_naive_subset, tn_secrets};
use crate::sharing::fits_degree;

/// Everything needed to replay one run.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub automaton: Automaton,
    pub params: SchemeParams,
    pub init: StateIndex,
    pub schedule: Vec<TickInput>,
    pub timeline: CorruptionTimeline,
    pub dealer_seed: u64,
}

impl SimulationConfig {
    pub fn deploy(&self) -> Result<Deployment> {
        let mut rng = ChaCha20Rng::seed_from_u64(self.dealer_seed);
        Deployment::new(&self.automaton, self.params, self.init, &mut rng)
    }
}

/// The omniscient record of one tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub tick: u64,
    pub input: Option<TickInput>,
    pub oracle: StateIndex,
    /// Reconstructed per-state secrets, one vector per label instance.
    pub secrets: Vec<Vec<FieldElement>>,
    /// labels[agent][instance][state].
    pub labels: Vec<Vec<Vec<FieldElement>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub field: FieldSpec,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    /// One line per tick: tick, input, oracle state, secrets and every label.
    pub fn to_lines(&self) -> String {
        let f = &self.field;
        let hexes = |v: &[FieldElement]| v.iter().map(|x| f.to_hex(*x)).join(",");
        let mut out = String::new();
        for r in &self.records {
            let input = r.input.as_ref().map_or("start", |i| i.token());
            let secrets = r.secrets.iter().map(|s| hexes(s)).join("/");
            let labels = r
                .labels
                .iter()
                .enumerate()
                .map(|(k, insts)| format!("{}:{}", k + 1, insts.iter().map(|l| hexes(l)).join("/")))
                .join(" ");
            writeln!(
                out,
                "tick={} input={input} oracle={} secrets={secrets} {labels}",
                r.tick,
                r.oracle.get()
            )
            .expect("writing to a String");
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub trace: Trace,
    pub view: View,
    pub deployment: Deployment,
    pub oracle: StateIndex,
    /// First tick at which the sharing invariant failed, if any.
    pub violation: Option<String>,
}

/// Adds one to a single label after a given tick; used to check that the
/// oracle comparison notices damage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fault {
    pub tick: u64,
    pub agent: usize,
    pub state: StateIndex,
}

/// Keeps evolving seeds but never re-randomizes labels.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrozenPrg;

impl Prg for FrozenPrg {
    fn expand(&self, seed: &Seed, m: usize, field: &FieldSpec) -> Expansion {
        Expansion {
            elements: vec![FieldElement::ZERO; m],
            next_seed: Sha256Prg.expand(seed, m, field).next_seed,
        }
    }
}

/// Per-instance secrets computed from every agent's labels.
pub fn omniscient_secrets(d: &Deployment) -> Result<Vec<Vec<FieldElement>>> {
    let p = d.params;
    match p.scheme {
        Scheme::Nn => {
            let lists: Vec<&[FieldElement]> = d.agents.iter().map(AgentState::labels).collect();
            Ok(vec![xor_secrets(&lists)?])
        }
        Scheme::Tn => Ok(vec![tn_secrets(p.t, &p.field, &shares(&d.agents))?]),
        Scheme::TnNaive => GroupTable::subsets(p.n, p.t + 1)
            .groups
            .iter()
            .map(|g| xor_secrets(&instance_lists(&d.agents, g)?))
            .collect(),
    }
}

fn shares(agents: &[AgentState]) -> Vec<(usize, &[FieldElement])> {
    agents.iter().map(|a| (a.index, a.labels())).collect()
}

fn instance_lists<'a>(agents: &'a [AgentState], g: &Group) -> Result<Vec<&'a [FieldElement]>> {
    g.members()
        .iter()
        .map(|&i| {
            agents[i - 1]
                .instance(g)
                .map(|inst| inst.labels.as_slice())
                .ok_or(Error::NoFullSubset(agents.len()))
        })
        .collect()
}

/// Checks the sharing invariant against the true state: every instance's
/// secrets decode to `oracle`, and for tn all n shares of each state lie on
/// one polynomial of degree at most t. Returns a description of the first
/// violation.
pub fn invariant_violation(d: &Deployment, oracle: StateIndex) -> Option<String> {
    let p = d.params;
    if p.scheme == Scheme::Tn {
        let m = d.agents[0].num_states();
        for j in 0..m {
            let points: Vec<_> = d
                .agents
                .iter()
                .map(|a| (p.field.element(a.index as u64), a.labels()[j]))
                .collect();
            match fits_degree(&points, p.t, &p.field) {
                Ok(true) => {}
                Ok(false) => {
                    return Some(format!(
                        "tick {}: shares of state {} exceed degree {}",
                        d.tick(),
                        j + 1,
                        p.t
                    ))
                }
                Err(e) => return Some(e.to_string()),
            }
        }
    }
    let secrets = match omniscient_secrets(d) {
        Ok(s) => s,
        Err(e) => return Some(e.to_string()),
    };
    for (k, s) in secrets.iter().enumerate() {
        match decode_one_hot(s) {
            Ok(j) if j == oracle => {}
            Ok(j) => {
                return Some(format!(
                    "tick {}: instance {} holds state {} not {}",
                    d.tick(),
                    k + 1,
                    j.get(),
                    oracle.get()
                ))
            }
            Err(e) => return Some(format!("tick {}: instance {}: {e}", d.tick(), k + 1)),
        }
    }
    None
}

/// Runs a configuration, recording the omniscient trace and the view.
pub fn run_simulation(cfg: &SimulationConfig) -> Result<SimulationOutput> {
    run_inner(cfg, &Sha256Prg, None, true)
}

fn run_inner(
    cfg: &SimulationConfig,
    prg: &dyn Prg,
    fault: Option<Fault>,
    record: bool,
) -> Result<SimulationOutput> {
    let run = Run {
        automaton: &cfg.automaton,
        schedule: &cfg.schedule,
        timeline: &cfg.timeline,
        prg,
        fault,
        record,
    };
    run.drive(cfg.deploy()?)
}

struct Run<'a> {
    automaton: &'a Automaton,
    schedule: &'a [TickInput],
    timeline: &'a CorruptionTimeline,
    prg: &'a dyn Prg,
    fault: Option<Fault>,
    record: bool,
}

impl Run<'_> {
    fn drive(&self, mut d: Deployment) -> Result<SimulationOutput> {
        let Run {
            automaton,
            schedule,
            timeline,
            prg,
            fault,
            record,
        } = *self;
        crate::adversary::check_capture(timeline, d.params.n, d.tick(), schedule.len() as u64)?;
        let field = d.params.field;
        let mut oracle = d.dealer.init;
        let mut capturer = Capturer::new(timeline.clone());
        let mut records = Vec::new();
        let mut violation = None;
        let mut observe =
            |d: &Deployment, input: Option<&TickInput>, oracle: StateIndex| -> Result<()> {
                capturer.observe(d.tick(), &d.agents);
                if violation.is_none() {
                    violation = invariant_violation(d, oracle);
                }
                if record {
                    records.push(TraceRecord {
                        tick: d.tick(),
                        input: input.cloned(),
                        oracle,
                        secrets: omniscient_secrets(d).unwrap_or_default(),
                        labels: d
                            .agents
                            .iter()
                            .map(|a| a.instances.iter().map(|i| i.labels.clone()).collect())
                            .collect(),
                    });
                }
                Ok(())
            };
        observe(&d, None, oracle)?;
        for input in schedule {
            d.tick_all_with(automaton, input, prg)?;
            if let TickInput::Symbol(s) = input {
                oracle = automaton.step(oracle, s)?;
            }
            if let Some(fl) = fault.filter(|fl| fl.tick == d.tick()) {
                let f = field;
                let l = &mut d.agents[fl.agent - 1].instances[0].labels[fl.state.offset()];
                *l = f.add(*l, f.one());
            }
            observe(&d, Some(input), oracle)?;
        }
        Ok(SimulationOutput {
            trace: Trace { field, records },
            view: capturer.finish(),
            deployment: d,
            oracle,
            violation,
        })
    }
}

/// True iff the per-tick invariants hold throughout and every qualifying
/// coalition reconstructs the state direct execution reaches.
pub fn oracle_check(cfg: &SimulationConfig) -> Result<bool> {
    oracle_check_with(cfg, None)
}

pub fn oracle_check_with(cfg: &SimulationConfig, fault: Option<Fault>) -> Result<bool> {
    let direct = cfg.automaton.run_direct(cfg.init, &cfg.schedule)?;
    let out = run_inner(cfg, &Sha256Prg, fault, false)?;
    if out.violation.is_some() || out.oracle != direct {
        return Ok(false);
    }
    Ok(coalitions_agree(&out.deployment, direct))
}

/// Replays `schedule` from a dealer record, checking the sharing invariant
/// after every tick and every reconstructing coalition at the end. Returns
/// the replayed deployment and the first problem found.
pub fn replay_check(
    automaton: &Automaton,
    dealer: &DealerRecord,
    schedule: &[TickInput],
) -> Result<(Deployment, Option<String>)> {
    let direct = automaton.run_direct(dealer.init, schedule)?;
    let run = Run {
        automaton,
        schedule,
        timeline: &CorruptionTimeline::default(),
        prg: &Sha256Prg,
        fault: None,
        record: false,
    };
    let out = run.drive(Deployment::from_dealer(dealer.clone()))?;
    let problem = out.violation.or_else(|| {
        (!coalitions_agree(&out.deployment, direct)).then(|| {
            format!(
                "a reconstructing coalition disagrees with direct execution (state {})",
                direct.get()
            )
        })
    });
    Ok((out.deployment, problem))
}

/// Every coalition the scheme allows to reconstruct gets `expected`.
pub fn coalitions_agree(d: &Deployment, expected: StateIndex) -> bool {
    let p = d.params;
    let all: Vec<&AgentState> = d.agents.iter().collect();
    match p.scheme {
        Scheme::Nn => crate::protocol::reconstruct(&all).ok() == Some(expected),
        Scheme::Tn => all
            .iter()
            .copied()
            .combinations(p.t + 1)
            .all(|c| crate::protocol::reconstruct(&c).ok() == Some(expected)),
        Scheme::TnNaive => GroupTable::subsets(p.n, p.t + 1)
            .groups
            .iter()
            .all(|g| reconstruct_naive_subset(&all, g).ok() == Some(expected)),
    }
}

/// True iff, on every tick, the increments added across an instance form a
/// sharing of zero (XOR to zero, or interpolate to zero with degree <= t).
pub fn increments_share_zero(cfg: &SimulationConfig) -> Result<bool> {
    let mut d = cfg.deploy()?;
    let p = cfg.params;
    let f = p.field;
    for input in &cfg.schedule {
        let inc = d.tick_all_with(&cfg.automaton, input, &Sha256Prg)?;
        let ok = match p.scheme {
            Scheme::Nn => {
                let lists: Vec<&[FieldElement]> = inc.iter().map(|r| r[0].as_slice()).collect();
                xor_secrets(&lists)?.iter().all(|x| x.is_zero())
            }
            Scheme::Tn => {
                let sh: Vec<(usize, &[FieldElement])> = inc
                    .iter()
                    .enumerate()
                    .map(|(k, r)| (k + 1, r[0].as_slice()))
                    .collect();
                let zero = tn_secrets(p.t, &f, &sh)?.iter().all(|x| x.is_zero());
                let low = (0..cfg.automaton.num_states()).all(|j| {
                    let pts: Vec<_> = sh
                        .iter()
                        .map(|(i, r)| (f.element(*i as u64), r[j]))
                        .collect();
                    fits_degree(&pts, p.t, &f).unwrap_or(false)
                });
                zero && low
            }
            Scheme::TnNaive => GroupTable::subsets(p.n, p.t + 1).groups.iter().all(|g| {
                let lists: Vec<&[FieldElement]> = g
                    .members()
                    .iter()
                    .map(|&i| {
                        let k = d.agents[i - 1]
                            .instances
                            .iter()
                            .position(|x| &x.members == g)
                            .expect("member");
                        inc[i - 1][k].as_slice()
                    })
                    .collect();
                xor_secrets(&lists).is_ok_and(|s| s.iter().all(|x| x.is_zero()))
            }),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A random complete automaton with `m` states over `k` symbols `s1..sk`.
pub fn random_automaton<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> Automaton {
    let alphabet = (1..=k).map(|a| format!("s{a}")).collect();
    let table = (0..m)
        .map(|_| (0..k).map(|_| rng.random_range(1..=m)).collect())
        .collect();
    Automaton::from_table(alphabet, table).expect("valid random table")
}

/// Random input stream where each tick is idle with probability 1/2.
pub fn random_schedule<R: Rng + ?Sized>(
    automaton: &Automaton,
    len: usize,
    rng: &mut R,
) -> Vec<TickInput> {
    (0..len)
        .map(|_| {
            if rng.random() {
                TickInput::Idle
            } else {
                let a = &automaton.alphabet()[rng.random_range(0..automaton.alphabet().len())];
                TickInput::symbol(a)
            }
        })
        .collect()
}

/// Random parameters with at most `max_n` agents. Threshold schemes draw t
/// first, then n in 2t+1..=max_n.
pub fn random_params<R: Rng + ?Sized>(
    scheme: Scheme,
    field: FieldSpec,
    max_n: usize,
    rng: &mut R,
) -> Result<SchemeParams> {
    match scheme {
        Scheme::Nn => SchemeParams::nn(rng.random_range(2..=max_n.max(2))),
        Scheme::Tn | Scheme::TnNaive => {
            let t = rng.random_range(1..=((max_n.max(3) - 1) / 2));
            let n = rng.random_range(2 * t + 1..=max_n.max(3));
            SchemeParams::new(scheme, n, t, field)
        }
    }
}

/// A random configuration: up to 8 states, up to 4 symbols, `horizon` ticks
/// and a random appropriate timeline.
pub fn random_config<R: Rng + ?Sized>(
    scheme: Scheme,
    field: FieldSpec,
    max_n: usize,
    horizon: usize,
    rng: &mut R,
) -> Result<SimulationConfig> {
    let params = random_params(scheme, field, max_n, rng)?;
    let m = rng.random_range(1..=8);
    let automaton = random_automaton(m, rng.random_range(1..=4), rng);
    let schedule = random_schedule(&automaton, horizon, rng);
    let k = rng.random_range(0..=params.corruption_bound());
    let mut agents: Vec<usize> = (1..=params.n).collect();
    for i in 0..k {
        let j = rng.random_range(i..agents.len());
        agents.swap(i, j);
    }
    let mut ticks: Vec<u64> = (0..k)
        .map(|_| rng.random_range(0..=horizon as u64))
        .collect();
    ticks.sort_unstable();
    Ok(SimulationConfig {
        init: StateIndex::new(rng.random_range(1..=m))?,
        automaton,
        params,
        schedule,
        timeline: CorruptionTimeline::new(agents.into_iter().zip(ticks).collect()),
        dealer_seed: rng.random(),
    })
}

/// Which system the views are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewSource {
    Protocol,
    /// Protocol whose generator never re-randomizes labels.
    Frozen,
    Intermediate,
}

/// One side of a sampling experiment.
#[derive(Debug, Clone)]
pub struct SampleSpec {
    pub automaton: Automaton,
    pub params: SchemeParams,
    pub init: StateIndex,
    pub schedule: Vec<TickInput>,
    pub timeline: CorruptionTimeline,
    pub source: ViewSource,
}

/// Label values of `trials` independent views. Trial k draws its dealer
/// randomness from ChaCha20 stream k under `seed`, so results do not depend
/// on thread scheduling.
pub fn sample_views(spec: &SampleSpec, trials: usize, seed: u64) -> Result<Vec<Vec<u64>>> {
    let horizon = spec.timeline.max_tick() as usize;
    if horizon > spec.schedule.len() {
        return Err(Error::TickOutOfRange {
            tick: horizon as u64,
            horizon: spec.schedule.len() as u64,
        });
    }
    let schedule = &spec.schedule[..horizon];
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let view = match spec.source {
                ViewSource::Protocol | ViewSource::Frozen => {
                    let mut d = Deployment::new(&spec.automaton, spec.params, spec.init, &mut rng)?;
                    let prg: &dyn Prg = if spec.source == ViewSource::Frozen {
                        &FrozenPrg
                    } else {
                        &Sha256Prg
                    };
                    let mut capturer = Capturer::new(spec.timeline.clone());
                    capturer.observe(0, &d.agents);
                    for input in schedule {
                        d.tick_all_with(&spec.automaton, input, prg)?;
                        capturer.observe(d.tick(), &d.agents);
                    }
                    capturer.finish()
                }
                ViewSource::Intermediate => {
                    let mut d = IntermediateDeployment::new(
                        &spec.automaton,
                        spec.params,
                        spec.init,
                        &spec.timeline,
                        &mut PrgSource(&mut rng),
                    )?;
                    d.capture(&spec.automaton, schedule, &Sha256Prg)?
                }
            };
            Ok(view.label_values())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four() -> Automaton {
        Automaton::four_state_example()
    }

    fn cfg(params: SchemeParams, seed: u64) -> SimulationConfig {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        SimulationConfig {
            automaton: four(),
            params,
            init: StateIndex::new(1).unwrap(),
            schedule: random_schedule(&four(), 30, &mut rng),
            timeline: CorruptionTimeline::default(),
            dealer_seed: seed,
        }
    }

    fn all_params() -> Vec<SchemeParams> {
        vec![
            SchemeParams::nn(4).unwrap(),
            SchemeParams::tn(5, 2, FieldSpec::new(257).unwrap()).unwrap(),
            SchemeParams::tn_naive(5, 2).unwrap(),
        ]
    }

    #[test]
    fn oracle_accepts_honest_runs() {
        for (k, p) in all_params().into_iter().enumerate() {
            assert!(oracle_check(&cfg(p, k as u64)).unwrap(), "{p:?}");
            assert!(increments_share_zero(&cfg(p, k as u64)).unwrap());
        }
    }

    #[test]
    fn oracle_rejects_injected_faults() {
        for (k, p) in all_params().into_iter().enumerate() {
            let fault = Fault {
                tick: 10,
                agent: 2,
                state: StateIndex::new(3).unwrap(),
            };
            assert!(
                !oracle_check_with(&cfg(p, k as u64), Some(fault)).unwrap(),
                "{p:?}"
            );
        }
    }

    #[test]
    fn trace_lines() {
        let mut c = cfg(SchemeParams::nn(2).unwrap(), 3);
        c.schedule.truncate(2);
        c.timeline = CorruptionTimeline::new(vec![(1, 1)]);
        let out = run_simulation(&c).unwrap();
        let text = out.trace.to_lines();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("tick=0 input=start oracle=1 secrets=1,0,0,0 1:"));
        assert_eq!(out.violation, None);
        assert_eq!(out.view.snapshots.len(), 1);
        assert_eq!(out.view.snapshots[0].captured_at, 1);
        assert_eq!(run_simulation(&c).unwrap().trace, out.trace);
    }

    #[test]
    fn sampling_is_reproducible() {
        let spec = SampleSpec {
            automaton: four(),
            params: SchemeParams::nn(3).unwrap(),
            init: StateIndex::new(1).unwrap(),
            schedule: vec![TickInput::symbol("alpha"); 3],
            timeline: CorruptionTimeline::new(vec![(1, 1), (2, 3)]),
            source: ViewSource::Protocol,
        };
        let a = sample_views(&spec, 50, 7).unwrap();
        assert_eq!(a, sample_views(&spec, 50, 7).unwrap());
        assert_ne!(a, sample_views(&spec, 50, 8).unwrap());
        assert_eq!(a[0].len(), 8);
    }
}
