//! Declarative privacy experiments.
//!
//! A spec is a line-oriented file:
//!
//! ```text
//! name      nn-two-inputs
//! automaton builtin:four_state
//! scheme    nn
//! n         3
//! t         0
//! modulus   2
//! trials    20000
//! seed      1
//! alpha     0.001
//! mode      inputs          # inputs | intermediate | uniform
//! fault     none            # none | frozen-prg
//! expect    independent     # independent | dependent
//! corrupt   1 3
//! corrupt   2 6
//! a.init     1
//! a.schedule alpha - beta alpha - - beta
//! b.init     3
//! b.schedule beta beta - alpha alpha - -
//! ```
//!
//! `inputs` compares the protocol's views on side a and side b;
//! `intermediate` compares the protocol against the intermediate scheme on
//! side a; `uniform` tests side a's views against the uniform distribution.

use std::fmt;
use std::str::FromStr;

use super::{
    sample_views, two_sample_view_test, view_uniformity_test, SampleSpec, StatReport, ViewSource,
};
use crate::adversary::{validate_timeline, Corruption, CorruptionTimeline};
use crate::automaton::{Automaton, StateIndex};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::protocol::{Scheme, SchemeParams, TickInput};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrivacyMode {
    Inputs,
    Intermediate,
    Uniform,
}

/// Whether the test should find the two sides indistinguishable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Independent,
    Dependent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Side {
    pub init: StateIndex,
    pub schedule: Vec<TickInput>,
}

#[derive(Debug, Clone)]
pub struct PrivacySpec {
    pub name: String,
    pub automaton: Automaton,
    pub params: SchemeParams,
    pub timeline: CorruptionTimeline,
    pub trials: usize,
    pub seed: u64,
    pub alpha: f64,
    pub mode: PrivacyMode,
    pub frozen: bool,
    pub expect: Expectation,
    pub a: Side,
    pub b: Option<Side>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyOutcome {
    pub name: String,
    pub report: StatReport,
    pub alpha: f64,
    pub expect: Expectation,
    pub passed: bool,
}

impl fmt::Display for PrivacyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrivacyMode::Inputs => "inputs",
            PrivacyMode::Intermediate => "intermediate",
            PrivacyMode::Uniform => "uniform",
        })
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expectation::Independent => "independent",
            Expectation::Dependent => "dependent",
        })
    }
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| bad(line, format!("bad value `{v}` for {key}")))
}

impl PrivacySpec {
    /// Parses a spec. `load_automaton` resolves the `automaton` value.
    pub fn parse(
        text: &str,
        mut load_automaton: impl FnMut(&str) -> Result<Automaton>,
    ) -> Result<Self> {
        let mut name = String::from("privacy");
        let mut automaton = None;
        let (mut scheme, mut n, mut t, mut modulus) = (None, None, 0usize, 2u64);
        let mut entries = Vec::new();
        let (mut trials, mut seed, mut alpha) = (20_000usize, 0u64, 0.001f64);
        let mut mode = PrivacyMode::Inputs;
        let mut frozen = false;
        let mut expect = Expectation::Independent;
        let (mut a_init, mut a_sched, mut b_init, mut b_sched) = (None, None, None, None);

        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
            let value = value.trim();
            match key {
                "name" => name = value.to_string(),
                "automaton" => automaton = Some(load_automaton(value)?),
                "scheme" => scheme = Some(value.parse::<Scheme>()?),
                "n" => n = Some(num(line, key, value)?),
                "t" => t = num(line, key, value)?,
                "modulus" => modulus = num(line, key, value)?,
                "trials" => trials = num(line, key, value)?,
                "seed" => seed = num(line, key, value)?,
                "alpha" => alpha = num(line, key, value)?,
                "mode" => {
                    mode = match value {
                        "inputs" => PrivacyMode::Inputs,
                        "intermediate" => PrivacyMode::Intermediate,
                        "uniform" => PrivacyMode::Uniform,
                        _ => return Err(bad(line, format!("unknown mode `{value}`"))),
                    }
                }
                "fault" => {
                    frozen = match value {
                        "none" => false,
                        "frozen-prg" => true,
                        _ => return Err(bad(line, format!("unknown fault `{value}`"))),
                    }
                }
                "expect" => {
                    expect = match value {
                        "independent" => Expectation::Independent,
                        "dependent" => Expectation::Dependent,
                        _ => return Err(bad(line, format!("unknown expectation `{value}`"))),
                    }
                }
                "corrupt" => {
                    let mut w = value.split_whitespace();
                    match (w.next(), w.next(), w.next()) {
                        (Some(i), Some(tau), None) => entries.push(Corruption {
                            agent: num(line, key, i)?,
                            tick: num(line, key, tau)?,
                        }),
                        _ => return Err(bad(line, "expected `corrupt <agent> <tick>`")),
                    }
                }
                "a.init" => a_init = Some(StateIndex::new(num(line, key, value)?)?),
                "b.init" => b_init = Some(StateIndex::new(num(line, key, value)?)?),
                "a.schedule" => {
                    a_sched = Some(
                        value
                            .split_whitespace()
                            .map(TickInput::parse_token)
                            .collect(),
                    )
                }
                "b.schedule" => {
                    b_sched = Some(
                        value
                            .split_whitespace()
                            .map(TickInput::parse_token)
                            .collect(),
                    )
                }
                _ => return Err(bad(line, format!("unknown key `{key}`"))),
            }
        }

        let missing =
            |what: &str| Error::InvalidParameters(format!("privacy spec is missing `{what}`"));
        let automaton = automaton.ok_or_else(|| missing("automaton"))?;
        let params = SchemeParams::new(
            scheme.ok_or_else(|| missing("scheme"))?,
            n.ok_or_else(|| missing("n"))?,
            t,
            FieldSpec::new(modulus)?,
        )?;
        let timeline = CorruptionTimeline { entries };
        if !validate_timeline(&timeline, &params) {
            return Err(Error::InvalidTimeline(
                timeline.to_string().trim().replace('\n', "; "),
            ));
        }
        let a = Side {
            init: a_init.ok_or_else(|| missing("a.init"))?,
            schedule: a_sched.unwrap_or_default(),
        };
        let b = match (b_init, b_sched) {
            (Some(init), sched) => Some(Side {
                init,
                schedule: sched.unwrap_or_default(),
            }),
            (None, Some(_)) => return Err(missing("b.init")),
            (None, None) => None,
        };
        if mode == PrivacyMode::Inputs && b.is_none() {
            return Err(missing("b.init"));
        }
        for side in std::iter::once(&a).chain(b.as_ref()) {
            automaton.check_state(side.init)?;
            for x in &side.schedule {
                if let TickInput::Symbol(s) = x {
                    automaton.symbol_index(s)?;
                }
            }
        }
        Ok(PrivacySpec {
            name,
            automaton,
            params,
            timeline,
            trials,
            seed,
            alpha,
            mode,
            frozen,
            expect,
            a,
            b,
        })
    }

    fn side(&self, side: &Side, source: ViewSource) -> SampleSpec {
        SampleSpec {
            automaton: self.automaton.clone(),
            params: self.params,
            init: side.init,
            schedule: side.schedule.clone(),
            timeline: self.timeline.clone(),
            source,
        }
    }
}

pub fn run_privacy_test(spec: &PrivacySpec) -> Result<PrivacyOutcome> {
    let protocol = if spec.frozen {
        ViewSource::Frozen
    } else {
        ViewSource::Protocol
    };
    let modulus = spec.params.field.modulus();
    let first = sample_views(&spec.side(&spec.a, protocol), spec.trials, spec.seed)?;
    let report = match spec.mode {
        PrivacyMode::Uniform => view_uniformity_test(&first, modulus)?,
        PrivacyMode::Inputs | PrivacyMode::Intermediate => {
            let other = match spec.mode {
                PrivacyMode::Inputs => {
                    spec.side(spec.b.as_ref().expect("checked at parse"), protocol)
                }
                _ => spec.side(&spec.a, ViewSource::Intermediate),
            };
            let second = sample_views(&other, spec.trials, spec.seed.wrapping_add(1))?;
            two_sample_view_test(&first, &second, modulus)?
        }
    };
    let passed = match spec.expect {
        Expectation::Independent => report.p_value > spec.alpha,
        Expectation::Dependent => report.p_value < spec.alpha,
    };
    Ok(PrivacyOutcome {
        name: spec.name.clone(),
        report,
        alpha: spec.alpha,
        expect: spec.expect,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = "\
name demo
automaton builtin:four_state
scheme nn
n 3
trials 2000
seed 4
corrupt 1 2
corrupt 3 4
a.init 1
a.schedule alpha alpha - beta
b.init 2
b.schedule beta - - alpha
";

    fn load(name: &str) -> Result<Automaton> {
        match name {
            "builtin:four_state" => Ok(Automaton::four_state_example()),
            _ => Err(Error::InvalidParameters(name.into())),
        }
    }

    #[test]
    fn parses_and_runs() {
        let spec = PrivacySpec::parse(SPEC, load).unwrap();
        assert_eq!(spec.timeline.len(), 2);
        assert_eq!(spec.b.as_ref().unwrap().schedule.len(), 4);
        let out = run_privacy_test(&spec).unwrap();
        assert_eq!(out.report.samples, 2000);
        assert!(out.passed, "{out:?}");
    }

    #[test]
    fn frozen_generator_is_caught() {
        let text = format!("{SPEC}fault frozen-prg\nexpect dependent\nalpha 1e-9\n");
        let out = run_privacy_test(&PrivacySpec::parse(&text, load).unwrap()).unwrap();
        assert!(out.passed, "{out:?}");
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(PrivacySpec::parse(&format!("{SPEC}corrupt 2 4\n"), load).is_err());
        assert!(PrivacySpec::parse(&SPEC.replace("a.init 1", "a.init 9"), load).is_err());
        assert!(PrivacySpec::parse(&format!("{SPEC}colour blue\n"), load).is_err());
        assert!(PrivacySpec::parse(
            &SPEC.replace("automaton builtin:four_state", "automaton nope"),
            load
        )
        .is_err());
    }
}
