//! Deterministic finite-state automata and a direct-execution reference run.
//!
//! File format (UTF-8, line based, `#` starts a comment):
//!
//! ```text
//! states 4
//! alphabet alpha beta
//! trans 1 alpha 1
//! ...
//! ```
//!
//! There must be exactly one `trans` line for every (state, symbol) pair.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::protocol::TickInput;

/// 1-based state index. Index 0 stays free as the Shamir secret point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateIndex(usize);

impl StateIndex {
    pub fn new(index: usize) -> Result<Self> {
        if index == 0 {
            return Err(Error::StateOutOfRange { index, max: 0 });
        }
        Ok(StateIndex(index))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// 0-based position in label vectors.
    pub fn offset(self) -> usize {
        self.0 - 1
    }

    pub(crate) fn from_offset(offset: usize) -> Self {
        StateIndex(offset + 1)
    }
}

impl fmt::Display for StateIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    num_states: usize,
    alphabet: Vec<String>,
    // targets[state_offset * |alphabet| + symbol] = target offset
    targets: Vec<usize>,
}

/// Four states over {alpha, beta}. Under `alpha`, states 2 and 4 both move
/// to 2 and nothing moves to 3; `beta` is the cycle 1 -> 2 -> 3 -> 4 -> 1.
pub const FOUR_STATE_EXAMPLE: &str = include_str!("../data/four_state.fsa");

impl Automaton {
    /// Builds an automaton from a dense table: `table[s][a]` is the 1-based
    /// target of 1-based state `s + 1` on symbol `alphabet[a]`.
    pub fn from_table(alphabet: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let num_states = table.len();
        if num_states == 0 {
            return Err(Error::InvalidParameters(
                "automaton needs at least one state".into(),
            ));
        }
        check_alphabet(&alphabet, 0)?;
        let mut targets = Vec::with_capacity(num_states * alphabet.len());
        for (s, row) in table.iter().enumerate() {
            if row.len() != alphabet.len() {
                let symbol = alphabet.get(row.len()).cloned().unwrap_or_default();
                return Err(Error::PartialTransition {
                    state: s + 1,
                    symbol,
                });
            }
            for &to in row {
                if to == 0 || to > num_states {
                    return Err(Error::StateOutOfRange {
                        index: to,
                        max: num_states,
                    });
                }
                targets.push(to - 1);
            }
        }
        Ok(Automaton {
            num_states,
            alphabet,
            targets,
        })
    }

    pub fn four_state_example() -> Self {
        FOUR_STATE_EXAMPLE
            .parse()
            .expect("bundled automaton is valid")
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn symbol_index(&self, symbol: &str) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|a| a == symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    pub fn check_state(&self, s: StateIndex) -> Result<()> {
        if s.0 <= self.num_states {
            Ok(())
        } else {
            Err(Error::StateOutOfRange {
                index: s.0,
                max: self.num_states,
            })
        }
    }

    /// Target offset of `from_offset` under the symbol at `symbol` in the alphabet.
    pub(crate) fn target(&self, from_offset: usize, symbol: usize) -> usize {
        self.targets[from_offset * self.alphabet.len() + symbol]
    }

    pub fn step(&self, s: StateIndex, symbol: &str) -> Result<StateIndex> {
        self.check_state(s)?;
        let a = self.symbol_index(symbol)?;
        Ok(StateIndex::from_offset(self.target(s.offset(), a)))
    }

    /// Runs the automaton directly; idle ticks leave the state unchanged.
    pub fn run_direct(&self, init: StateIndex, stream: &[TickInput]) -> Result<StateIndex> {
        stream.iter().try_fold(init, |s, input| match input {
            TickInput::Idle => Ok(s),
            TickInput::Symbol(sym) => self.step(s, sym),
        })
    }
}

fn check_alphabet(alphabet: &[String], line: usize) -> Result<()> {
    if alphabet.is_empty() {
        return Err(Error::Parse {
            line,
            msg: "alphabet is empty".into(),
        });
    }
    for (k, a) in alphabet.iter().enumerate() {
        if a.is_empty() || a == "-" || a.contains(char::is_whitespace) || a.starts_with('#') {
            return Err(Error::Parse {
                line,
                msg: format!("invalid symbol token `{a}`"),
            });
        }
        if alphabet[..k].contains(a) {
            return Err(Error::Parse {
                line,
                msg: format!("symbol `{a}` listed twice"),
            });
        }
    }
    Ok(())
}

impl FromStr for Automaton {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut num_states: Option<usize> = None;
        let mut alphabet: Option<Vec<String>> = None;
        let mut table: Vec<Option<usize>> = Vec::new();

        let parse_err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut words = content.split_whitespace();
            match words.next() {
                Some("states") => {
                    if num_states.is_some() {
                        return Err(parse_err(line, "duplicate `states` line"));
                    }
                    let m: usize = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .filter(|&m| m >= 1)
                        .ok_or_else(|| parse_err(line, "`states` needs a positive count"))?;
                    if words.next().is_some() {
                        return Err(parse_err(line, "trailing tokens after `states`"));
                    }
                    num_states = Some(m);
                }
                Some("alphabet") => {
                    if alphabet.is_some() {
                        return Err(parse_err(line, "duplicate `alphabet` line"));
                    }
                    let syms: Vec<String> = words.map(str::to_string).collect();
                    check_alphabet(&syms, line)?;
                    alphabet = Some(syms);
                }
                Some("trans") => {
                    let (Some(m), Some(syms)) = (num_states, alphabet.as_ref()) else {
                        return Err(parse_err(line, "`trans` before `states` and `alphabet`"));
                    };
                    if table.is_empty() {
                        table = vec![None; m * syms.len()];
                    }
                    let fields: Vec<&str> = words.collect();
                    let [from, sym, to] = fields[..] else {
                        return Err(parse_err(line, "`trans` expects <from> <symbol> <to>"));
                    };
                    let state = |w: &str| -> Result<usize> {
                        w.parse::<usize>()
                            .ok()
                            .filter(|&s| (1..=m).contains(&s))
                            .ok_or_else(|| parse_err(line, &format!("state `{w}` not in 1..={m}")))
                    };
                    let from = state(from)?;
                    let to = state(to)?;
                    let a = syms
                        .iter()
                        .position(|s| s == sym)
                        .ok_or_else(|| Error::UnknownSymbol(sym.to_string()))?;
                    let slot = &mut table[(from - 1) * syms.len() + a];
                    if slot.is_some() {
                        return Err(Error::DuplicateTransition {
                            state: from,
                            symbol: sym.to_string(),
                        });
                    }
                    *slot = Some(to - 1);
                }
                Some(other) => {
                    return Err(parse_err(line, &format!("unknown directive `{other}`")));
                }
                None => unreachable!(),
            }
        }

        let m = num_states.ok_or_else(|| parse_err(0, "missing `states` line"))?;
        let alphabet = alphabet.ok_or_else(|| parse_err(0, "missing `alphabet` line"))?;
        if table.is_empty() {
            table = vec![None; m * alphabet.len()];
        }
        let mut targets = Vec::with_capacity(table.len());
        for (k, t) in table.iter().enumerate() {
            match t {
                Some(to) => targets.push(*to),
                None => {
                    return Err(Error::PartialTransition {
                        state: k / alphabet.len() + 1,
                        symbol: alphabet[k % alphabet.len()].clone(),
                    })
                }
            }
        }
        Ok(Automaton {
            num_states: m,
            alphabet,
            targets,
        })
    }
}

impl fmt::Display for Automaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states {}", self.num_states)?;
        writeln!(f, "alphabet {}", self.alphabet.join(" "))?;
        for s in 0..self.num_states {
            for (a, sym) in self.alphabet.iter().enumerate() {
                writeln!(f, "trans {} {} {}", s + 1, sym, self.target(s, a) + 1)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn st(j: usize) -> StateIndex {
        StateIndex::new(j).unwrap()
    }

    #[test]
    fn minimal_self_loop() {
        let a: Automaton = "states 1\nalphabet a\ntrans 1 a 1\n".parse().unwrap();
        assert_eq!(a.num_states(), 1);
        assert_eq!(a.alphabet().len(), 1);
        assert_eq!(a.step(st(1), "a").unwrap(), st(1));
    }

    #[test]
    fn four_state_example_alpha_transitions() {
        let a = Automaton::four_state_example();
        assert_eq!(a.num_states(), 4);
        assert_eq!(a.step(st(2), "alpha").unwrap(), st(2));
        assert_eq!(a.step(st(4), "alpha").unwrap(), st(2));
        for s in 1..=4 {
            assert_ne!(a.step(st(s), "alpha").unwrap(), st(3));
        }
        assert_eq!(
            a.run_direct(st(4), &[TickInput::symbol("alpha")]).unwrap(),
            st(2)
        );
    }

    #[test]
    fn missing_row_is_partial() {
        let err = "states 2\nalphabet a\ntrans 1 a 2\n"
            .parse::<Automaton>()
            .unwrap_err();
        assert_eq!(
            err,
            Error::PartialTransition {
                state: 2,
                symbol: "a".into()
            }
        );
    }

    #[test]
    fn duplicate_row_rejected() {
        let err = "states 1\nalphabet a\ntrans 1 a 1\ntrans 1 a 1\n"
            .parse::<Automaton>()
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateTransition { state: 1, .. }));
    }

    #[test]
    fn malformed_lines() {
        for bad in [
            "states x\n",
            "states 0\n",
            "alphabet\n",
            "alphabet a a\n",
            "states 1\nalphabet a\ntrans 1 a\n",
            "states 1\nalphabet a\ntrans 1 a 2\n",
            "trans 1 a 1\n",
            "bogus\n",
        ] {
            assert!(bad.parse::<Automaton>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# demo\nstates 1   # one\n\nalphabet x\ntrans 1 x 1 # loop\n";
        assert!(text.parse::<Automaton>().is_ok());
    }

    #[test]
    fn unknown_symbol() {
        let a = Automaton::four_state_example();
        assert_eq!(
            a.step(st(1), "gamma"),
            Err(Error::UnknownSymbol("gamma".into()))
        );
        assert!(a.run_direct(st(1), &[TickInput::symbol("gamma")]).is_err());
    }

    #[test]
    fn empty_stream_is_identity() {
        let a = Automaton::four_state_example();
        assert_eq!(a.run_direct(st(3), &[]).unwrap(), st(3));
        assert_eq!(
            a.run_direct(st(3), &[TickInput::Idle, TickInput::Idle])
                .unwrap(),
            st(3)
        );
    }

    fn arb_automaton() -> impl Strategy<Value = Automaton> {
        (1usize..=6, 1usize..=3).prop_flat_map(|(m, k)| {
            proptest::collection::vec(proptest::collection::vec(1..=m, k), m).prop_map(
                move |table| {
                    let alphabet = (0..k).map(|a| format!("s{a}")).collect();
                    Automaton::from_table(alphabet, table).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(a in arb_automaton()) {
            let text = a.to_string();
            prop_assert_eq!(text.parse::<Automaton>().unwrap(), a);
        }

        #[test]
        fn run_direct_composes(a in arb_automaton(), xs in proptest::collection::vec(proptest::option::of(0usize..3), 0..40), split in 0usize..40, init in 1usize..=6) {
            let k = a.alphabet().len();
            let init = StateIndex::new(1 + (init - 1) % a.num_states()).unwrap();
            let stream: Vec<TickInput> = xs
                .iter()
                .map(|x| match x {
                    Some(s) => TickInput::symbol(&a.alphabet()[s % k]),
                    None => TickInput::Idle,
                })
                .collect();
            let split = split.min(stream.len());
            let mid = a.run_direct(init, &stream[..split]).unwrap();
            prop_assert_eq!(
                a.run_direct(mid, &stream[split..]).unwrap(),
                a.run_direct(init, &stream).unwrap()
            );
        }
    }
}
