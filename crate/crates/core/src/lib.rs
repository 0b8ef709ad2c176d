//! Private distributed evaluation of finite-state automata.
//!
//! A dealer secret-shares the one-hot encoding of an automaton's current
//! state among `n` agents. Each clock tick every agent applies the public
//! transition to its shares and adds pseudorandom zero-sharings derived from
//! seeds it holds jointly with other agents, so shares captured at different
//! times cannot be combined. The current state is recoverable from all `n`
//! agents (`nn`) or from any `t + 1` of them (`tn`, `tn-naive`).

pub mod adversary;
pub mod automaton;
pub mod error;
pub mod field;
pub mod harness;
pub mod prg;
pub mod protocol;
pub mod scheme_nn;
pub mod scheme_tn;
pub mod sharing;

pub use adversary::{validate_timeline, CorruptionTimeline, View};
pub use automaton::{Automaton, StateIndex};
pub use error::{Error, Result};
pub use field::{FieldElement, FieldSpec};
pub use prg::{Prg, Seed, Sha256Prg};
pub use protocol::{AgentState, Deployment, Group, Scheme, SchemeParams, Snapshot, TickInput};
