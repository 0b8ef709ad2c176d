//! Exact view distributions of the intermediate scheme by enumeration.

use std::collections::BTreeMap;

use crate::adversary::{BitTape, CorruptionTimeline, IntermediateDeployment};
use crate::automaton::{Automaton, StateIndex};
use crate::error::{Error, Result};
use crate::prg::Sha256Prg;
use crate::protocol::{SchemeParams, TickInput};

pub const EXACT_BIT_LIMIT: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewDistribution {
    /// Random bits enumerated.
    pub bits: u32,
    /// View dump -> number of tapes producing it.
    pub counts: BTreeMap<String, u64>,
}

/// Runs the intermediate scheme once per assignment of its dealer bits.
/// Seeds are drawn from `seed_bits` bits and expanded with the reference
/// generator, so the seed space is small but expansion is the real one.
/// Only binary fields enumerate uniformly.
pub fn exact_view_distribution(
    automaton: &Automaton,
    params: SchemeParams,
    init: StateIndex,
    schedule: &[TickInput],
    timeline: &CorruptionTimeline,
    seed_bits: u32,
) -> Result<ViewDistribution> {
    if !params.field.is_binary() {
        return Err(Error::InvalidParameters(
            "exact enumeration needs GF(2) labels".into(),
        ));
    }
    let mut dry = BitTape::new(0, seed_bits);
    IntermediateDeployment::new(automaton, params, init, timeline, &mut dry)?;
    let bits = dry.used();
    if bits > EXACT_BIT_LIMIT {
        return Err(Error::TooLargeToEnumerate {
            bits: bits as usize,
            limit: EXACT_BIT_LIMIT as usize,
        });
    }
    let mut counts = BTreeMap::new();
    for tape in 0..1u64 << bits {
        let mut d = IntermediateDeployment::new(
            automaton,
            params,
            init,
            timeline,
            &mut BitTape::new(tape, seed_bits),
        )?;
        let view = d.capture(automaton, schedule, &Sha256Prg)?;
        *counts.entry(view.to_dump()).or_insert(0) += 1;
    }
    Ok(ViewDistribution { bits, counts })
}
