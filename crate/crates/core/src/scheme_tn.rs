//! (t+1,n) reconstruction.
//!
//! The improved scheme keeps one Shamir share per state and one seed per
//! group of n - t + 1 agents. Each tick, group T expands its seed into
//! b^T_1..b^T_m and every member adds P^T_j(i), the value at its own index of
//! the degree-t polynomial vanishing at 0 and at all agents outside T. The
//! sum over groups vanishes at 0, so the shared secrets never change while
//! the shares are refreshed.
//!
//! The naive scheme runs an independent (n,n) instance for every subset of
//! t + 1 agents.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::RngCore;

use crate::automaton::{Automaton, StateIndex};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::prg::{Prg, Seed};
use crate::protocol::{
    decode_one_hot, AgentState, Deployment, Group, GroupTable, Instance, Scheme, SchemeParams,
};
use crate::scheme_nn::{deal_instance, xor_secrets};
use crate::sharing::{fits_degree, group_zero_poly_coefficient, lagrange_at, shamir_share};

pub fn dealer_init_tn<R: RngCore + ?Sized>(
    automaton: &Automaton,
    n: usize,
    t: usize,
    field: FieldSpec,
    init: StateIndex,
    rng: &mut R,
) -> Result<Deployment> {
    automaton.check_state(init)?;
    let params = SchemeParams::tn(n, t, field)?;
    let m = automaton.num_states();
    let per_state = (0..m)
        .map(|j| {
            let secret = FieldElement::from_bool(j == init.offset());
            shamir_share(secret, t, n, &field, rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let groups = GroupTable::subsets(n, n - t + 1);
    let seeds: Vec<(Group, Seed)> = groups
        .groups
        .into_iter()
        .map(|g| (g, Seed::random(rng)))
        .collect();
    let agents = (1..=n)
        .map(|i| AgentState {
            params,
            index: i,
            tick: 0,
            instances: vec![Instance {
                members: Group::all(n),
                labels: per_state.iter().map(|v| v.shares[i - 1].1).collect(),
                seeds: seeds
                    .iter()
                    .filter(|(g, _)| g.contains(i))
                    .cloned()
                    .collect::<BTreeMap<_, _>>(),
            }],
        })
        .collect();
    Ok(Deployment::from_agents(params, init, agents))
}

/// Adds P_j(i) = sum over owned groups of P^T_j(i) to label j and evolves
/// each group seed. Returns the increments.
pub fn rerandomize_tn(
    inst: &mut Instance,
    agent: usize,
    params: &SchemeParams,
    prg: &dyn Prg,
) -> Result<Vec<FieldElement>> {
    let f = params.field;
    let m = inst.labels.len();
    let mut total = vec![FieldElement::ZERO; m];
    for (group, seed) in inst.seeds.iter_mut() {
        let c = group_zero_poly_coefficient(group.members(), params.t, params.n, agent, &f)?;
        let e = prg.expand(seed, m, &f);
        *seed = e.next_seed;
        for (j, &b) in e.elements.iter().enumerate() {
            let r = f.mul(c, b);
            inst.labels[j] = f.add(inst.labels[j], r);
            total[j] = f.add(total[j], r);
        }
    }
    Ok(total)
}

fn check_shares(t: usize, shares: &[(usize, &[FieldElement])]) -> Result<usize> {
    if shares.len() < t + 1 {
        return Err(Error::NotEnoughShares {
            needed: t + 1,
            actual: shares.len(),
        });
    }
    if !shares.iter().map(|(i, _)| i).all_unique() {
        return Err(Error::InvalidParameters("duplicate agent index".into()));
    }
    let m = shares[0].1.len();
    if shares.iter().any(|(_, l)| l.len() != m) {
        return Err(Error::InvalidParameters(
            "label lists differ in length".into(),
        ));
    }
    Ok(m)
}

/// Interpolates each state's secret from the first t + 1 supplied shares.
pub fn reconstruct_tn(
    t: usize,
    f: &FieldSpec,
    shares: &[(usize, &[FieldElement])],
) -> Result<StateIndex> {
    decode_one_hot(&tn_secrets(t, f, &shares[..shares.len().min(t + 1)])?)
}

/// Like [`reconstruct_tn`] but checks every supplied share lies on the
/// degree-t polynomial through the first t + 1.
pub fn reconstruct_tn_strict(
    t: usize,
    f: &FieldSpec,
    shares: &[(usize, &[FieldElement])],
) -> Result<StateIndex> {
    let m = check_shares(t, shares)?;
    for j in 0..m {
        let points: Vec<_> = shares
            .iter()
            .map(|&(i, l)| (f.element(i as u64), l[j]))
            .collect();
        if !fits_degree(&points, t, f)? {
            return Err(Error::OffPolynomial(t));
        }
    }
    reconstruct_tn(t, f, shares)
}

/// Per-state secrets interpolated at 0 from all supplied shares.
pub fn tn_secrets(
    t: usize,
    f: &FieldSpec,
    shares: &[(usize, &[FieldElement])],
) -> Result<Vec<FieldElement>> {
    let m = check_shares(t, shares)?;
    (0..m)
        .map(|j| {
            let points: Vec<_> = shares
                .iter()
                .map(|&(i, l)| (f.element(i as u64), l[j]))
                .collect();
            lagrange_at(&points, FieldElement::ZERO, f)
        })
        .collect()
}

pub fn dealer_init_tn_naive<R: RngCore + ?Sized>(
    automaton: &Automaton,
    n: usize,
    t: usize,
    init: StateIndex,
    rng: &mut R,
) -> Result<Deployment> {
    automaton.check_state(init)?;
    let params = SchemeParams::tn_naive(n, t)?;
    let m = automaton.num_states();
    let mut per_agent: Vec<Vec<Instance>> = vec![Vec::new(); n];
    for subset in GroupTable::subsets(n, t + 1).groups {
        for (inst, &agent) in deal_instance(&subset, m, init, rng)
            .into_iter()
            .zip(subset.members())
        {
            per_agent[agent - 1].push(inst);
        }
    }
    let agents = per_agent
        .into_iter()
        .enumerate()
        .map(|(k, instances)| AgentState {
            params,
            index: k + 1,
            tick: 0,
            instances,
        })
        .collect();
    Ok(Deployment::from_agents(params, init, agents))
}

/// Reconstructs the naive instance belonging to `subset` from responders.
pub fn reconstruct_naive_subset(states: &[&AgentState], subset: &Group) -> Result<StateIndex> {
    let lists = subset
        .members()
        .iter()
        .map(|&a| {
            states
                .iter()
                .find(|s| s.index == a)
                .and_then(|s| s.instance(subset))
                .map(|inst| inst.labels.as_slice())
                .ok_or(Error::NoFullSubset(states.len()))
        })
        .collect::<Result<Vec<_>>>()?;
    decode_one_hot(&xor_secrets(&lists)?)
}

/// Picks the first (t+1)-subset whose members all responded.
pub fn reconstruct_tn_naive(states: &[&AgentState]) -> Result<StateIndex> {
    let p = states.first().ok_or(Error::NoFullSubset(0))?.params;
    debug_assert_eq!(p.scheme, Scheme::TnNaive);
    let responders: Vec<usize> = states.iter().map(|s| s.index).sorted().collect();
    let subset = responders
        .iter()
        .copied()
        .combinations(p.t + 1)
        .next()
        .map(Group::new)
        .ok_or(Error::NoFullSubset(responders.len()))?;
    reconstruct_naive_subset(states, &subset)
}
