//! (n,n) reconstruction: XOR-shared one-hot labels refreshed with pairwise seeds.

use std::collections::BTreeMap;

use rand::RngCore;

use crate::automaton::{Automaton, StateIndex};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::prg::{Prg, Seed};
use crate::protocol::{
    decode_one_hot, AgentState, Deployment, Group, GroupTable, Instance, SchemeParams,
};
use crate::sharing::additive_share_bit;

/// Shares the one-hot vector for `init` among `members` and hands every pair
/// of members a fresh seed. Returns one instance per member, in member order.
pub(crate) fn deal_instance<R: RngCore + ?Sized>(
    members: &Group,
    m: usize,
    init: StateIndex,
    rng: &mut R,
) -> Vec<Instance> {
    let k = members.len();
    let per_state: Vec<_> = (0..m)
        .map(|j| additive_share_bit(j == init.offset(), k, rng))
        .collect();
    let pairs = GroupTable::subsets(k, 2);
    let seeds: Vec<(Group, Seed)> = pairs
        .groups
        .iter()
        .map(|p| {
            let g = Group::new(
                p.members()
                    .iter()
                    .map(|&x| members.members()[x - 1])
                    .collect(),
            );
            (g, Seed::random(rng))
        })
        .collect();
    members
        .members()
        .iter()
        .enumerate()
        .map(|(pos, &agent)| Instance {
            members: members.clone(),
            labels: per_state.iter().map(|v| v.shares[pos].1).collect(),
            seeds: seeds
                .iter()
                .filter(|(g, _)| g.contains(agent))
                .cloned()
                .collect::<BTreeMap<_, _>>(),
        })
        .collect()
}

pub fn dealer_init_nn<R: RngCore + ?Sized>(
    automaton: &Automaton,
    n: usize,
    init: StateIndex,
    rng: &mut R,
) -> Result<Deployment> {
    automaton.check_state(init)?;
    let params = SchemeParams::nn(n)?;
    let instances = deal_instance(&Group::all(n), automaton.num_states(), init, rng);
    let agents = instances
        .into_iter()
        .enumerate()
        .map(|(k, inst)| AgentState {
            params,
            index: k + 1,
            tick: 0,
            instances: vec![inst],
        })
        .collect();
    Ok(Deployment::from_agents(params, init, agents))
}

/// Adds b^T_j for every owned pair T to label j, evolving each pair seed.
/// Returns R_j, the total added to each label.
pub fn rerandomize_nn(inst: &mut Instance, prg: &dyn Prg, f: &FieldSpec) -> Vec<FieldElement> {
    let m = inst.labels.len();
    let mut total = vec![FieldElement::ZERO; m];
    for seed in inst.seeds.values_mut() {
        let e = prg.expand(seed, m, f);
        *seed = e.next_seed;
        for (j, &b) in e.elements.iter().enumerate() {
            inst.labels[j] = f.add(inst.labels[j], b);
            total[j] = f.add(total[j], b);
        }
    }
    total
}

/// XORs all `n` label lists per state and decodes the one-hot result.
pub fn reconstruct_nn(n: usize, label_lists: &[&[FieldElement]]) -> Result<StateIndex> {
    if label_lists.len() < n {
        return Err(Error::MissingShares {
            expected: n,
            actual: label_lists.len(),
        });
    }
    if label_lists.len() > n {
        return Err(Error::InvalidParameters(format!(
            "expected {n} label lists, got {}",
            label_lists.len()
        )));
    }
    decode_one_hot(&xor_secrets(label_lists)?)
}

pub(crate) fn xor_secrets(label_lists: &[&[FieldElement]]) -> Result<Vec<FieldElement>> {
    let m = label_lists.first().map_or(0, |l| l.len());
    if label_lists.iter().any(|l| l.len() != m) {
        return Err(Error::InvalidParameters(
            "label lists differ in length".into(),
        ));
    }
    let f = FieldSpec::gf2();
    Ok((0..m)
        .map(|j| f.sum(label_lists.iter().map(|l| l[j])))
        .collect())
}
