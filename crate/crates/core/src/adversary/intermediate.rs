//! The intermediate scheme used in the privacy argument.
//!
//! Every seed group T holds a random vector R^T and an initial seed. Agent
//! i's initial label for state j is the sum of R^T_j over its groups. Nobody
//! moves until the adversary starts reading: a group's seed evolves only on
//! ticks after its first member is corrupted, and an agent's labels follow
//! the real update rule only on ticks after the agent itself is corrupted.
//! Every label the adversary sees is therefore input independent.

use std::collections::BTreeMap;

use rand::RngCore;

use super::{check_capture, seed_hypergraphs, Capturer, CorruptionTimeline, View};
use crate::automaton::{Automaton, StateIndex};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::prg::{Prg, Seed, SEED_LEN};
use crate::protocol::{
    transition_sum, AgentState, Group, Instance, Scheme, SchemeParams, TickInput,
};
use crate::sharing::{group_zero_poly_coefficient, random_element};

/// Where the intermediate dealer draws its randomness from.
pub trait RandomSource {
    fn element(&mut self, f: &FieldSpec) -> FieldElement;
    fn seed(&mut self) -> Seed;
}

/// Ordinary randomness from an RNG.
pub struct PrgSource<'a, R: RngCore + ?Sized>(pub &'a mut R);

impl<R: RngCore + ?Sized> RandomSource for PrgSource<'_, R> {
    fn element(&mut self, f: &FieldSpec) -> FieldElement {
        random_element(f, self.0)
    }

    fn seed(&mut self) -> Seed {
        Seed::random(self.0)
    }
}

/// Reads randomness bit by bit from a fixed integer so every outcome can be
/// enumerated. Elements take one bit each (only meaningful over GF(2)),
/// seeds take `seed_bits` bits. Reads past the end return zeros but are
/// still counted, so a dry run reports how many bits a run needs.
#[derive(Debug, Clone)]
pub struct BitTape {
    bits: u64,
    used: u32,
    seed_bits: u32,
}

impl BitTape {
    pub fn new(bits: u64, seed_bits: u32) -> Self {
        BitTape {
            bits,
            used: 0,
            seed_bits,
        }
    }

    pub fn used(&self) -> u32 {
        self.used
    }

    fn take(&mut self, k: u32) -> u64 {
        let mut out = 0;
        for b in 0..k {
            let pos = self.used + b;
            if pos < 64 {
                out |= ((self.bits >> pos) & 1) << b;
            }
        }
        self.used += k;
        out
    }
}

impl RandomSource for BitTape {
    fn element(&mut self, f: &FieldSpec) -> FieldElement {
        f.element(self.take(1))
    }

    fn seed(&mut self) -> Seed {
        let v = self.take(self.seed_bits);
        let mut bytes = [0u8; SEED_LEN];
        bytes[..8].copy_from_slice(&v.to_le_bytes());
        Seed::from_bytes(bytes)
    }
}

#[derive(Debug, Clone)]
pub struct IntermediateDeployment {
    pub params: SchemeParams,
    pub agents: Vec<AgentState>,
    timeline: CorruptionTimeline,
    /// (instance members, seed group) -> tick its first member is corrupted.
    triggers: BTreeMap<(Group, Group), u64>,
}

impl IntermediateDeployment {
    pub fn new<S: RandomSource + ?Sized>(
        automaton: &Automaton,
        params: SchemeParams,
        init: StateIndex,
        timeline: &CorruptionTimeline,
        source: &mut S,
    ) -> Result<Self> {
        automaton.check_state(init)?;
        if !timeline.is_well_formed(params.n) {
            return Err(Error::InvalidTimeline(
                timeline.to_string().trim().replace('\n', "; "),
            ));
        }
        let m = automaton.num_states();
        let f = params.field;
        let mut agents: Vec<AgentState> = (1..=params.n)
            .map(|i| AgentState {
                params,
                index: i,
                tick: 0,
                instances: Vec::new(),
            })
            .collect();
        let mut triggers = BTreeMap::new();
        for (members, table) in seed_hypergraphs(&params) {
            let mut insts: BTreeMap<usize, Instance> = members
                .members()
                .iter()
                .map(|&i| {
                    let inst = Instance {
                        members: members.clone(),
                        labels: vec![FieldElement::ZERO; m],
                        seeds: BTreeMap::new(),
                    };
                    (i, inst)
                })
                .collect();
            for group in table.groups {
                let seed = source.seed();
                let r: Vec<FieldElement> = (0..m).map(|_| source.element(&f)).collect();
                for &i in group.members() {
                    let inst = insts.get_mut(&i).expect("group inside instance");
                    inst.seeds.insert(group.clone(), seed);
                    for (l, &x) in inst.labels.iter_mut().zip(&r) {
                        *l = f.add(*l, x);
                    }
                }
                if let Some(c) = timeline.entries.iter().find(|c| group.contains(c.agent)) {
                    triggers.insert((members.clone(), group), c.tick);
                }
            }
            for (i, inst) in insts {
                agents[i - 1].instances.push(inst);
            }
        }
        Ok(IntermediateDeployment {
            params,
            agents,
            timeline: timeline.clone(),
            triggers,
        })
    }

    pub fn tick(&self) -> u64 {
        self.agents[0].tick
    }

    pub fn tick_all(
        &mut self,
        automaton: &Automaton,
        input: &TickInput,
        prg: &dyn Prg,
    ) -> Result<()> {
        if let TickInput::Symbol(s) = input {
            automaton.symbol_index(s)?;
        }
        let r = self.tick() + 1;
        let m = automaton.num_states();
        let f = self.params.field;

        let mut fresh: BTreeMap<(Group, Group), Vec<FieldElement>> = BTreeMap::new();
        for ((members, group), &tau) in &self.triggers {
            if r <= tau {
                continue;
            }
            let holder = group.members()[0];
            let seed = self.agents[holder - 1]
                .instances
                .iter()
                .find(|i| &i.members == members)
                .expect("instance present")
                .seeds[group];
            let e = prg.expand(&seed, m, &f);
            for &i in group.members() {
                let inst = self.agents[i - 1]
                    .instances
                    .iter_mut()
                    .find(|i| &i.members == members)
                    .expect("instance present");
                inst.seeds.insert(group.clone(), e.next_seed);
            }
            fresh.insert((members.clone(), group.clone()), e.elements);
        }

        for agent in &mut self.agents {
            let active = self
                .timeline
                .corruption_tick(agent.index)
                .is_some_and(|tau| r > tau);
            if active {
                for inst in &mut agent.instances {
                    if let TickInput::Symbol(s) = input {
                        inst.labels = transition_sum(&inst.labels, automaton, s, &f)?;
                    }
                    for group in inst.seeds.keys() {
                        let b = &fresh[&(inst.members.clone(), group.clone())];
                        let c = match self.params.scheme {
                            Scheme::Tn => group_zero_poly_coefficient(
                                group.members(),
                                self.params.t,
                                self.params.n,
                                agent.index,
                                &f,
                            )?,
                            Scheme::Nn | Scheme::TnNaive => FieldElement::ONE,
                        };
                        for (l, &x) in inst.labels.iter_mut().zip(b) {
                            *l = f.add(*l, f.mul(c, x));
                        }
                    }
                }
            }
            agent.tick += 1;
        }
        Ok(())
    }

    /// Runs the schedule and returns what the timeline's adversary reads.
    pub fn capture(
        &mut self,
        automaton: &Automaton,
        schedule: &[TickInput],
        prg: &dyn Prg,
    ) -> Result<View> {
        check_capture(
            &self.timeline,
            self.params.n,
            self.tick(),
            schedule.len() as u64,
        )?;
        let mut capturer = Capturer::new(self.timeline.clone());
        capturer.observe(self.tick(), &self.agents);
        for input in schedule {
            self.tick_all(automaton, input, prg)?;
            capturer.observe(self.tick(), &self.agents);
        }
        Ok(capturer.finish())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prg::{evolve_k, Sha256Prg};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn nothing_moves_before_corruption() {
        let a = Automaton::four_state_example();
        let p = SchemeParams::nn(3).unwrap();
        let tl = CorruptionTimeline::new(vec![(2, 3)]);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let mut d = IntermediateDeployment::new(
            &a,
            p,
            StateIndex::new(1).unwrap(),
            &tl,
            &mut PrgSource(&mut rng),
        )
        .unwrap();
        let start = d.agents.clone();
        for _ in 0..3 {
            d.tick_all(&a, &TickInput::symbol("alpha"), &Sha256Prg)
                .unwrap();
        }
        for (x, y) in d.agents.iter().zip(&start) {
            assert_eq!(x.instances, y.instances);
        }
        d.tick_all(&a, &TickInput::symbol("alpha"), &Sha256Prg)
            .unwrap();
        // Pairs {1,2} and {2,3} now move; {1,3} stays.
        let g13 = Group::new(vec![1, 3]);
        assert_eq!(
            d.agents[0].instances[0].seeds[&g13],
            start[0].instances[0].seeds[&g13]
        );
        for g in [Group::new(vec![1, 2]), Group::new(vec![2, 3])] {
            let s0 = start[1].instances[0].seeds[&g];
            let s1 = evolve_k(&Sha256Prg, &s0, 1, 4, &FieldSpec::gf2());
            assert_eq!(d.agents[1].instances[0].seeds[&g], s1);
            assert_eq!(d.agents[g.members()[0] - 1].instances[0].seeds[&g], s1);
        }
        assert_eq!(d.agents[0].labels(), start[0].labels());
        assert_ne!(d.agents[1].instances, start[1].instances);
    }

    #[test]
    fn labels_are_sums_of_group_vectors() {
        let a = Automaton::four_state_example();
        let p = SchemeParams::tn(5, 2, FieldSpec::new(257).unwrap()).unwrap();
        let mut tape = BitTape::new(u64::MAX, 3);
        let d = IntermediateDeployment::new(
            &a,
            p,
            StateIndex::new(1).unwrap(),
            &CorruptionTimeline::default(),
            &mut tape,
        )
        .unwrap();
        // Every element is 1 and agent i belongs to C(4, 3) = 4 groups of size 4.
        for agent in &d.agents {
            assert!(agent.labels().iter().all(|l| l.value() == 4));
            assert_eq!(agent.seed_count(), 4);
        }
        assert_eq!(tape.used(), 5 * (3 + 4));
    }

    #[test]
    fn naive_layout_matches_real_dealer() {
        let a = Automaton::four_state_example();
        let p = SchemeParams::tn_naive(4, 1).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let init = StateIndex::new(2).unwrap();
        let ideal = IntermediateDeployment::new(
            &a,
            p,
            init,
            &CorruptionTimeline::default(),
            &mut PrgSource(&mut rng),
        )
        .unwrap();
        let real = crate::protocol::Deployment::new(&a, p, init, &mut rng).unwrap();
        for (x, y) in ideal.agents.iter().zip(&real.agents) {
            let xs: Vec<_> = x
                .instances
                .iter()
                .map(|i| (&i.members, i.seeds.keys().collect::<Vec<_>>()))
                .collect();
            let ys: Vec<_> = y
                .instances
                .iter()
                .map(|i| (&i.members, i.seeds.keys().collect::<Vec<_>>()))
                .collect();
            assert_eq!(xs, ys);
        }
    }
}
