//! Workloads shared by the tick benchmarks and the scaling check.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pfsa_core::harness::random_automaton;
use pfsa_core::{Automaton, Deployment, FieldSpec, Scheme, SchemeParams, StateIndex, TickInput};

pub struct Workload {
    pub automaton: Automaton,
    pub deployment: Deployment,
    pub inputs: Vec<TickInput>,
}

/// A fresh deployment over a random m-state, two-symbol automaton. Inputs
/// cycle through symbol, symbol, idle.
pub fn workload(scheme: Scheme, n: usize, t: usize, m: usize) -> Workload {
    let mut rng = ChaCha20Rng::seed_from_u64((n * 1000 + m) as u64);
    let automaton = random_automaton(m, 2, &mut rng);
    let field = match scheme {
        Scheme::Tn => FieldSpec::mersenne61(),
        _ => FieldSpec::gf2(),
    };
    let params = SchemeParams::new(scheme, n, t, field).expect("benchmark parameters are valid");
    let deployment =
        Deployment::new(&automaton, params, StateIndex::new(1).unwrap(), &mut rng).unwrap();
    let inputs = vec![
        TickInput::symbol("s1"),
        TickInput::symbol("s2"),
        TickInput::Idle,
    ];
    Workload {
        automaton,
        deployment,
        inputs,
    }
}

impl Workload {
    /// One clock tick on every agent.
    pub fn tick(&mut self, k: usize) {
        let x = &self.inputs[k % self.inputs.len()];
        self.deployment.tick_all(&self.automaton, x).unwrap();
    }

    /// Best of `rounds` measurements of the mean time per tick over `ticks` ticks.
    pub fn time_per_tick(&mut self, ticks: usize, rounds: usize) -> Duration {
        (0..rounds)
            .map(|_| {
                let start = Instant::now();
                for k in 0..ticks {
                    self.tick(k);
                }
                start.elapsed() / ticks as u32
            })
            .min()
            .unwrap_or_default()
    }
}
