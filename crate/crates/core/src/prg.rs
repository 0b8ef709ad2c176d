//! Seed expansion and evolution.
//!
//! The reference generator hashes `seed || BE32(counter)` with SHA-256 for
//! counter = 0, 1, 2, ... and reads the concatenated blocks as one byte
//! stream: first `m` field elements (one byte each for GF(2), sixteen bytes
//! each otherwise), then the 16-byte successor seed. Consumption is fixed
//! length, so every member of a group stays in lockstep.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

pub const SEED_LEN: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Seed([u8; SEED_LEN]);

impl Seed {
    pub const fn from_bytes(bytes: [u8; SEED_LEN]) -> Self {
        Seed(bytes)
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut bytes = [0u8; SEED_LEN];
        rng.fill_bytes(&mut bytes);
        Seed(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; SEED_LEN] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({})", self.to_hex())
    }
}

impl FromStr for Seed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bytes = [0u8; SEED_LEN];
        hex::decode_to_slice(s, &mut bytes)
            .map_err(|e| Error::StateFileCorrupt(format!("bad seed `{s}`: {e}")))?;
        Ok(Seed(bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub elements: Vec<FieldElement>,
    pub next_seed: Seed,
}

/// A length-doubling generator G(seed) -> B || S.
pub trait Prg {
    fn expand(&self, seed: &Seed, m: usize, field: &FieldSpec) -> Expansion;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sha256Prg;

impl Sha256Prg {
    fn stream(seed: &Seed, len: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(len.next_multiple_of(32));
        let mut counter: u32 = 0;
        while out.len() < len {
            let block = Sha256::new()
                .chain_update(seed.0)
                .chain_update(counter.to_be_bytes())
                .finalize();
            out.extend_from_slice(&block);
            counter += 1;
        }
        out.truncate(len);
        out
    }
}

impl Prg for Sha256Prg {
    fn expand(&self, seed: &Seed, m: usize, field: &FieldSpec) -> Expansion {
        let w = field.element_width();
        let bytes = Self::stream(seed, m * w + SEED_LEN);
        let elements = bytes[..m * w]
            .chunks_exact(w)
            .map(|c| {
                field
                    .element_from_bytes(c)
                    .expect("chunk has element width")
            })
            .collect();
        let mut next = [0u8; SEED_LEN];
        next.copy_from_slice(&bytes[m * w..]);
        Expansion {
            elements,
            next_seed: Seed(next),
        }
    }
}

pub fn prg_expand(seed: &Seed, m: usize, field: &FieldSpec) -> Expansion {
    Sha256Prg.expand(seed, m, field)
}

/// Applies the seed update `k` times.
pub fn evolve_k(prg: &dyn Prg, seed: &Seed, k: u64, m: usize, field: &FieldSpec) -> Seed {
    (0..k).fold(*seed, |s, _| prg.expand(&s, m, field).next_seed)
}

/// One line of the golden-vector file:
/// `seed_hex m modulus -> b_1,...,b_m next_seed_hex`.
pub fn vector_line(seed: &Seed, m: usize, field: &FieldSpec) -> String {
    let e = prg_expand(seed, m, field);
    let els: Vec<String> = e.elements.iter().map(|&x| field.to_hex(x)).collect();
    format!(
        "{} {} {} -> {} {}",
        seed.to_hex(),
        m,
        field.modulus(),
        els.join(","),
        e.next_seed.to_hex()
    )
}

/// The (seed, m, modulus) cases recorded in the committed golden file.
pub fn golden_cases() -> Vec<(Seed, usize, u64)> {
    let counting: [u8; 16] = std::array::from_fn(|i| i as u8);
    let mixed = Seed::from_str("00112233445566778899aabbccddeeff").unwrap();
    vec![
        (Seed::default(), 4, 2),
        (Seed::default(), 4, 5),
        (Seed::default(), 3, 257),
        (Seed::default(), 2, crate::field::MERSENNE_61),
        (Seed(counting), 8, 2),
        (Seed(counting), 5, 7),
        (Seed([0xff; 16]), 1, 2),
        (Seed([0xff; 16]), 6, crate::field::MERSENNE_61),
        (mixed, 4, 257),
    ]
}

pub fn golden_vectors() -> String {
    golden_cases()
        .into_iter()
        .map(|(s, m, p)| {
            vector_line(&s, m, &FieldSpec::new(p).expect("golden moduli are prime")) + "\n"
        })
        .collect()
}
