//! Deterministic seed derivation.
//!
//! Every random stage of an experiment draws from its own generator, seeded by
//! folding `(master, stage tag, coordinates...)` through SplitMix64. A stage can
//! therefore be re-run in isolation from the master seed and its coordinates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random generator used throughout the crate.
pub type Rng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// One SplitMix64 output step for state `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stage tags used in seed derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    BenignRegion = 1,
    SybilRegion = 2,
    AttackEdges = 3,
    Labels = 4,
    Noise = 5,
    Detector = 6,
    Community = 7,
}

/// Derives a child seed from `master`, a stage tag and cell coordinates.
pub fn derive(master: u64, stage: Stage, coords: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ splitmix64(stage as u64));
    for &c in coords {
        h = splitmix64(h ^ c);
    }
    h
}

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
