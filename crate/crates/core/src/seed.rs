//! Per-index random streams derived from one master seed.
//!
//! Item `i` gets the seed `splitmix64(master ⊕ splitmix64(i + φ))`, and each
//! purpose within an item is a separate ChaCha20 stream under that seed. Work
//! items can therefore run in any order, and item `i` does not depend on how
//! many items exist.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// What a stream is used for inside one work item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    StateGeneration = 0,
    Sampling = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSchedule {
    master: u64,
}

impl SeedSchedule {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Seed of work item `index`.
    pub fn item_seed(&self, index: u64) -> u64 {
        splitmix64(self.master ^ splitmix64(index.wrapping_add(GOLDEN_GAMMA)))
    }

    /// Generator for `purpose` within the item whose seed is `item_seed`.
    pub fn stream(item_seed: u64, purpose: Purpose) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(item_seed);
        rng.set_stream(purpose as u64);
        rng
    }

    pub fn item_stream(&self, index: u64, purpose: Purpose) -> ChaCha20Rng {
        Self::stream(self.item_seed(index), purpose)
    }
}
