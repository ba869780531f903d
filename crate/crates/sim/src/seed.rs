//! Counter-based expansion of one master seed into independent streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream labels used by the simulator.
pub mod stream {
    pub const SENSORS: u64 = 1;
    pub const MDCS: u64 = 2;
    pub const APS: u64 = 3;
    pub const DYNAMICS: u64 = 4;
    pub const REPLICATION: u64 = 5;
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedSplitter {
    master: u64,
}

impl SeedSplitter {
    pub fn new(master: u64) -> SeedSplitter {
        SeedSplitter { master }
    }

    /// Sub-seed for a path of counters; the result depends only on the
    /// master seed and the path.
    pub fn derive(&self, path: &[u64]) -> u64 {
        // each step is a bijection in `c` for a fixed prefix
        path.iter().fold(splitmix64(self.master), |acc, &c| splitmix64(acc.rotate_left(17) ^ c))
    }

    pub fn rng(&self, path: &[u64]) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derive(path))
    }
}
