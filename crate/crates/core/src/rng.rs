//! Keyed random streams.
//!
//! Every random draw in a simulation comes from a [`ChaCha8Rng`] whose seed is
//! derived from a tuple of integer keys (global seed, trial index, method,
//! purpose, ...). Two streams with the same keys are identical regardless of
//! thread scheduling, and streams with different keys are independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Purpose tags used to separate streams inside one trial.
pub mod purpose {
    pub const SCENARIO: u64 = 0x5ce0;
    pub const STAGE1_NOISE: u64 = 0x5701;
    pub const STAGE2_MASKS: u64 = 0x5702;
    pub const STAGE2_NOISE: u64 = 0x5703;
    pub const BASELINE_NOISE: u64 = 0xba5e;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes an ordered list of keys into a 32-byte ChaCha seed.
pub fn stream(keys: &[u64]) -> SimRng {
    let mut state = 0x243f_6a88_85a3_08d3u64;
    for &k in keys {
        state = splitmix64(state ^ splitmix64(k));
    }
    let mut seed = [0u8; 32];
    for (i, chunk) in seed.chunks_mut(8).enumerate() {
        state = splitmix64(state.wrapping_add(i as u64));
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Stable hash of a method name, used as a stream key.
pub fn name_key(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}
