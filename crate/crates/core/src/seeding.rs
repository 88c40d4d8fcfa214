//! Deterministic stream derivation.
//!
//! Every randomized routine in this crate draws from a ChaCha stream keyed by
//! a master seed plus a path of integers (grid cell, replication, unit, ...).
//! Streams for distinct paths are statistically independent, and the value a
//! path produces never depends on scheduling, so parallel runs with any worker
//! count reproduce the single-threaded output bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Collapse a master seed and a derivation path into a single 64-bit key.
pub fn derive_key(master: u64, path: &[u64]) -> u64 {
    let mut state = master ^ 0x6a09_e667_f3bc_c908;
    let mut acc = splitmix64(&mut state);
    for &p in path {
        state ^= p.wrapping_mul(0x2545_f491_4f6c_dd1d);
        acc ^= splitmix64(&mut state);
    }
    acc
}

/// RNG for the substream identified by `path` under `master`.
pub fn substream(master: u64, path: &[u64]) -> ChaCha8Rng {
    let key = derive_key(master, path);
    let mut state = key;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
