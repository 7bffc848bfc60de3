//! Seeded random streams.
//!
//! Every stochastic operation draws from a ChaCha8 stream (`rand_chacha::ChaCha8Rng`,
//! 8 rounds) seeded with [`derive_seed`]`(master, key)`. The key is a stable byte
//! string naming the operation (for example `synergy/AA/Hum+Gain/likes`), so a
//! stream never depends on scheduling or worker count.
//!
//! Seed derivation: `fnv1a64(key)` is mixed through the SplitMix64 finalizer,
//! xor-ed with `master`, and mixed again. The result seeds the generator through
//! `ChaCha8Rng::seed_from_u64`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |hash, &b| {
        (hash ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, key: &str) -> u64 {
    splitmix64(master ^ splitmix64(fnv1a64(key.as_bytes())))
}

/// Stream for `(master, key)`.
pub fn stream(master: u64, key: &str) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, key))
}

/// Stream for `(master, key, index)`; used for per-record and per-repeat streams.
pub fn indexed_stream(master: u64, key: &str, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(splitmix64(derive_seed(master, key) ^ splitmix64(index)))
}
