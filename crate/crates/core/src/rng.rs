//! Seeded random streams.
//!
//! Every stochastic routine draws from ChaCha8, a counter-based generator
//! whose output is fixed across platforms. Independent sub-streams are
//! addressed by `(seed, stream)`; the stream id is derived from a stable key
//! (a class id, a shard index) so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// 64-bit FNV-1a, used to turn string keys into stream ids.
pub fn key_hash(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for &b in *part {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        // separator so ("ab","c") != ("a","bc")
        h ^= 0xff;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub fn keyed_stream(seed: u64, parts: &[&[u8]]) -> Rng {
    stream(seed, key_hash(parts))
}
