//! Reproducible random streams.
//!
//! Every unit of simulated work draws from its own ChaCha8 stream. The key is
//! the 64-bit master seed; the ChaCha stream id is derived by mixing a stable
//! label hash with the replicate id, so results do not depend on which worker
//! executes a unit or in which order units run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over bytes; stable across platforms and compiler versions.
pub fn hash_bytes(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub fn hash_pair(a: u64, b: u64) -> u64 {
    mix64(mix64(a) ^ b.rotate_left(17))
}

/// Stream id for a labelled unit of work (e.g. scenario name + replicate).
pub fn stream_id(label: &str, replicate: u64) -> u64 {
    hash_pair(hash_bytes(label.as_bytes()), replicate)
}

/// Open an independent stream keyed by `master_seed` and `stream`.
pub fn stream(master_seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}
