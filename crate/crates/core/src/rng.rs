//! Seeded random streams.
//!
//! Every run derives its generators from `(seed, stream name)`, so the
//! consumers of one stream can never shift the draws seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type LabRng = ChaCha8Rng;

/// Network initialisation.
pub const NET_INIT: &str = "net-init";
/// Environment resets during training.
pub const ENV: &str = "env";
/// Replay-buffer index draws and target-policy smoothing noise.
pub const REPLAY: &str = "replay";
/// Behaviour-policy randomness (warmup actions, epsilon, exploration noise).
pub const EXPLORATION: &str = "exploration";
/// Environment resets during evaluation rollouts.
pub const EVAL: &str = "eval";

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed value for the named stream of a run.
pub fn stream_seed(seed: u64, stream: &str) -> u64 {
    splitmix64(splitmix64(seed) ^ fnv1a(stream.as_bytes()))
}

/// Independent generator for the named stream of a run.
pub fn stream(seed: u64, stream: &str) -> LabRng {
    LabRng::seed_from_u64(stream_seed(seed, stream))
}
