//! Seeded RNG sub-streams.
//!
//! All randomness in a run flows from one master seed. Components draw from
//! named sub-streams so that, e.g., the workload realization is unchanged
//! when agent hyperparameters (and therefore the agent's own draw count)
//! vary. Streams are ChaCha8 with the stream id derived from a stable hash
//! of the name — never the std hasher, whose output may change across
//! releases.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// FNV-1a, fixed here so stream ids are stable across builds.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// A deterministic RNG for `(seed, name)`.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(name.as_bytes()));
    rng
}

/// A deterministic RNG for `(seed, name, index)` — used where work is split
/// per item (particles, chromosomes, episodes) so the draw sequence of one
/// item never depends on how many draws another consumed.
pub fn indexed_substream(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(name.as_bytes()).wrapping_add(index.wrapping_mul(0x9e3779b97f4a7c15)));
    rng
}
