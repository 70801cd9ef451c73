//! Splittable seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator keyed by
//! `derive(base, path)`, where `path` names the work unit (command tag,
//! grid index, shot index). Results therefore do not depend on how shots
//! are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Human-readable description recorded in run manifests.
pub const SCHEME: &str = "chacha8(splitmix64-fold(base, fnv1a64(tag), index...))";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold a path of words into a 64-bit key.
pub fn derive(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

/// FNV-1a hash of a label, used to turn command names into path words.
pub fn tag(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn stream(base: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, path))
}
