//! Deterministic seed derivation.
//!
//! Every randomized stage draws from its own ChaCha stream keyed by a seed
//! derived from the master seed plus a stable tag, so results do not depend
//! on evaluation order or worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv1a(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives a child seed from `master`, a stage tag, and an index.
///
/// Stable across platforms and releases (FNV-1a + SplitMix finalizer), unlike
/// the std hasher.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &master.to_le_bytes());
    h = fnv1a(h, tag.as_bytes());
    h = fnv1a(h, &index.to_le_bytes());
    splitmix(h)
}

/// Stable 64-bit hash of a feature bitmask, used to key per-chromosome
/// evaluation streams.
pub fn mask_seed(master: u64, mask: &[bool]) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &master.to_le_bytes());
    for (i, &bit) in mask.iter().enumerate() {
        if bit {
            h = fnv1a(h, &(i as u64).to_le_bytes());
        }
    }
    splitmix(h)
}

/// Seeded RNG for one stage.
pub fn rng_for(master: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, tag, index))
}
