//! Named-stream seed splitting.
//!
//! Every random draw in the toolkit descends from one 64-bit root seed. A
//! component asks for a stream by name (and optionally an index), which makes
//! module-level seeds derivable from the root and loggable in manifests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the crate.
pub type Rng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// One round of the SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A root seed from which named sub-seeds are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree(pub u64);

impl SeedTree {
    pub fn new(root: u64) -> Self {
        SeedTree(root)
    }

    /// Seed for the stream `name`.
    pub fn derive(&self, name: &str) -> u64 {
        mix64(self.0 ^ mix64(fnv1a(name.as_bytes())))
    }

    /// Seed for item `index` of stream `name`.
    pub fn derive_indexed(&self, name: &str, index: u64) -> u64 {
        mix64(self.derive(name) ^ mix64(index.wrapping_add(1)))
    }

    /// A child tree rooted at the stream `name`.
    pub fn child(&self, name: &str) -> SeedTree {
        SeedTree(self.derive(name))
    }

    pub fn rng(&self, name: &str) -> Rng {
        Rng::seed_from_u64(self.derive(name))
    }

    pub fn rng_indexed(&self, name: &str, index: u64) -> Rng {
        Rng::seed_from_u64(self.derive_indexed(name, index))
    }
}

pub fn rng_from(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
