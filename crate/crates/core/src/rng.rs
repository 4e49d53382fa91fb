//! Seeded randomness for the verification suites.
//!
//! All random instances come from xoshiro256++ seeded through `seed_from_u64`
//! (SplitMix64 expansion), so a given seed reproduces the same suite anywhere.

use rand::SeedableRng;
pub use rand_xoshiro::Xoshiro256PlusPlus as SuiteRng;

pub const DEFAULT_SEED: u64 = 42;

pub fn seeded(seed: u64) -> SuiteRng {
    SuiteRng::seed_from_u64(seed)
}
