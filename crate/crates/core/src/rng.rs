// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded random streams keyed by `(seed, replicate, purpose)`.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The random engine used throughout the crate.
pub type StreamRng = ChaCha12Rng;

/// Purposes keep draws for different roles of the same replicate independent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Noise = 1,
    NullNoise = 2,
    AltNoise = 3,
    Calibration = 4,
    Validation = 5,
    Cover = 6,
    Auxiliary = 7,
}

/// Independent stream for one replicate and purpose.
///
/// The ChaCha key comes from `seed`; the 64-bit stream id mixes the replicate
/// index and purpose, so streams never overlap regardless of evaluation order.
pub fn stream(seed: u64, replicate: u64, purpose: Purpose) -> StreamRng {
    let mut rng = StreamRng::seed_from_u64(seed);
    rng.set_stream(splitmix64(replicate.wrapping_mul(0x100).wrapping_add(purpose as u64)));
    rng
}

/// Derives a child seed (used to hand a scenario its own seed space).
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
