#![allow(dead_code)]

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use trng_core::chain::ChainConfig;
use trng_core::nlfsr::ExpandConfig;
use trng_core::pipeline::generate;
use trng_core::sim::SimParams;
use trng_core::BitStream;

/// Fast stand-in bit source for checks that need far more bits than the
/// simulator can produce quickly.
pub fn xoshiro_bits(seed: u64, n: usize) -> BitStream {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut bytes = vec![0u8; n.div_ceil(8)];
    rng.fill_bytes(&mut bytes);
    BitStream::from_bytes(bytes, n).unwrap()
}

pub fn xoshiro_bytes(rng: &mut Xoshiro256PlusPlus, n: usize) -> Vec<u8> {
    let mut v = vec![0u8; n];
    rng.fill_bytes(&mut v);
    v
}

/// Expanded bits from the default simulated pipeline.
pub fn pipeline_bits(seed: u64, n: usize) -> BitStream {
    let sim = SimParams { seed, ..SimParams::default() };
    generate(&sim, &ChainConfig::default(), &ExpandConfig::default(), n).unwrap().expanded
}
