//! Deterministic substream derivation.
//!
//! Every antithetic pair owns two ChaCha streams — one for the Brownian
//! increments, one for the jump process — derived from the base seed with
//! SplitMix64. Chunking paths across threads therefore cannot change any
//! draw: stream identity depends only on `(seed, pair index, role)`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DIFFUSION_ROLE: u64 = 0x9e37_79b9_0000_0001;
const JUMP_ROLE: u64 = 0x9e37_79b9_0000_0002;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn substream_seed(seed: u64, pair: u64, role: u64) -> u64 {
    splitmix64(seed ^ splitmix64(pair.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ role))
}

pub fn diffusion_rng(seed: u64, pair: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(seed, pair, DIFFUSION_ROLE))
}

pub fn jump_rng(seed: u64, pair: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(seed, pair, JUMP_ROLE))
}
