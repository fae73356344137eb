//! Counter-based random streams.
//!
//! Every experiment owns one seed. Independent consumers (disorder
//! realizations, random phases of a prepared state) get their own ChaCha
//! stream derived from `(domain, index)`, so adding realizations or states
//! never perturbs the draws of earlier ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamDomain {
    Disorder = 1,
    Phases = 2,
    Synthetic = 3,
}

pub fn stream_rng(seed: u64, domain: StreamDomain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 48) | (index & 0xffff_ffff_ffff));
    rng
}
