//! Named, independent random substreams derived from one root seed.
//!
//! Every consumer of randomness in a simulated world asks for its own stream
//! by purpose and indices (iteration, user, ...). Streams never share state,
//! so the values one consumer sees do not depend on how much another consumer
//! drew, nor on the order in which threads execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Purposes of the substreams used by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    World = 1,
    StartupOrder = 2,
    Choice = 3,
    Ranking = 4,
    Interleave = 5,
    MfInit = 6,
    NeighborPairing = 7,
    GlobalPairing = 8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    root: u64,
}

impl Streams {
    pub fn new(root: u64) -> Self {
        Streams { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Generator for `purpose`, keyed additionally by `indices`.
    pub fn rng(&self, purpose: Stream, indices: &[u64]) -> SimRng {
        let mut key = splitmix64(self.root ^ 0x6a09_e667_f3bc_c908);
        key = splitmix64(key ^ purpose as u64);
        for &ix in indices {
            key = splitmix64(key ^ splitmix64(ix.wrapping_add(0x9e37_79b9)));
        }
        ChaCha8Rng::seed_from_u64(key)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
