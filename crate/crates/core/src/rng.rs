//! Counter-based random streams keyed by `(seed, member, purpose)`.
//!
//! Every consumer of randomness derives its own ChaCha8 stream, so member
//! results never depend on evaluation order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. The tag is mixed into the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    KsAmplitude,
    KsNoise,
    BlobNoise,
    BlobAmplitude,
    JetRipple,
    Control,
    Oracle,
    Test,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::KsAmplitude => 0x4b53_414d,
            Purpose::KsNoise => 0x4b53_4e5a,
            Purpose::BlobNoise => 0x424c_4e5a,
            Purpose::BlobAmplitude => 0x424c_414d,
            Purpose::JetRipple => 0x4a45_5452,
            Purpose::Control => 0x4354_524c,
            Purpose::Oracle => 0x4f52_434c,
            Purpose::Test => 0x5445_5354,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub member: u64,
    pub purpose: Purpose,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(seed: u64, member: u64, purpose: Purpose) -> Self {
        Self {
            seed,
            member,
            purpose,
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self.seed ^ self.purpose.tag().rotate_left(32);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.member);
        rng
    }
}
