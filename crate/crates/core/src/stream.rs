//! Counter-based random streams.
//!
//! Each Monte Carlo trial owns a ChaCha stream keyed by
//! `(master_seed, experiment tag, point key)` with the trial index as the
//! stream number, so results do not depend on how trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn trial_rng(master_seed: u64, tag: &str, point: u64, trial: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    h.update(point.to_le_bytes());
    let seed: [u8; 32] = h.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(trial);
    rng
}
