//! Seeded randomness. All sampling in the crate goes through [`rng`], and
//! sub-seeds are derived with [`derive`] so results are stable across
//! platforms and thread schedules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable hash of `parts` added to `base`.
pub fn derive(base: u64, parts: &[u64]) -> u64 {
    let h = parts.iter().fold(0x6A09_E667_F3BC_C908u64, |acc, &p| splitmix64(acc ^ p));
    base.wrapping_add(h)
}

/// `amount` distinct elements of `items`, returned in ascending position order.
pub fn sample_without_replacement(items: &[usize], amount: usize, rng: &mut Rng) -> Vec<usize> {
    let amount = amount.min(items.len());
    let mut picked: Vec<usize> = rand::seq::index::sample(rng, items.len(), amount).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|p| items[p]).collect()
}
