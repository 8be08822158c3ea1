//! Named, splittable random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by the run
//! seed, a purpose tag and a tuple of indices, so the order in which work
//! units are evaluated never changes the numbers they see.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Tag {
    Embb = 1,
    Urllc = 2,
    Arrivals = 3,
    Fading = 4,
    Noise = 5,
    UrllcLink = 6,
    Lemma = 7,
    Loss = 8,
    Bench = 9,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn stream(seed: u64, tag: Tag, ids: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix(seed ^ splitmix(tag as u64));
    for &id in ids {
        h = splitmix(h ^ splitmix(id.wrapping_add(0x5851_f42d_4c95_7f2d)));
    }
    ChaCha8Rng::seed_from_u64(h)
}
