//! Counter-based splitting of a single 64-bit seed.
//!
//! Every stochastic operation takes one `u64` seed; independent streams
//! (restarts, trials) are derived by selecting ChaCha stream `index`, so
//! results do not depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
