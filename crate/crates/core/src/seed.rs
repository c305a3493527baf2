//! Seed fan-out for Monte Carlo work.
//!
//! One master seed feeds every experiment. Each experiment uses its own
//! stream tag, and every trial gets an independent ChaCha stream keyed by
//! its index, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_RMSE: u64 = 0x524d_5345;
pub const STREAM_BER: u64 = 0x4245_5200;
pub const STREAM_DPI: u64 = 0x4450_4900;
pub const STREAM_ABLATION: u64 = 0x4142_4c54;
pub const STREAM_SCALING: u64 = 0x5343_414c;

/// RNG for trial `index` of the experiment identified by `stream`.
pub fn trial_rng(master: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ stream);
    rng.set_stream(index);
    rng
}
