//! Running the online protocol and measuring regret.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod adversarial;
pub mod optimal;
pub mod regret;
pub mod report;
pub mod runner;

pub use adversarial::{adversarial_run, AdversarialReport};
pub use optimal::{estimate_optimal, OptimalMethod};
pub use regret::{measure_regret, RegretReport};
pub use report::{emit_report, emit_trace, RunReport};
pub use runner::{run_learner, run_online, RunOptions, RunTrace};

/// Independent-looking seed number `index` derived from `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(index);
    rng.next_u64()
}
