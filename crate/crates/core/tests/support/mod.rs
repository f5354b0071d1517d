//! Independent reference implementations used by the property tests and the
//! acceptance harness. Nothing here calls into the engine's algorithms; the
//! engine is only used to build inputs and to get the answers under test.

#![allow(dead_code)]

pub mod assistant_oracle;
pub mod expr_oracle;
pub mod graph_oracle;
pub mod rules_oracle;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
