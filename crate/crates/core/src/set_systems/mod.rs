//! Covering gadgets built by Las Vegas sampling and certified by exhaustive
//! verifiers: universal sets, special set systems, anti-universal families,
//! and partition systems.
//!
//! Builders sample a family of a target size, verify it, and on failure
//! resample (up to [`SAMPLES_PER_SIZE`] times) before doubling the size (up
//! to [`MAX_DOUBLINGS`] times). The verifiers are the ground truth; the
//! plain constructors only check shape so corrupted data can be loaded and
//! rejected.

mod anti_universal;
mod partition;
mod special;
mod universal;

pub use anti_universal::{
    anti_universal_target, build_anti_universal, verify_anti_universal, AntiUniversalCounterexample,
    AntiUniversalSet,
};
pub use partition::{
    partition_from_anti_universal, verify_partition, PartitionCounterexample, PartitionSystem,
};
pub use special::{
    randomized_special_bound, special_from_universal, verify_special, SpecialCounterexample,
    SpecialSetSystem,
};
pub use universal::{
    build_universal, universal_target, verify_universal, MissingPattern, UniversalSet,
};

/// Work cap for a single exhaustive verification.
pub const VERIFY_BUDGET: u128 = 1 << 30;
pub const SAMPLES_PER_SIZE: usize = 8;
pub const MAX_DOUBLINGS: usize = 4;
