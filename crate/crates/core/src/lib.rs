//! Gap reductions to Set Cover, the covering gadgets they rely on, and the
//! one-round games they start from, with exhaustive oracles for checking
//! completeness and probing soundness on small instances.

pub mod bits;
pub mod combin;
pub mod error;
pub mod formulas;
pub mod harness;
pub mod par;
pub mod projection_games;
pub mod proof_systems;
pub mod reductions;
pub mod rng;
pub mod set_systems;
pub mod setcover;

pub use error::{Error, Result};

/// Exact non-negative rational used for game values and soundness errors.
pub type Fraction = num_rational::Ratio<u64>;
