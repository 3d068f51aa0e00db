//! Simulation and analysis toolkit for the rebellious voter model, its
//! one-sided variant and related parity-preserving branching-annihilating
//! particle systems on a periodic ring.

pub mod analysis;
pub mod edge;
pub mod engine;
pub mod error;
pub mod exact;
pub mod models;
pub mod observables;
pub mod pattern;
pub mod replica;
pub mod ring;

pub use error::{Error, Result};
pub use models::{Family, ModelSpec, Representation};
pub use pattern::Pattern;
pub use ring::RingConfig;
