//! Inverse-engineered vibrational-spin transfer of a spin-orbit-coupled atom
//! in a Morse trap, with two-level, grid, and robustness checks.

mod error;
pub mod grid;
pub mod morse;
pub mod numerics;
pub mod pulse;
pub mod robustness;
pub mod two_level;
pub mod validation;

pub use error::{Error, Result};
