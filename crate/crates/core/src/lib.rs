//! Exact construction, model dynamics and proof ledger for a transcendental
//! entire function whose Julia set has positive finite Lebesgue measure.
//!
//! The crate never builds the entire function itself. It builds every square
//! family exactly, models the function by the affine maps it approximates
//! (with explicit perturbation budgets), enumerates the nested Cantor
//! collections, and checks every inequality the argument relies on with
//! exact rationals.

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod numbers;
pub mod render;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{AffineMap, Construction, Level, QRect, Region, RegionTag};
pub use numbers::{pow2, QBox, QPoint, Rat};
