//! Inverse magnetic billiard in the unit square.
//!
//! The particle moves freely inside the square and on counterclockwise
//! circles of radius `r = 1/B` outside it. [`dynamics::step_f`] is the
//! boundary map on Birkhoff coordinates `(s, theta)`; [`analysis`] iterates
//! it, finds periodic orbits and builds phase portraits; [`export`] writes
//! CSV tables and SVG drawings.

pub mod error;
pub mod geometry;
pub mod dynamics;
pub mod analysis;
pub mod export;

pub use dynamics::{classical_step, inverse_f, step_f, BounceRecord, SimConfig};
pub use error::{BilliardError, Result};
pub use geometry::{BirkhoffState, Side, Tolerances, Vec2};
pub use analysis::{iterate, OrbitTrace, Termination};
