//! Numerics for one-dimensional scattering at downward potential steps,
//! wave packet propagation, and decaying states on a potential plateau.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gamow;
pub mod grid;
pub mod metastable;
pub mod packet;
pub mod potential;
pub mod spectral;
pub mod stationary;
pub mod tdse;
pub mod units;
pub mod wavefunction;

pub use error::{Error, Result};
pub use grid::Grid;
pub use packet::{build_gaussian, GaussianPacketSpec};
pub use potential::Potential;
pub use units::PhysicalParams;
pub use wavefunction::WaveFunction;
