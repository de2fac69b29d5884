//! Affine lattices `ASL_d(R)/ASL_d(Z)`, expanding horospherical orbits under
//! the diagonal flow, and the Fourier analysis of their fiber-torus
//! components.

mod dd;
pub mod diophantine;
pub mod enumerate;
pub mod error;
pub mod fundamental;
pub mod geometry;
pub mod lattice;
pub mod measure;
pub mod orbit;

pub use error::{Error, Result};
