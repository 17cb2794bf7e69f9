//! Fan-beam tensor tomography on the Euclidean unit disk.
//!
//! Forward X-ray transforms of symmetric tensor fields in fan-beam coordinates,
//! the boundary operator algebra (scattering relation, fiberwise Hilbert
//! transform, `P` and `C` operators), range-consistency tests and exact
//! reconstruction of the canonical representative from data.

pub mod boundary;
pub mod consistency;
pub mod error;
mod fft;
pub mod fiber;
pub mod forward;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod phantoms;
pub mod recon;

pub use error::{Error, Result};
pub use grid::{
    Basis, BoundaryField, CoeffTable, DiskImage, ImageGrid, SinoGrid, Sinogram, TensorField,
};

/// Complex scalar type used throughout.
pub type C64 = num_complex::Complex64;
