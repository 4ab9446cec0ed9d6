//! Radon-domain cumulative distribution transform for images.
//!
//! The core pipeline turns a normalized nonnegative image into a sinogram
//! (`radon`), applies a one-dimensional mass transport to every projection
//! against a reference template (`cdt1d`, `rcdt`), and works with the result
//! as an ordinary Euclidean feature grid: distances, interpolation, and the
//! statistical tooling in `analysis`. Everything is invertible back to the
//! image domain through filtered backprojection.

pub mod analysis;
pub mod cdt1d;
pub mod container;
pub mod datasets;
pub mod error;
pub mod grid;
pub mod pgm;
pub mod pipeline;
pub mod radon;
pub mod rcdt;
pub mod warp;

pub use error::{Error, Result};
pub use grid::{Image, RcdtRepresentation, Sinogram, TransportField};
pub use rcdt::{RcdtConfig, Template};
