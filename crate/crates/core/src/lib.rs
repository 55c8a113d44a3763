//! Phase-space transforms, Weyl and Landau–Weyl quantization on uniform grids.

pub mod error;
pub mod fourier;
pub mod grid;
pub mod harness;
pub mod io;
pub mod landau;
pub mod special;
pub mod transforms;
pub mod weyl;

pub use error::{LwError, Result};
pub use grid::{inner_product, make_grid, symplectic_form, Axis, GridSpec, PhasePoint, SampledFunction, C64};
