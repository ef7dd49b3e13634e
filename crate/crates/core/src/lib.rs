//! Separation of point and line singularities by l1 analysis over a radial
//! wavelet Parseval frame and a bandlimited alpha-shearlet dual pair.
//!
//! Everything lives on the unit torus sampled on an `N x N` grid with the
//! integer frequency lattice `[-N/2, N/2)^2`. Frame symbols are evaluated at
//! lattice points, transforms are Fourier multipliers, and the separation
//! problem is solved per subband with a preconditioned primal-dual scheme.

pub mod diagnostics;
pub mod error;
pub mod generators;
pub mod grid;
pub mod io;
pub mod lattice;
pub mod models;
pub mod separation;
pub mod shearlet;
pub mod wavelet;

mod bank;
mod scalar;
#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use grid::{FreqGrid, GridImage, Spectrum};
pub use scalar::Real;
pub use separation::{SeparationResult, SolverConfig};
pub use shearlet::{AlphaParams, ShearletFrame, Variant};
pub use wavelet::WaveletFrame;

pub type GridImage64 = GridImage<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type WaveletFrame64 = WaveletFrame<f64>;
pub type ShearletFrame64 = ShearletFrame<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SeparationResult64 = SeparationResult<f64>;

pub type GridImage32 = GridImage<f32>;
pub type Spectrum32 = Spectrum<f32>;
