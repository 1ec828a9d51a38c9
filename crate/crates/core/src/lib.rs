//! Fast solver for 2D acoustic scattering by penetrable media with a
//! discontinuous refractive index.
//!
//! The Lippmann-Schwinger equation
//! `u + kappa^2 int G(x - y) m(y) u(y) dy = u_inc` is discretized on a
//! uniform grid with the pre-corrected trapezoidal rule, after replacing the
//! indicator of the scatterer by its truncated Fourier series. Operator
//! applications cost one padded FFT convolution, `O(N log N)`.

pub mod error;
pub mod fastconv;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod numint;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod specfun;
pub mod windowing;

pub use error::{Error, Result};
pub use grid::{ComplexField, GridSpec, Point};
