//! Periodic grid, Fourier transforms, spectral derivatives, dealiased
//! products, quadrature and norms.
//!
//! The transform convention is `F(xi) = sum_j f(x_j) exp(-i xi x_j) dx`, so
//! that differentiation is multiplication by `i xi`.

pub(crate) mod fft;
mod field;
mod grid;
mod ops;
pub mod snapshot;

pub use field::{Spectrum, WaveField};
pub use grid::Grid1D;
pub use ops::{
    derivative, forward_transform, integrate, inverse_transform, norm_h1, norm_l2,
    norm_l2_halfline, product, tail_energy_fraction,
};
pub(crate) use ops::{derivative_samples, derivative_symbol, truncate_modes};
