//! Numerical toolkit for KdV and Gardner multi-solitons.
//!
//! * [`spectral`]: periodic grids, transforms, derivatives, dealiased products.
//! * [`profiles`]: closed-form solitons, ensembles, Hirota N-solitons.
//! * [`transform`]: the Gardner and Miura transforms.
//! * [`lifting`]: inversion of the Gardner transform near a soliton ensemble.
//! * [`evolve`]: pseudospectral time stepping with conservation monitoring.
//! * [`modulation`]: soliton fitting and tracking along trajectories.
//! * [`experiments`]: scenario files, sweeps and reports.

pub mod error;
pub mod evolve;
pub mod experiments;
pub mod lifting;
pub mod modulation;
pub mod perturbation;
pub mod profiles;
pub mod spectral;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
