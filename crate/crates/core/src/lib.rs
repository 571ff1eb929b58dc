//! Spectral-perturbation separation of nonlinear and linear noise in
//! coherent optical links.
//!
//! The crate provides a reference-spectrum toolkit, a Gaussian-noise model
//! with region-conditioned integrals, a dual-polarization split-step
//! simulator, and the least-squares estimators that recover per-category
//! noise contributions from perturbed measurements.

pub mod categories;
pub mod error;
pub mod estimator;
pub mod gn_model;
pub mod spectra;
pub mod ssfm;
pub mod units;

pub use categories::{CategoryKey, NoiseDecomposition, Quantity, RegionLabel};
pub use error::{Error, Result};
pub use gn_model::{Coherence, FwmKernelSpec, LinkParameters};
pub use spectra::{FrequencyGrid, Interval, PerturbationPair, Psd, SpectralLayout};
