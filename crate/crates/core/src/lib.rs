//! Numerical laboratory for mean-field limits on the circle.
//!
//! Phase-space transforms, desk-scale quantum and classical dynamics, BBGKY
//! hierarchy operators with truncated Dyson expansions, the explicit rate
//! constants, and exact discrete optimal-transport distances.

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod fft;
pub mod harness;
pub mod hierarchy;
pub mod phase_space;
pub mod transport_metrics;

pub use dynamics::{ClassicalEnsemble, QuantumEnsemble, TrigPotential};
pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use phase_space::{
    CoherentPoint, DenseKernel, DensityOperator, FourierPhaseFunction, PhaseFunction, PhaseGrid,
};
