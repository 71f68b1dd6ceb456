//! Grids, symplectic Fourier analysis, Wigner/Husimi/Töplitz transforms and norms.

pub mod grid;
pub mod io;
pub mod operator;

pub use grid::{
    beta_norm, fourier_marginal, heat_semigroup, inverse_symplectic_fourier, marginal, on_band_boundary,
    sequence_norm, symplectic_fourier, weighted_sup, FourierPhaseFunction, PhaseFunction, PhaseGrid,
};
pub use operator::{
    eigenvalues, heat_mollified_wigner, husimi, husimi_direct, inverse_wigner, inverse_wigner_fourier,
    momentum_coefficients, partial_trace, position_samples, toeplitz_point_masses, toeplitz_quantize, trace_norm,
    wigner_fourier, wigner_fourier_with_tolerance, wigner_transform, CoherentPoint, DenseKernel, DensityOperator, ProductMember, Representation,
};
