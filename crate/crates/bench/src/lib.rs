//! Fixtures shared by the kernel benchmarks in `benches/`.

use std::f64::consts::PI;

use mflab::hierarchy::{HierarchySequence, Particles};
use mflab::phase_space::{toeplitz_point_masses, wigner_fourier};
use mflab::transport_metrics::DiscreteMeasure;
use mflab::{DensityOperator, FourierPhaseFunction};

/// Coherent-state cubature of the benchmark Gaussian.
pub const BENCH_POINTS: [(f64, f64, f64); 4] =
    [(PI - 0.5, -0.5, 0.25), (PI - 0.5, 0.5, 0.25), (PI + 0.5, -0.5, 0.25), (PI + 0.5, 0.5, 0.25)];

pub fn benchmark_state(hbar: f64, n: usize) -> DensityOperator {
    toeplitz_point_masses(&BENCH_POINTS, hbar, n).expect("valid datum")
}

pub fn benchmark_wigner(hbar: f64, n: usize) -> FourierPhaseFunction {
    wigner_fourier(&benchmark_state(hbar, n)).expect("resolved datum")
}

/// Two-particle tensor square of the benchmark Wigner function.
pub fn benchmark_pair(hbar: f64, n: usize) -> FourierPhaseFunction {
    let seq = HierarchySequence::factorized(&benchmark_wigner(hbar, n), 2, Particles::Finite(2)).expect("fits");
    seq.entry(2).expect("two levels").clone()
}

/// Pair of `m`-point measures on a quasi-random point set.
pub fn measure_pair(m: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    let golden = 0.618_033_988_749_895;
    let pts = |shift: f64| -> Vec<[f64; 2]> {
        (0..m).map(|i| [(2.0 * PI * (i as f64 * golden + shift)).rem_euclid(2.0 * PI), (i as f64 * 0.37 + shift).sin()]).collect()
    };
    let w: Vec<f64> = (0..m).map(|i| 1.0 + (i % 3) as f64).collect();
    let s: f64 = w.iter().sum();
    let w: Vec<f64> = w.iter().map(|x| x / s).collect();
    let mu = DiscreteMeasure::new(pts(0.0), w.clone()).expect("normalized");
    let nu = DiscreteMeasure::new(pts(0.1), w.into_iter().rev().collect()).expect("normalized");
    (mu, nu)
}
