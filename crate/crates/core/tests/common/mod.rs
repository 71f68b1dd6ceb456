#![allow(dead_code)]
pub mod hp;
pub mod oracle;
pub mod ot;

use mflab::phase_space::{momentum_coefficients, position_samples, DenseKernel, DensityOperator, ProductMember};
use mflab::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Normalized grid state with random momentum content in `|k| <= kmax`.
pub fn smooth_state(rng: &mut ChaCha8Rng, n: usize, kmax: i64) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); n];
    for k in -kmax..=kmax {
        let i = k.rem_euclid(n as i64) as usize;
        let damp = (-(k * k) as f64 / (kmax * kmax) as f64).exp();
        c[i] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * damp;
    }
    let s = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    c.iter_mut().for_each(|z| *z /= s);
    let psi = position_samples(&c);
    debug_assert!((momentum_coefficients(&psi)[0] - c[0]).norm() < 1e-12);
    psi
}

/// Random mixed 1-particle density operator of `members` smooth states.
pub fn random_mixture(rng: &mut ChaCha8Rng, n: usize, kmax: i64, members: usize, hbar: f64) -> DensityOperator {
    let mut w: Vec<f64> = (0..members).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    let ms = w
        .into_iter()
        .map(|weight| ProductMember { weight, factors: vec![smooth_state(rng, n, kmax)] })
        .collect();
    DensityOperator::ensemble(1, n, ms, hbar).unwrap()
}

/// Random 2-particle product ensemble.
pub fn random_pair_ensemble(rng: &mut ChaCha8Rng, n: usize, kmax: i64, members: usize, hbar: f64) -> DensityOperator {
    let mut w: Vec<f64> = (0..members).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    let ms = w
        .into_iter()
        .map(|weight| ProductMember {
            weight,
            factors: vec![smooth_state(rng, n, kmax), smooth_state(rng, n, kmax)],
        })
        .collect();
    DensityOperator::ensemble(2, n, ms, hbar).unwrap()
}

/// Random Hermitian (indefinite) dense kernel with smooth rows.
pub fn random_hermitian(rng: &mut ChaCha8Rng, particles: usize, n: usize, terms: usize) -> DenseKernel {
    let mut k = DenseKernel::zeros(particles, n);
    for _ in 0..terms {
        let mut psi = vec![C64::new(1.0, 0.0)];
        for _ in 0..particles {
            let f = smooth_state(rng, n, 3);
            psi = psi.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect();
        }
        k.add_pure(rng.random_range(-1.0..1.0), &psi);
    }
    k
}
