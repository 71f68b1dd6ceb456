//! Brute-force transport oracles and random measures.

use mflab::transport_metrics::DiscreteMeasure;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_measure(r: &mut ChaCha8Rng, m: usize, spread: f64) -> DiscreteMeasure {
    let support: Vec<[f64; 2]> = (0..m).map(|_| [r.random_range(-spread..spread), r.random_range(-spread..spread)]).collect();
    let masses: Vec<f64> = (0..m).map(|_| r.random_range(0.05..1.0)).collect();
    DiscreteMeasure::from_masses(support, masses).unwrap()
}

pub fn uniform_measure(r: &mut ChaCha8Rng, m: usize, spread: f64) -> DiscreteMeasure {
    let support: Vec<[f64; 2]> = (0..m).map(|_| [r.random_range(-spread..spread), r.random_range(-spread..spread)]).collect();
    DiscreteMeasure::from_masses(support, vec![1.0; m]).unwrap()
}

pub fn cost_matrix(mu: &DiscreteMeasure, nu: &DiscreteMeasure, c: fn(&[f64; 2], &[f64; 2]) -> f64) -> Vec<f64> {
    mu.support.iter().flat_map(|a| nu.support.iter().map(move |b| c(a, b))).collect()
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum over permutation couplings; exact for uniform measures of equal size.
pub fn permutation_oracle(mu: &DiscreteMeasure, nu: &DiscreteMeasure, c: fn(&[f64; 2], &[f64; 2]) -> f64) -> f64 {
    let m = mu.len();
    permutations(m)
        .iter()
        .map(|p| (0..m).map(|i| c(&mu.support[i], &nu.support[p[i]])).sum::<f64>() / m as f64)
        .fold(f64::INFINITY, f64::min)
}

/// Minimum over all basic feasible couplings: every choice of `m+n−1` cells.
pub fn vertex_oracle(a: &[f64], b: &[f64], cost: &[f64]) -> f64 {
    let (m, n) = (a.len(), b.len());
    let k = m + n - 1;
    let cells = m * n;
    let mut best = f64::INFINITY;
    let rhs = DVector::from_iterator(m + n, a.iter().chain(b).copied());
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        let mut mat = DMatrix::<f64>::zeros(m + n, k);
        for (c, &cell) in pick.iter().enumerate() {
            mat[(cell / n, c)] = 1.0;
            mat[(m + cell % n, c)] = 1.0;
        }
        if let Ok(x) = mat.clone().svd(true, true).solve(&rhs, 1e-12) {
            let feasible = (&mat * &x - &rhs).amax() < 1e-10 && x.iter().all(|v| *v >= -1e-12);
            if feasible {
                best = best.min(pick.iter().zip(x.iter()).map(|(&cell, v)| cost[cell] * v).sum());
            }
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < cells - k + i {
                break;
            }
        }
        pick[i] += 1;
        for r in i + 1..k {
            pick[r] = pick[r - 1] + 1;
        }
    }
}

pub fn common_support_pair(r: &mut ChaCha8Rng, m: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    let support: Vec<[f64; 2]> = (0..m).map(|_| [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)]).collect();
    let sparse = |r: &mut ChaCha8Rng| -> Vec<f64> {
        (0..m).map(|_| if r.random_bool(0.3) { 0.0 } else { r.random_range(0.0..1.0) }).collect()
    };
    let (mut a, mut b) = (sparse(r), sparse(r));
    a[0] += 0.1;
    b[m - 1] += 0.1;
    (
        DiscreteMeasure::from_masses(support.clone(), a).unwrap(),
        DiscreteMeasure::from_masses(support, b).unwrap(),
    )
}
