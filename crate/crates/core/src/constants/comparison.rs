use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::RateParameters;

/// Trace-norm comparison bound and its validity thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonBound {
    /// `x = 16 t ‖Φ‖_∞ / ħ`.
    pub x: f64,
    pub bound: f64,
    pub log_bound: f64,
    /// Smallest `n ≥ 1` with `2ⁿ((j+n)²/(4e^{2n}) + 2/4ⁿ) ≤ 1`.
    pub n0_j: u32,
    /// `log N₀(j) = 2 n₀(j) + 2`.
    pub log_n0_threshold: f64,
    /// `log exp(2^{x+1} j)`.
    pub log_exp_threshold: f64,
    pub admissible: bool,
    /// `T_ħ = ħ/(16‖Φ‖_∞)`.
    pub t_hbar: f64,
    /// `k = [x] + 1`.
    pub k: u32,
}

/// `n₀(j)` by exhaustive search.
pub fn n0_of_j(j: u32) -> u32 {
    let jf = j as f64;
    (1..)
        .find(|&n| {
            let nf = n as f64;
            let lhs = 2f64.powf(nf) * ((jf + nf).powi(2) / (4.0 * (2.0 * nf).exp()) + 2.0 / 4f64.powf(nf));
            lhs <= 1.0
        })
        .expect("the sequence tends to zero")
}

/// `φ(k, N) = 2^{−k} log N`.
pub fn phi_k_n(k: u32, n: f64) -> f64 {
    n.ln() / 2f64.powi(k as i32)
}

/// `log` of `2^{j+1+x} / N^{2^{−1−x} log 2}`.
pub fn log_comparison(j: u32, x: f64, n: f64) -> f64 {
    (j as f64 + 1.0 + x) * LN_2 - 2f64.powf(-1.0 - x) * LN_2 * n.ln()
}

pub fn hbar_dependent_bound(p: &RateParameters) -> ComparisonBound {
    let phi = p.potential.sup_norm();
    let t = p.t.abs();
    let x = 16.0 * t * phi / p.hbar;
    let log_bound = log_comparison(p.j, x, p.n);
    let n0_j = n0_of_j(p.j);
    let log_n0_threshold = 2.0 * n0_j as f64 + 2.0;
    let log_exp_threshold = 2f64.powf(x + 1.0) * p.j as f64;
    let ln_n = p.n.ln();
    ComparisonBound {
        x,
        bound: log_bound.exp(),
        log_bound,
        n0_j,
        log_n0_threshold,
        log_exp_threshold,
        admissible: ln_n >= log_n0_threshold && ln_n >= log_exp_threshold,
        t_hbar: if phi > 0.0 { p.hbar / (16.0 * phi) } else { f64::INFINITY },
        k: x.floor() as u32 + 1,
    }
}
