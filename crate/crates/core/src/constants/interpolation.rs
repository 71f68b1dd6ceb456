use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::comparison::n0_of_j;
use super::RateParameters;
use crate::error::{Error, Result};

/// Uniform-in-ħ interpolation quantities at horizon `t*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationBound {
    pub t_star: f64,
    pub lambda: f64,
    pub c_estim_u: f64,
    /// `B(ħ, j, t*)` at the parameter ħ.
    pub b_bound: f64,
    pub hat_hbar: f64,
    pub hbar_star: f64,
    pub hbar_star_residual: f64,
    pub b_at_hbar_star: f64,
    pub b_at_hat_hbar: f64,
    pub e_bound: f64,
    pub loglog_bound: f64,
    /// `16 t* ‖Φ‖_∞ log 2 / log log N`.
    pub asymptotic_hbar: f64,
}

/// `B(ħ, j, t) = 2dħ(1 + j e^{Λt})`.
pub fn b_bound(d: u32, hbar: f64, j: u32, t: f64, lambda: f64) -> f64 {
    2.0 * d as f64 * hbar * (1.0 + j as f64 * (lambda * t).exp())
}

/// Squared comparison bound `2^{2j+2+2x} / N^{2^{−x} log 2}`.
pub fn squared_comparison(j: u32, x: f64, n: f64) -> f64 {
    ((2.0 * j as f64 + 2.0 + 2.0 * x) * LN_2 - 2f64.powf(-x) * LN_2 * n.ln()).exp()
}

/// `ĥ(N, j, t) = 16‖Φ‖ t ln 2 / (log log N − log 2j)`.
pub fn hat_hbar(n: f64, j: u32, t: f64, phi_sup: f64) -> Result<f64> {
    let den = n.ln().ln() - (2.0 * j as f64).ln();
    if !(den > 0.0) {
        return Err(Error::Precondition(format!("log log N = {} must exceed log 2j", n.ln().ln())));
    }
    Ok(16.0 * phi_sup * t * LN_2 / den)
}

fn lambda_of(p: &RateParameters) -> f64 {
    3.0 + 4.0 * p.potential.grad_lipschitz().powi(2)
}

/// Defining equation of `ħ*` in log form; decreasing in ħ.
pub fn hbar_star_equation(p: &RateParameters, t_star: f64, hbar: f64) -> f64 {
    let lambda = lambda_of(p);
    let x = 16.0 * t_star * p.potential.sup_norm() / hbar;
    let inner = (2.0 * p.j as f64 + 2.0 + 2.0 * x) * LN_2 - b_bound(p.d, hbar, p.j, t_star, lambda).ln();
    let lhs = if x > 1000.0 { f64::INFINITY * inner.signum() } else { 2f64.powf(x) / LN_2 * inner };
    lhs - p.n.ln()
}

fn solve_hbar_star(p: &RateParameters, t_star: f64) -> Result<f64> {
    let f = |h: f64| hbar_star_equation(p, t_star, h);
    let (mut lo, mut hi) = (1.0, 1.0);
    let mut guard = 0;
    while f(lo) <= 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Internal("no lower bracket for ħ*".into()));
        }
    }
    guard = 0;
    while f(hi) >= 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Internal("no upper bracket for ħ*".into()));
        }
    }
    for _ in 0..300 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}

pub fn interpolation_bound(p: &RateParameters, t_star: f64) -> Result<InterpolationBound> {
    if !(t_star > 0.0) {
        return Err(Error::Precondition("t* must be positive".into()));
    }
    let phi = p.potential.sup_norm();
    if !(phi > 0.0) {
        return Err(Error::Precondition("‖Φ‖_∞ must be positive".into()));
    }
    let lambda = lambda_of(p);
    let c = 8.0 * p.potential.grad_sup() / lambda;
    let hh = hat_hbar(p.n, p.j, t_star, phi)?;
    let hs = solve_hbar_star(p, t_star)?;
    let b_star = b_bound(p.d, hs, p.j, t_star, lambda);
    let b_hat = b_bound(p.d, hh, p.j, t_star, lambda);
    let tail = p.j as f64 * c * (lambda * t_star).exp() / p.n;
    let lnln = p.n.ln().ln();
    Ok(InterpolationBound {
        t_star,
        lambda,
        c_estim_u: c,
        b_bound: b_bound(p.d, p.hbar, p.j, t_star, lambda),
        hat_hbar: hh,
        hbar_star: hs,
        hbar_star_residual: hbar_star_equation(p, t_star, hs),
        b_at_hbar_star: b_star,
        b_at_hat_hbar: b_hat,
        e_bound: b_star.max(b_hat) + tail,
        loglog_bound: 64.0 * LN_2 * p.d as f64 * t_star * phi * (1.0 + p.j as f64 * (lambda * t_star).exp()) / lnln,
        asymptotic_hbar: 16.0 * t_star * phi * LN_2 / lnln,
    })
}

/// Branch of the alternative taken at `(N, ħ, j, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectedBound {
    /// `'a'` when `ħ ≥ ĥ(N,j,t)` and `N ≥ N₀(j)`, else `'b'`.
    pub branch: char,
    pub value: f64,
    pub l1_candidate: Option<f64>,
    pub mk_candidate: f64,
}

/// Smallest admissible bound on `E(N, ħ, j, t)` at the parameter point.
pub fn selected_bound(p: &RateParameters) -> Result<SelectedBound> {
    let t = p.t.abs();
    let phi = p.potential.sup_norm();
    let lambda = lambda_of(p);
    let c = 8.0 * p.potential.grad_sup() / lambda;
    let tail = p.j as f64 * c * (lambda * t).exp() / p.n;
    let mk = b_bound(p.d, p.hbar, p.j, t, lambda) + tail;
    let hh = hat_hbar(p.n, p.j, t, phi)?;
    let n0_ok = p.n.ln() >= 2.0 * n0_of_j(p.j) as f64 + 2.0;
    if p.hbar >= hh && n0_ok {
        let x = 16.0 * t * phi / p.hbar;
        let l1 = squared_comparison(p.j, x, p.n) + tail;
        Ok(SelectedBound { branch: 'a', value: l1.min(mk), l1_candidate: Some(l1), mk_candidate: mk })
    } else {
        Ok(SelectedBound { branch: 'b', value: mk, l1_candidate: None, mk_candidate: mk })
    }
}
