//! Rate constants, horizons, thresholds and bounds, evaluated exactly as defined.

mod comparison;
mod interpolation;

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

pub use comparison::{hbar_dependent_bound, log_comparison, n0_of_j, phi_k_n, ComparisonBound};
pub use interpolation::{
    b_bound, hat_hbar, hbar_star_equation, interpolation_bound, selected_bound, squared_comparison, InterpolationBound,
    SelectedBound,
};

use crate::dynamics::TrigPotential;
use crate::error::{Error, Result};

/// Inputs of every rate formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateParameters {
    pub alpha: f64,
    pub beta: f64,
    pub beta_prime: f64,
    pub potential: TrigPotential,
    pub hbar: f64,
    pub j: u32,
    pub t: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(default = "one")]
    pub d: u32,
    pub f_in_norm: f64,
}

fn one() -> u32 {
    1
}

impl RateParameters {
    /// Parameters with the default `α = log‖f^in‖_{β'} + log 2`.
    #[allow(clippy::too_many_arguments)]
    pub fn with_default_alpha(
        beta: f64,
        beta_prime: f64,
        potential: TrigPotential,
        hbar: f64,
        j: u32,
        t: f64,
        n: f64,
        f_in_norm: f64,
    ) -> Self {
        Self { alpha: f_in_norm.ln() + LN_2, beta, beta_prime, potential, hbar, j, t, n, d: 1, f_in_norm }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < self.beta_prime) {
            return Err(Error::Precondition(format!("need 0 < β < β', got β={} β'={}", self.beta, self.beta_prime)));
        }
        if self.j < 1 || (self.j as f64) > self.n {
            return Err(Error::Precondition(format!("need N >= j >= 1, got j={} N={}", self.j, self.n)));
        }
        if !(self.hbar > 0.0) {
            return Err(Error::Precondition("hbar must be positive".into()));
        }
        if !self.alpha.is_finite() || !self.t.is_finite() || !self.f_in_norm.is_finite() {
            return Err(Error::Precondition("non-finite parameter".into()));
        }
        Ok(())
    }

    /// `α' = α + log 2`.
    pub fn alpha_prime(&self) -> f64 {
        self.alpha + LN_2
    }
}

/// `C_Φ^β(t) = Σ_{h=±k} |h| |Φ̂(h)| e^{2β|h|(1+|t|)}`.
pub fn c_phi(beta: f64, t: f64, phi: &TrigPotential) -> f64 {
    phi.fourier_pairs()
        .iter()
        .map(|&(h, w)| {
            let k = h.unsigned_abs() as f64;
            k * w.abs() * (2.0 * beta * k * (1.0 + t.abs())).exp()
        })
        .sum()
}

/// Residual `G(b) = 2(1+s)s C_Φ^{β'}(s) e^α − (β' − b)` with `s = (b − β)/b`.
pub fn beta0_residual(alpha: f64, beta: f64, beta_prime: f64, phi: &TrigPotential, b: f64) -> f64 {
    let s = (b - beta) / b;
    2.0 * (1.0 + s) * s * c_phi(beta_prime, s, phi) * alpha.exp() - (beta_prime - b)
}

/// Root `β₀ ∈ (β, β']` of the defining equation and the horizon `T = (β₀ − β)/β₀`.
pub fn solve_beta0(alpha: f64, beta: f64, beta_prime: f64, phi: &TrigPotential) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < beta_prime) {
        return Err(Error::Precondition("need 0 < β < β'".into()));
    }
    let g = |b: f64| beta0_residual(alpha, beta, beta_prime, phi, b);
    let (mut lo, mut hi) = (beta, beta_prime);
    let (glo, ghi) = (g(lo), g(hi));
    if ghi <= 0.0 {
        // only possible when C_Φ vanishes; then G(β') = 0 exactly
        if ghi == 0.0 {
            return Ok((beta_prime, (beta_prime - beta) / beta_prime));
        }
        return Err(Error::Internal(format!("no sign change for β₀ (G(β') = {ghi})")));
    }
    if glo >= 0.0 {
        return Err(Error::Internal(format!("no sign change for β₀ (G(β) = {glo})")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let b = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    Ok((b, (b - beta) / b))
}

/// [`solve_beta0`] for a parameter set.
pub fn solve_beta0_and_horizon(p: &RateParameters) -> Result<(f64, f64)> {
    solve_beta0(p.alpha, p.beta, p.beta_prime, &p.potential)
}

/// Maximizer `x(a) = 1 + (√(a²+4) − a)/2` of `x(a+x)e^{−x}` on `[0, ∞)`.
pub fn x_of_a(a: f64) -> f64 {
    // rationalized form keeps precision for large a
    1.0 + 2.0 / ((a * a + 4.0).sqrt() + a)
}

/// `γ(j, τ)`.
pub fn gamma(j: u32, tau: f64) -> f64 {
    let l = (1.0 / tau).ln();
    let a = (j as f64 + 1.0) * l;
    let x = x_of_a(a);
    ((a * x + x * x) / (x.exp() * l * l)).exp()
}

/// `c₁ = (j+1)/(1−τ)² + 2τ/(1−τ)³`.
pub fn c1(j: u32, tau: f64) -> f64 {
    (j as f64 + 1.0) / (1.0 - tau).powi(2) + 2.0 * tau / (1.0 - tau).powi(3)
}

/// `C(j, τ) = (1+γ)c₁ + 4/(1−τ)`.
pub fn c_jtau(j: u32, tau: f64) -> f64 {
    (1.0 + gamma(j, tau)) * c1(j, tau) + 4.0 / (1.0 - tau)
}

/// `n₀(N) = [log N / log(1/τ)] + 1`.
pub fn n0_of_n(n: f64, tau: f64) -> u64 {
    (n.ln() / (1.0 / tau).ln()).floor() as u64 + 1
}

/// `c_{n₀} = exp((n₀ − 1)(j + n₀)/N)`.
pub fn c_n0(n0: u64, j: u32, n: f64) -> f64 {
    ((n0 as f64 - 1.0) * (j as f64 + n0 as f64) / n).exp()
}

/// `D(τ) = exp((log(1/τ) + 3)/(e log²τ))`.
pub fn d_tau(tau: f64) -> f64 {
    let l = tau.ln();
    (((1.0 / tau).ln() + 3.0) / (E * l * l)).exp()
}

/// General-α form of the main bound:
/// `C(j,τ)/N · τ · e^{α(j−1)} ‖f‖ / (1 − e^{−α}‖f‖)`.
pub fn maineq_bound(j: u32, tau: f64, n: f64, alpha: f64, f_norm: f64) -> Result<f64> {
    let q = (-alpha).exp() * f_norm;
    if q >= 1.0 {
        return Err(Error::Precondition(format!("need α > log‖f‖ (e^{{-α}}‖f‖ = {q})")));
    }
    Ok(c_jtau(j, tau) / n * tau * (alpha * (j as f64 - 1.0)).exp() * f_norm / (1.0 - q))
}

/// Largest admissible `j`: `(log N + log(1/τ)) / (α' + 1/(e log(1/τ)))`.
pub fn j_max(n: f64, tau: f64, alpha_prime: f64) -> f64 {
    let l = (1.0 / tau).ln();
    (n.ln() + l) / (alpha_prime + 1.0 / (E * l))
}

/// `‖f^in‖_{α,β'}` for factorized data truncated at `N` particles, `Σ_{j≤N} (e^{−α}‖f‖)^j`.
pub fn factorized_sequence_norm(alpha: f64, f_norm: f64, n: f64) -> f64 {
    let q = (-alpha).exp() * f_norm;
    let terms = n.min(1e7) as u64;
    if (q - 1.0).abs() < 1e-15 {
        return terms as f64;
    }
    q * (1.0 - q.powf(terms as f64)) / (1.0 - q)
}

/// Remainder estimate `2 e^{αj} τ^{n₀+1} ‖f^in‖_{α,β'} / (1−τ)`.
pub fn remainder_bound(alpha: f64, j: u32, tau: f64, n0: u32, seq_norm: f64) -> f64 {
    2.0 * (alpha * j as f64).exp() * tau.powi(n0 as i32 + 1) * seq_norm / (1.0 - tau)
}

/// Sequence-norm bound `‖f^N(t)‖_{α,β} ≤ ‖f^in‖_{α,β'}/(1−τ)`.
pub fn hierarchy_norm_bound(seq_norm: f64, tau: f64) -> f64 {
    seq_norm / (1.0 - tau)
}

/// Deviation estimate `‖f^N(t) − f^in‖_{α,β}`.
pub fn deviation_bound(p: &RateParameters, seq_norm: f64, v_moment_norms: &[f64]) -> Result<f64> {
    let t = p.t.abs();
    if t == 0.0 {
        return Ok(0.0);
    }
    let gap = p.beta_prime - p.beta;
    let c = c_phi(p.beta_prime, t, &p.potential);
    let first = if c == 0.0 {
        0.0
    } else {
        let pole = gap / (3.0 * (1.0 + t) * c * p.alpha.exp());
        if t >= pole {
            return Err(Error::Horizon { t, horizon: pole });
        }
        seq_norm / (pole - t)
    };
    let moments: f64 = v_moment_norms.iter().sum();
    Ok(t * (first + moments / (E * gap)))
}

/// Every named constant at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub format_version: u32,
    pub alpha: f64,
    pub alpha_prime: f64,
    pub c_phi_0: f64,
    pub c_phi_beta_t: f64,
    pub c_phi_beta_prime_t: f64,
    pub beta0: f64,
    pub horizon: f64,
    pub tau: f64,
    pub x_of_a: f64,
    pub gamma_jt: f64,
    pub n0: u64,
    pub c_n0: f64,
    pub c1: f64,
    pub c_jtau: f64,
    pub d_tau: f64,
    pub maineq_bound: f64,
    pub j_max: f64,
    pub comparison: ComparisonBound,
    pub phi_k_n: f64,
    pub lambda: f64,
    pub c_estim_u: f64,
    pub b_bound: f64,
    pub interpolation: Option<InterpolationBound>,
    pub f_in_seq_norm: f64,
    pub deviation_bound: Option<f64>,
}

/// Evaluates every formula at `p`; the interpolation group uses `t* = |t|`.
pub fn rate_report(p: &RateParameters) -> Result<RateReport> {
    p.validate()?;
    let (beta0, horizon) = solve_beta0_and_horizon(p)?;
    let t = p.t.abs();
    if t >= horizon {
        return Err(Error::Horizon { t, horizon });
    }
    let tau = t / horizon;
    let l = if tau > 0.0 { (1.0 / tau).ln() } else { f64::INFINITY };
    let a = (p.j as f64 + 1.0) * l;
    let n0 = if tau > 0.0 { n0_of_n(p.n, tau) } else { 1 };
    let comparison = hbar_dependent_bound(p);
    let phi = &p.potential;
    let lambda = 3.0 + 4.0 * phi.grad_lipschitz().powi(2);
    let interpolation = if t > 0.0 { interpolation_bound(p, t).ok() } else { None };
    let seq = factorized_sequence_norm(p.alpha, p.f_in_norm, p.n);
    Ok(RateReport {
        format_version: crate::phase_space::io::FORMAT_VERSION,
        alpha: p.alpha,
        alpha_prime: p.alpha_prime(),
        c_phi_0: c_phi(0.0, p.t, phi),
        c_phi_beta_t: c_phi(p.beta, p.t, phi),
        c_phi_beta_prime_t: c_phi(p.beta_prime, p.t, phi),
        beta0,
        horizon,
        tau,
        x_of_a: x_of_a(a),
        gamma_jt: if tau > 0.0 { gamma(p.j, tau) } else { 1.0 },
        n0,
        c_n0: c_n0(n0, p.j, p.n),
        c1: c1(p.j, tau),
        c_jtau: if tau > 0.0 { c_jtau(p.j, tau) } else { 2.0 * c1(p.j, 0.0) + 4.0 },
        d_tau: if tau > 0.0 { d_tau(tau) } else { 1.0 },
        maineq_bound: if tau > 0.0 { maineq_bound(p.j, tau, p.n, p.alpha, p.f_in_norm)? } else { 0.0 },
        j_max: if tau > 0.0 { j_max(p.n, tau, p.alpha_prime()) } else { f64::INFINITY },
        comparison,
        phi_k_n: phi_k_n(comparison.k, p.n),
        lambda,
        c_estim_u: 8.0 * phi.grad_sup() / lambda,
        b_bound: b_bound(p.d, p.hbar, p.j, t, lambda),
        interpolation,
        f_in_seq_norm: seq,
        deviation_bound: deviation_bound(p, seq, &[]).ok(),
    })
}

impl RateReport {
    /// Flat `(name, value)` pairs for CSV emission.
    pub fn fields(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        let v = serde_json::to_value(self).expect("serializable");
        flatten("", &v, &mut out);
        out
    }
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, f64)>) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        serde_json::Value::Number(n) => out.push((prefix.to_string(), n.as_f64().unwrap_or(f64::NAN))),
        serde_json::Value::Bool(b) => out.push((prefix.to_string(), if *b { 1.0 } else { 0.0 })),
        serde_json::Value::Null => out.push((prefix.to_string(), f64::NAN)),
        _ => {}
    }
}
