use std::f64::consts::LN_2;
use std::time::Instant;

use super::config::{InitialConfig, StudyConfig};
use super::{elapsed_ms, StudyRow, ROW_FORMAT_VERSION};
use crate::constants::{rate_report, solve_beta0, RateParameters};
use crate::dynamics::{evolve_hartree, evolve_nbody_quantum, reduced_state, QuantumEnsemble};
use crate::error::{Error, Result};
use crate::phase_space::{beta_norm, toeplitz_point_masses, wigner_fourier_with_tolerance, FourierPhaseFunction};

/// Largest wave-function storage of one ensemble, in bytes.
const ENSEMBLE_BYTES: usize = 1 << 30;

/// Two-point Gauss–Hermite cubature of `N(q, w²) ⊗ N(p, w²)`: four atoms of mass 1/4.
pub fn gauss_hermite_points(init: &InitialConfig) -> [(f64, f64, f64); 4] {
    let (q, p, w) = (init.q, init.p, init.width);
    [(q - w, p - w, 0.25), (q - w, p + w, 0.25), (q + w, p - w, 0.25), (q + w, p + w, 0.25)]
}

fn binomial(n: usize, k: usize) -> usize {
    (1..=k).fold(1usize, |acc, i| acc * (n + 1 - i) / i)
}

/// `(norm, flagged)`; an unresolved maximizer yields its lower bound, flagged.
fn resolved_norm(f: &FourierPhaseFunction, rho: f64) -> Result<(f64, bool)> {
    match beta_norm(f, rho) {
        Ok(v) => Ok((v, false)),
        Err(Error::UnresolvedNorm { lower_bound }) => Ok((lower_bound, true)),
        Err(e) => Err(e),
    }
}

/// Time fractions ordered for incremental evolution: negatives by decreasing
/// value, then nonnegatives by increasing value.
fn march_order(times: &[f64]) -> Vec<f64> {
    let mut neg: Vec<f64> = times.iter().copied().filter(|t| *t < 0.0).collect();
    let mut pos: Vec<f64> = times.iter().copied().filter(|t| *t >= 0.0).collect();
    neg.sort_by(|a, b| b.total_cmp(a));
    pos.sort_by(|a, b| a.total_cmp(b));
    neg.dedup();
    pos.dedup();
    neg.into_iter().chain(pos).collect()
}

/// Quantum N-body against Hartree: `‖F^N_j(t) − F(t)^{⊗j}‖_β` on the Wigner band
/// for every `(ħ, N, t, j)`, next to the main bound at the same parameters.
pub fn run_quantum_study(cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    cfg.validate()?;
    let phi = cfg.potential()?;
    let q = &cfg.quantum;
    let (beta, bp) = (cfg.rates.beta, cfg.rates.beta_prime);
    let n = q.points_per_axis;
    let tol = q.wigner_tolerance;
    let points = gauss_hermite_points(&cfg.initial);
    for &np in &q.particles {
        let bytes = binomial(points.len() + np - 1, np) * n.pow(np as u32) * 16;
        if bytes > ENSEMBLE_BYTES {
            return Err(Error::Capacity(format!("N = {np} on {n} points needs {bytes} bytes of wave functions")));
        }
    }
    let mut rows = Vec::new();
    for &hbar in &q.hbar {
        let d0 = toeplitz_point_masses(&points, hbar, n)?;
        let w0 = wigner_fourier_with_tolerance(&d0, tol)?;
        let f_norm = beta_norm(&w0, bp)?;
        let alpha = cfg.rates.alpha.unwrap_or(f_norm.ln() + LN_2);
        let (_, horizon) = solve_beta0(alpha, beta, bp, &phi)?;
        let order = march_order(&q.times);
        // Hartree references per time and marginal
        let mut refs = Vec::with_capacity(order.len());
        for &frac in &order {
            let h = evolve_hartree(&d0, &phi, q.dt, frac * horizon)?;
            let w1 = wigner_fourier_with_tolerance(&h, tol)?;
            let by_j = q.marginals.iter().map(|&j| w1.tensor_power(j)).collect::<Result<Vec<_>>>()?;
            refs.push(by_j);
        }
        for &np in &q.particles {
            let start = Instant::now();
            let ens0 = QuantumEnsemble::coherent_power(&points, hbar, n, np)?;
            let mut ens = ens0.clone();
            let mut last = 0.0;
            for (k, &frac) in order.iter().enumerate() {
                let t = frac * horizon;
                if frac < 0.0 && last > 0.0 || (frac >= 0.0 && last < 0.0) {
                    ens = ens0.clone();
                    last = 0.0;
                }
                ens = evolve_nbody_quantum(&ens, &phi, q.dt, t - last)?;
                last = t;
                for (ji, &j) in q.marginals.iter().enumerate() {
                    if j > np {
                        continue;
                    }
                    let reference = &refs[k][ji];
                    // at t = 0 both sides are the common factorized datum
                    let (err, flagged) = if t == 0.0 {
                        (0.0, false)
                    } else {
                        let w = wigner_fourier_with_tolerance(&reduced_state(&ens, j)?, tol)?;
                        resolved_norm(&w.sub(reference)?, beta)?
                    };
                    let mut p =
                        RateParameters::with_default_alpha(beta, bp, phi.clone(), hbar, j as u32, t, np as f64, f_norm);
                    p.alpha = alpha;
                    let bound = rate_report(&p)?.maineq_bound;
                    rows.push(StudyRow {
                        format_version: ROW_FORMAT_VERSION,
                        seed: cfg.seed,
                        study: "quantum".into(),
                        n: np,
                        hbar,
                        j,
                        t,
                        measured_error: err,
                        bound,
                        metric_name: "beta_norm_wigner".into(),
                        mc_stderr: 0.0,
                        runtime_ms: elapsed_ms(start, cfg.record_runtime),
                        flagged,
                    });
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        (a.hbar.total_cmp(&b.hbar).reverse())
            .then(a.n.cmp(&b.n))
            .then(a.j.cmp(&b.j))
            .then(a.t.total_cmp(&b.t))
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn march_order_walks_away_from_zero() {
        assert_eq!(march_order(&[0.25, -0.1, 0.125, -0.3, 0.25]), vec![-0.1, -0.3, 0.125, 0.25]);
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(binomial(4 + 4 - 1, 4), 35);
        assert_eq!(binomial(5, 2), 10);
    }
}
