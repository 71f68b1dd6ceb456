use std::f64::consts::LN_2;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::{InitialConfig, StudyConfig};
use super::{elapsed_ms, log_log_slope, StudyRow, ROW_FORMAT_VERSION};
use crate::constants::{maineq_bound, solve_beta0};
use crate::dynamics::{evolve_classical_nbody, evolve_vlasov, push_in_field, stratified_gaussian, ClassicalEnsemble};
use crate::error::{Error, Result};
use crate::C64;

/// Fourier modes `(ξ, k·eta_step)` of the estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    pub eta_step: f64,
    pub modes: Vec<(i32, i32)>,
}

impl ModeSet {
    /// `0 ≤ ξ ≤ m`, `|k| ≤ m`, one of each conjugate pair and without the origin.
    pub fn half_plane(m: u32, eta_step: f64) -> Self {
        let m = m as i32;
        let modes = (0..=m).flat_map(|xi| (-m..=m).map(move |k| (xi, k))).filter(|&(xi, k)| xi > 0 || k > 0).collect();
        Self { eta_step, modes }
    }

    pub fn eta(&self, k: i32) -> f64 {
        k as f64 * self.eta_step
    }

    fn max_xi(&self) -> usize {
        self.modes.iter().map(|m| m.0.unsigned_abs() as usize).max().unwrap_or(0)
    }

    fn max_k(&self) -> usize {
        self.modes.iter().map(|m| m.1.unsigned_abs() as usize).max().unwrap_or(0)
    }
}

/// Power tables `e^{iξx}` for `0 ≤ ξ ≤ a` and `e^{−ikδv}` for `|k| ≤ b`.
struct Powers {
    px: Vec<C64>,
    pv: Vec<C64>,
}

impl Powers {
    fn new(a: usize, b: usize) -> Self {
        Self { px: vec![C64::new(1.0, 0.0); a + 1], pv: vec![C64::new(1.0, 0.0); 2 * b + 1] }
    }

    fn fill(&mut self, x: f64, v: f64, step: f64) {
        let ex = C64::from_polar(1.0, x);
        for i in 1..self.px.len() {
            self.px[i] = self.px[i - 1] * ex;
        }
        let b = self.pv.len() / 2;
        let ev = C64::from_polar(1.0, -step * v);
        self.pv[b] = C64::new(1.0, 0.0);
        for i in 1..=b {
            self.pv[b + i] = self.pv[b + i - 1] * ev;
            self.pv[b - i] = self.pv[b - i + 1] * ev.conj();
        }
    }

    fn get(&self, xi: i32, k: i32) -> C64 {
        let b = (self.pv.len() / 2) as i32;
        let ex = self.px[xi.unsigned_abs() as usize];
        let ex = if xi < 0 { ex.conj() } else { ex };
        ex * self.pv[(b + k) as usize]
    }
}

/// `(1/n) Σ_i e^{i(ξ x_i − η v_i)}` at every mode of `set`.
pub fn empirical_modes(x: &[f64], v: &[f64], set: &ModeSet) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); set.modes.len()];
    add_modes(x, v, set, 1.0, &mut out);
    let n = x.len().max(1) as f64;
    out.iter_mut().for_each(|z| *z /= n);
    out
}

fn add_modes(x: &[f64], v: &[f64], set: &ModeSet, w: f64, out: &mut [C64]) {
    let mut pw = Powers::new(set.max_xi(), set.max_k());
    for (a, b) in x.iter().zip(v) {
        pw.fill(*a, *b, set.eta_step);
        for (o, &(xi, k)) in out.iter_mut().zip(&set.modes) {
            *o += pw.get(xi, k) * w;
        }
    }
}

/// `‖f̃^in‖_{β'}` of the Gaussian datum: the weighted sup over integer `ξ` times
/// the continuous sup over `η`, reached at `η = β'/w²`.
pub fn classical_f_in_norm(init: &InitialConfig, beta_prime: f64) -> f64 {
    let w2 = init.width * init.width;
    let g = |xi: f64| beta_prime * xi - 0.5 * w2 * xi * xi;
    let star = beta_prime / w2;
    let best = [star.floor(), star.ceil()].into_iter().map(g).fold(0.0, f64::max);
    (best + beta_prime * beta_prime / (2.0 * w2)).exp()
}

/// Running mean and variance of complex samples.
#[derive(Clone, Copy, Default)]
struct Welford {
    n: f64,
    mean: C64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, z: C64) {
        self.n += 1.0;
        let d = z - self.mean;
        self.mean += d / self.n;
        self.m2 += (d.conj() * (z - self.mean)).re;
    }

    fn stderr(&self) -> f64 {
        if self.n < 2.0 {
            return f64::INFINITY;
        }
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

/// Rows and the fitted log-log slope per time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalStudy {
    pub rows: Vec<StudyRow>,
    /// `(t, slope)` over the unflagged rows at `t`.
    pub slopes: Vec<(f64, Option<f64>)>,
}

/// Step size giving exactly `steps` steps over `t`.
fn step_for(t: f64, steps: usize) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        t.abs() / steps as f64 * (1.0 + 1e-12)
    }
}

/// Classical N-body against Vlasov by Monte Carlo over replicas.
///
/// Each replica's initial particles are moved both by Newton's equations and
/// through the reference mean field, and the low Fourier modes of the two
/// empirical 1-particle marginals are differenced replica by replica.
pub fn run_classical_study(cfg: &StudyConfig) -> Result<ClassicalStudy> {
    cfg.validate()?;
    let phi = cfg.potential()?;
    let c = &cfg.classical;
    let init = &cfg.initial;
    let (beta, bp) = (cfg.rates.beta, cfg.rates.beta_prime);
    let f_norm = classical_f_in_norm(init, bp);
    let alpha = cfg.rates.alpha.unwrap_or(f_norm.ln() + LN_2);
    let (_, horizon) = solve_beta0(alpha, beta, bp, &phi)?;
    let set = ModeSet::half_plane(c.modes, c.eta_step);
    let weights: Vec<f64> =
        set.modes.iter().map(|&(xi, k)| (beta * (xi.abs() as f64 + set.eta(k).abs())).exp()).collect();
    let sample = stratified_gaussian(init.q, init.p, init.width, init.width, c.reference_samples)?;
    let gauss = |m: f64| Normal::new(m, init.width).map_err(|e| Error::Domain(e.to_string()));
    let (nx, nv) = (gauss(init.q)?, gauss(init.p)?);
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for &frac in &c.times {
        let t = frac * horizon;
        let dt = step_for(t, c.steps);
        let (_, hist) = evolve_vlasov(&sample, &phi, dt, t)?;
        let tau = (t / horizon).abs();
        let mut fit = (Vec::new(), Vec::new());
        for (ni, &np) in c.particles.iter().enumerate() {
            let start = Instant::now();
            let mut acc = vec![Welford::default(); set.modes.len()];
            let mut done = 0usize;
            let mut batch = 0u64;
            let mut buf = vec![C64::new(0.0, 0.0); set.modes.len()];
            while done < c.replicas {
                let reps = c.batch.min(c.replicas - done);
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(((ni as u64) << 32) | batch);
                let ens = ClassicalEnsemble::sample(np, reps, || (nx.sample(&mut rng), nv.sample(&mut rng)))?;
                let a = evolve_classical_nbody(&ens, &phi, dt, t)?;
                let b = push_in_field(&ens, &phi, &hist);
                let w = 1.0 / np as f64;
                for r in 0..reps {
                    buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                    let (xa, va) = a.replica(r);
                    let (xb, vb) = b.replica(r);
                    add_modes(xa, va, &set, w, &mut buf);
                    add_modes(xb, vb, &set, -w, &mut buf);
                    for (s, z) in acc.iter_mut().zip(&buf) {
                        s.push(*z);
                    }
                }
                done += reps;
                batch += 1;
            }
            let mut best: Option<(f64, f64)> = None;
            let mut fallback = (0.0f64, 0.0f64);
            for (s, w) in acc.iter().zip(&weights) {
                let (m, se) = (s.mean.norm() * w, s.stderr() * w);
                if m > fallback.0 {
                    fallback = (m, se);
                }
                if se < m / 3.0 && best.is_none_or(|b| m > b.0) {
                    best = Some((m, se));
                }
            }
            let flagged = t != 0.0 && best.is_none();
            let (err, se) = best.unwrap_or(fallback);
            let bound = if tau > 0.0 { maineq_bound(1, tau, np as f64, alpha, f_norm)? } else { 0.0 };
            if !flagged && err > 0.0 {
                fit.0.push(np as f64);
                fit.1.push(err);
            }
            rows.push(StudyRow {
                format_version: ROW_FORMAT_VERSION,
                seed: cfg.seed,
                study: "classical".into(),
                n: np,
                hbar: 0.0,
                j: 1,
                t,
                measured_error: err,
                bound,
                metric_name: "beta_norm_low_modes".into(),
                mc_stderr: se,
                runtime_ms: elapsed_ms(start, cfg.record_runtime),
                flagged,
            });
        }
        slopes.push((t, log_log_slope(&fit.0, &fit.1)));
    }
    Ok(ClassicalStudy { rows, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_plane_skips_origin_and_conjugates() {
        let s = ModeSet::half_plane(1, 0.5);
        assert_eq!(s.modes, vec![(0, 1), (1, -1), (1, 0), (1, 1)]);
    }

    #[test]
    fn powers_match_direct_exponentials() {
        let s = ModeSet { eta_step: 0.5, modes: vec![(0, 0), (3, -2), (-2, 3), (1, 1)] };
        let (x, v) = ([0.3, 2.0], [-1.2, 0.7]);
        let got = empirical_modes(&x, &v, &s);
        for (g, &(xi, k)) in got.iter().zip(&s.modes) {
            let want: C64 = x
                .iter()
                .zip(&v)
                .map(|(a, b)| C64::from_polar(0.5, xi as f64 * a - s.eta(k) * b))
                .sum();
            assert!((g - want).norm() < 1e-14);
        }
        assert_eq!(got[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn gaussian_norm_at_benchmark() {
        let init = InitialConfig::default();
        assert!((classical_f_in_norm(&init, 0.5) - 1f64.exp()).abs() < 1e-14);
    }
}
