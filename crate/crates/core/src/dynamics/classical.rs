//! Classical N-body Newton dynamics (velocity Verlet) and the Vlasov particle method.

use serde::{Deserialize, Serialize};

use super::TrigPotential;
use crate::error::{Error, Result};
use crate::C64;

/// Smallest sample count for which the empirical Vlasov force is trusted.
pub const MIN_VLASOV_SAMPLES: usize = 10_000;

/// Equally weighted replicas of an `N`-particle phase point, stored replica-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalEnsemble {
    pub particles: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl ClassicalEnsemble {
    pub fn new(particles: usize, x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if particles == 0 || x.len() != v.len() || x.len() % particles != 0 {
            return Err(Error::Domain("positions and velocities must hold whole replicas".into()));
        }
        if x.iter().chain(&v).any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite phase-space coordinate".into()));
        }
        Ok(Self { particles, x, v })
    }

    /// Built from a sampler of 1-particle phase points, `replicas × particles` draws.
    pub fn sample(particles: usize, replicas: usize, mut draw: impl FnMut() -> (f64, f64)) -> Result<Self> {
        let m = particles * replicas;
        let (mut x, mut v) = (Vec::with_capacity(m), Vec::with_capacity(m));
        for _ in 0..m {
            let (a, b) = draw();
            x.push(a);
            v.push(b);
        }
        Self::new(particles, x, v)
    }

    pub fn replicas(&self) -> usize {
        self.x.len() / self.particles
    }

    pub fn replica(&self, r: usize) -> (&[f64], &[f64]) {
        let s = r * self.particles..(r + 1) * self.particles;
        (&self.x[s.clone()], &self.v[s])
    }

    /// Positions reduced to `[0, 2π)`.
    pub fn wrapped(&self) -> Self {
        let tau = 2.0 * std::f64::consts::PI;
        Self { particles: self.particles, x: self.x.iter().map(|x| x.rem_euclid(tau)).collect(), v: self.v.clone() }
    }

    pub fn momentum(&self, r: usize) -> f64 {
        self.replica(r).1.iter().sum()
    }

    /// Empirical `∫ e^{i(ξx − ηv)} f_1` over every particle of every replica.
    pub fn fourier(&self, xi: f64, eta: f64) -> C64 {
        let s: C64 = self.x.iter().zip(&self.v).map(|(x, v)| C64::from_polar(1.0, xi * x - eta * v)).sum();
        s / self.x.len() as f64
    }
}

/// `(Σ cos kx_l, Σ sin kx_l)` for each active mode.
fn mode_sums(phi: &TrigPotential, xs: &[f64]) -> Vec<(f64, f64)> {
    phi.active_modes()
        .map(|(k, _)| {
            xs.iter().fold((0.0, 0.0), |(c, s), x| {
                let (sn, cs) = (k as f64 * x).sin_cos();
                (c + cs, s + sn)
            })
        })
        .collect()
}

/// Force `−∂_x Σ_k c_k (C_k cos kx + S_k sin kx) · scale` at `x`.
fn field_force(phi: &TrigPotential, sums: &[(f64, f64)], scale: f64, x: f64) -> f64 {
    phi.active_modes()
        .zip(sums)
        .map(|((k, c), (ck, sk))| {
            let kf = k as f64;
            let (sn, cs) = (kf * x).sin_cos();
            kf * c * (sn * ck - cs * sk)
        })
        .sum::<f64>()
        * scale
}

fn nbody_forces(phi: &TrigPotential, xs: &[f64], out: &mut [f64]) {
    let sums = mode_sums(phi, xs);
    let scale = 1.0 / xs.len() as f64;
    for (f, x) in out.iter_mut().zip(xs) {
        *f = field_force(phi, &sums, scale, *x);
    }
}

fn steps_for(dt: f64, t_final: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !t_final.is_finite() {
        return Err(Error::StepSize(format!("dt must be positive, got {dt}")));
    }
    let steps = (t_final.abs() / dt).ceil() as usize;
    Ok((steps, if steps == 0 { 0.0 } else { t_final / steps as f64 }))
}

/// Newton's equations `ẍ_i = −(1/N) Σ_l Φ'(x_i − x_l)` for every replica.
pub fn evolve_classical_nbody(ens: &ClassicalEnsemble, phi: &TrigPotential, dt: f64, t_final: f64) -> Result<ClassicalEnsemble> {
    let (steps, tau) = steps_for(dt, t_final)?;
    let n = ens.particles;
    let mut out = ens.clone();
    let mut f = vec![0.0; n];
    for r in 0..ens.replicas() {
        let s = r * n..(r + 1) * n;
        let (x, v) = (&mut out.x[s.clone()], &mut out.v[s]);
        nbody_forces(phi, x, &mut f);
        for _ in 0..steps {
            for i in 0..n {
                v[i] += 0.5 * tau * f[i];
                x[i] += tau * v[i];
            }
            nbody_forces(phi, x, &mut f);
            for i in 0..n {
                v[i] += 0.5 * tau * f[i];
            }
        }
    }
    if out.x.iter().chain(&out.v).any(|c| !c.is_finite()) {
        return Err(Error::StepSize("non-finite state; reduce dt".into()));
    }
    Ok(out)
}

/// Normalized mode sums `(⟨cos kx⟩, ⟨sin kx⟩)` at every force evaluation of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldHistory {
    pub tau: f64,
    pub sums: Vec<Vec<(f64, f64)>>,
}

/// Vlasov particle method: every sample of every replica moves in the field of the
/// pooled empirical density. Returns the samples and the field history.
pub fn evolve_vlasov(samples: &ClassicalEnsemble, phi: &TrigPotential, dt: f64, t_final: f64) -> Result<(ClassicalEnsemble, MeanFieldHistory)> {
    let m = samples.x.len();
    if m < MIN_VLASOV_SAMPLES && phi.active_modes().next().is_some() {
        return Err(Error::Sampling(format!("{m} samples are too few for the force estimate (need {MIN_VLASOV_SAMPLES})")));
    }
    let (steps, tau) = steps_for(dt, t_final)?;
    let mut out = samples.clone();
    let norm = |s: Vec<(f64, f64)>| s.into_iter().map(|(c, sn)| (c / m as f64, sn / m as f64)).collect::<Vec<_>>();
    let mut hist = MeanFieldHistory { tau, sums: vec![norm(mode_sums(phi, &out.x))] };
    for _ in 0..steps {
        let s0 = hist.sums.last().expect("initial field").clone();
        for (x, v) in out.x.iter_mut().zip(out.v.iter_mut()) {
            *v += 0.5 * tau * field_force(phi, &s0, 1.0, *x);
            *x += tau * *v;
        }
        let s1 = norm(mode_sums(phi, &out.x));
        for (x, v) in out.x.iter().zip(out.v.iter_mut()) {
            *v += 0.5 * tau * field_force(phi, &s1, 1.0, *x);
        }
        hist.sums.push(s1);
    }
    Ok((out, hist))
}

/// Pushes particles through a recorded mean field with the same Verlet steps.
pub fn push_in_field(ens: &ClassicalEnsemble, phi: &TrigPotential, hist: &MeanFieldHistory) -> ClassicalEnsemble {
    let tau = hist.tau;
    let mut out = ens.clone();
    for w in hist.sums.windows(2) {
        for (x, v) in out.x.iter_mut().zip(out.v.iter_mut()) {
            *v += 0.5 * tau * field_force(phi, &w[0], 1.0, *x);
            *x += tau * *v;
            *v += 0.5 * tau * field_force(phi, &w[1], 1.0, *x);
        }
    }
    out
}

/// Stratified product sample of the Gaussian `N(q, σx²) ⊗ N(p, σv²)`: the
/// inverse CDF at cell midpoints of an `m × m` grid of quantiles.
pub fn stratified_gaussian(q: f64, p: f64, sx: f64, sv: f64, m: usize) -> Result<ClassicalEnsemble> {
    use statrs::distribution::{ContinuousCDF, Normal};
    let unit = Normal::standard();
    let z: Vec<f64> = (0..m).map(|i| unit.inverse_cdf((i as f64 + 0.5) / m as f64)).collect();
    let (mut x, mut v) = (Vec::with_capacity(m * m), Vec::with_capacity(m * m));
    for a in &z {
        for b in &z {
            x.push(q + sx * a);
            v.push(p + sv * b);
        }
    }
    ClassicalEnsemble::new(1, x, v)
}
