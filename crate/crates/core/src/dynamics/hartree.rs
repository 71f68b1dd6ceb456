//! Hartree (mean-field) evolution of a 1-particle density operator.

use rustfft::FftDirection;

use super::quantum::step_plan;
use super::TrigPotential;
use crate::error::{Error, Result};
use crate::fft::{fft_axes, mode_of};
use crate::phase_space::operator::dx;
use crate::phase_space::{DenseKernel, DensityOperator, ProductMember, Representation};
use crate::C64;

/// Position density `ρ(x_a) = D(x_a, x_a)`.
pub fn position_density(d: &DensityOperator) -> Result<Vec<f64>> {
    if d.particles() != 1 {
        return Err(Error::Representation("Hartree states are 1-particle operators".into()));
    }
    let n = d.n();
    Ok(match &d.representation {
        Representation::Dense(k) => (0..n).map(|a| k.data[a * n + a].re).collect(),
        Representation::Ensemble { members, .. } => {
            let mut rho = vec![0.0; n];
            for m in members {
                rho.iter_mut().zip(&m.factors[0]).for_each(|(r, c)| *r += m.weight * c.norm_sqr());
            }
            rho
        }
    })
}

/// Mean field `(Φ ⋆ ρ)(x_a)` on the grid.
pub fn mean_field(phi: &TrigPotential, rho: &[f64]) -> Vec<f64> {
    let n = rho.len();
    let h = dx(n);
    let table: Vec<f64> = (0..n).map(|d| phi.value(d as f64 * h)).collect();
    (0..n).map(|a| (0..n).map(|b| table[(a + n - b) % n] * rho[b]).sum::<f64>() * h).collect()
}

/// `⟨−ħ²Δ/2⟩ + ½ ∫∫ Φ(x−y) ρ(x) ρ(y)`.
pub fn hartree_energy(d: &DensityOperator, phi: &TrigPotential) -> Result<f64> {
    let n = d.n();
    let h = d.hbar;
    let dense = d.to_dense()?;
    let a = dense.momentum_matrix();
    let kinetic: f64 = (0..n).map(|k| 0.5 * h * h * (mode_of(k, n) as f64).powi(2) * a[k * n + k].re).sum();
    let rho = position_density(d)?;
    let v = mean_field(phi, &rho);
    let inter = 0.5 * v.iter().zip(&rho).map(|(a, b)| a * b).sum::<f64>() * dx(n);
    Ok(kinetic + inter)
}

fn kinetic_state(psi: &mut [C64], phases: &[C64]) {
    let n = psi.len();
    fft_axes(psi, n, 1, &[0], FftDirection::Forward);
    psi.iter_mut().zip(phases).for_each(|(a, b)| *a *= b / n as f64);
    fft_axes(psi, n, 1, &[0], FftDirection::Inverse);
}

fn kinetic_kernel(k: &mut DenseKernel, phases: &[C64]) {
    let n = k.n;
    fft_axes(&mut k.data, n, 2, &[0], FftDirection::Forward);
    fft_axes(&mut k.data, n, 2, &[1], FftDirection::Inverse);
    let norm = 1.0 / (n * n) as f64;
    for a in 0..n {
        for b in 0..n {
            k.data[a * n + b] *= phases[a] * phases[b].conj() * norm;
        }
    }
    fft_axes(&mut k.data, n, 2, &[0], FftDirection::Inverse);
    fft_axes(&mut k.data, n, 2, &[1], FftDirection::Forward);
}

fn potential_kernel(k: &mut DenseKernel, v: &[f64], tau: f64, hbar: f64) {
    let n = k.n;
    let ph: Vec<C64> = v.iter().map(|x| C64::from_polar(1.0, -x * tau / (2.0 * hbar))).collect();
    for a in 0..n {
        for b in 0..n {
            k.data[a * n + b] *= ph[a] * ph[b].conj();
        }
    }
}

/// Evolves `i ħ ∂_t D = [−ħ²Δ/2 + Φ ⋆ ρ_D, D]` by Strang splitting; the mean field is
/// recomputed from the current density before each potential half step.
pub fn evolve_hartree(d: &DensityOperator, phi: &TrigPotential, dt: f64, t_final: f64) -> Result<DensityOperator> {
    if d.particles() != 1 {
        return Err(Error::Representation("Hartree evolution acts on 1-particle operators".into()));
    }
    let (n, h) = (d.n(), d.hbar);
    let vmax = phi.sup_norm() * d.trace().re.abs();
    let (steps, tau) = step_plan(dt, t_final, h, n, vmax)?;
    let phases: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, -h * (mode_of(k, n) as f64).powi(2) * tau / 2.0)).collect();
    let mut cur = d.clone();
    for _ in 0..steps {
        for stage in 0..2 {
            let v = mean_field(phi, &position_density(&cur)?);
            match &mut cur.representation {
                Representation::Dense(k) => potential_kernel(k, &v, tau, h),
                Representation::Ensemble { members, .. } => {
                    for m in members.iter_mut() {
                        m.factors[0].iter_mut().zip(&v).for_each(|(c, x)| *c *= C64::from_polar(1.0, -x * tau / (2.0 * h)));
                    }
                }
            }
            if stage == 0 {
                match &mut cur.representation {
                    Representation::Dense(k) => kinetic_kernel(k, &phases),
                    Representation::Ensemble { members, .. } => {
                        for m in members.iter_mut() {
                            kinetic_state(&mut m.factors[0], &phases);
                        }
                    }
                }
            }
        }
    }
    Ok(cur)
}

/// Free von Neumann evolution of a pure state, for reference.
pub fn free_state(psi: &[C64], hbar: f64, t: f64) -> Vec<C64> {
    let n = psi.len();
    let phases: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, -hbar * (mode_of(k, n) as f64).powi(2) * t / 2.0)).collect();
    let mut out = psi.to_vec();
    kinetic_state(&mut out, &phases);
    out
}

/// Ensemble with every member factor evolved freely for time `t`.
pub fn free_ensemble(members: &[ProductMember], hbar: f64, t: f64) -> Vec<ProductMember> {
    members
        .iter()
        .map(|m| ProductMember { weight: m.weight, factors: m.factors.iter().map(|f| free_state(f, hbar, t)).collect() })
        .collect()
}
