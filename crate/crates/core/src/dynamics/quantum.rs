//! Quantum N-body evolution of ensembles of pure states by Strang-split spectral steps.

use std::f64::consts::PI;

use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use super::TrigPotential;
use crate::error::{Error, Result};
use crate::fft::{fft_axes, mode_of, unravel};
use crate::phase_space::operator::dx;
use crate::phase_space::{wigner_transform, CoherentPoint, DenseKernel, DensityOperator, PhaseFunction};
use crate::C64;

/// Largest phase advanced per grid mode in one sub-step.
pub const PHASE_LIMIT: f64 = PI / 4.0;

/// One weighted N-particle wavefunction on the grid `[n; N]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub weight: f64,
    pub psi: Vec<C64>,
}

/// Weighted mixture of N-particle pure states.
///
/// With `symmetrized`, each member stands for the uniform mixture of all its label
/// permutations; the Hamiltonian is symmetric, so only one representative is evolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumEnsemble {
    pub members: Vec<Member>,
    pub hbar: f64,
    pub particles: usize,
    pub n: usize,
    pub symmetrized: bool,
}

fn norm_sqr(psi: &[C64], cell: f64) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * cell
}

fn product_state(factors: &[&[C64]]) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.len());
        for a in &out {
            next.extend(f.iter().map(|b| a * b));
        }
        out = next;
    }
    out
}

fn multisets(kinds: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, kinds: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for k in start..kinds {
            cur.push(k);
            rec(k, kinds, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, kinds, size, &mut Vec::new(), &mut out);
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl QuantumEnsemble {
    pub fn new(members: Vec<Member>, hbar: f64, particles: usize, n: usize, symmetrized: bool) -> Result<Self> {
        if members.is_empty() || particles == 0 {
            return Err(Error::Domain("an ensemble needs members and particles".into()));
        }
        let len = n.pow(particles as u32);
        let cell = dx(n).powi(particles as i32);
        // Summation error of the grid norm grows like the square root of its length.
        let tol = 1e-12 * (len as f64).sqrt().max(1.0);
        for m in &members {
            if m.psi.len() != len {
                return Err(Error::Grid(format!("wavefunction length {} != {len}", m.psi.len())));
            }
            if !(m.weight >= 0.0) {
                return Err(Error::Domain("negative member weight".into()));
            }
            let nn = norm_sqr(&m.psi, cell);
            if (nn - 1.0).abs() > tol {
                return Err(Error::Domain(format!("member not normalized (|ψ|² = {nn})")));
            }
        }
        let w: f64 = members.iter().map(|m| m.weight).sum();
        if (w - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("weights sum to {w}")));
        }
        Ok(Self { members, hbar, particles, n, symmetrized })
    }

    /// Exact `N`-fold tensor power of the mixture `Σ w_m |P_m⟩⟨P_m|` of coherent
    /// states, one symmetrized member per multiset of labels.
    pub fn coherent_power(points: &[(f64, f64, f64)], hbar: f64, n: usize, particles: usize) -> Result<Self> {
        let states: Vec<Vec<C64>> = points.iter().map(|&(q, p, _)| CoherentPoint::new(q, p, hbar).state(n)).collect();
        let members = multisets(points.len(), particles)
            .into_iter()
            .map(|ms| {
                let mut counts = vec![0usize; points.len()];
                ms.iter().for_each(|&k| counts[k] += 1);
                let multinomial = factorial(particles) / counts.iter().map(|&c| factorial(c)).product::<f64>();
                let weight = multinomial * ms.iter().map(|&k| points[k].2).product::<f64>();
                let factors: Vec<&[C64]> = ms.iter().map(|&k| states[k].as_slice()).collect();
                Member { weight, psi: product_state(&factors) }
            })
            .filter(|m| m.weight > 0.0)
            .collect();
        Self::new(members, hbar, particles, n, true)
    }

    /// Single product state `ψ₁ ⊗ … ⊗ ψ_N`.
    pub fn product(factors: &[Vec<C64>], hbar: f64) -> Result<Self> {
        let n = factors.first().map(|f| f.len()).unwrap_or(0);
        let refs: Vec<&[C64]> = factors.iter().map(|f| f.as_slice()).collect();
        Self::new(vec![Member { weight: 1.0, psi: product_state(&refs) }], hbar, factors.len(), n, false)
    }

    pub fn norm_defect(&self) -> f64 {
        let cell = dx(self.n).powi(self.particles as i32);
        self.members.iter().map(|m| (norm_sqr(&m.psi, cell) - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Diagonal of the N-body potential `(1/2N) Σ_{k,l} Φ(x_k − x_l)` on the grid.
fn nbody_potential(phi: &TrigPotential, particles: usize, n: usize) -> Vec<f64> {
    let table: Vec<f64> = (0..n).map(|d| phi.value(d as f64 * dx(n))).collect();
    let len = n.pow(particles as u32);
    let mut ix = vec![0usize; particles];
    let scale = 1.0 / (2.0 * particles as f64);
    (0..len)
        .map(|i| {
            unravel(i, n, &mut ix);
            let mut s = 0.0;
            for k in 0..particles {
                for l in 0..particles {
                    s += table[(ix[k] + n - ix[l]) % n];
                }
            }
            s * scale
        })
        .collect()
}

/// Kinetic multipliers `e^{−iħ|k|²τ/2}` in FFT order.
fn kinetic_phases(particles: usize, n: usize, hbar: f64, tau: f64) -> Vec<C64> {
    let len = n.pow(particles as u32);
    let mut ix = vec![0usize; particles];
    (0..len)
        .map(|i| {
            unravel(i, n, &mut ix);
            let k2: f64 = ix.iter().map(|&a| (mode_of(a, n) as f64).powi(2)).sum();
            C64::from_polar(1.0, -hbar * k2 * tau / 2.0)
        })
        .collect()
}

/// Steps of size at most `|dt|` covering `t_final`, with the phase-resolution checks.
pub(crate) fn step_plan(dt: f64, t_final: f64, hbar: f64, n: usize, vmax: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !t_final.is_finite() {
        return Err(Error::StepSize(format!("dt must be positive, got {dt}")));
    }
    let steps = (t_final.abs() / dt).ceil() as usize;
    if steps == 0 {
        return Ok((0, 0.0));
    }
    let tau = t_final / steps as f64;
    let kmax = (n / 2) as f64;
    let kinetic = hbar * kmax * kmax * tau.abs() / 2.0;
    if kinetic >= PHASE_LIMIT {
        return Err(Error::StepSize(format!("kinetic phase {kinetic:.3} per step exceeds π/4; reduce dt")));
    }
    let potential = vmax * tau.abs() / (2.0 * hbar);
    if potential >= PHASE_LIMIT {
        return Err(Error::StepSize(format!("potential phase {potential:.3} per half step exceeds π/4; reduce dt")));
    }
    Ok((steps, tau))
}

/// Evolves every member under `H_N = Σ −ħ²Δ_k/2 + (1/2N) Σ_{k,l} Φ(x_k − x_l)`.
pub fn evolve_nbody_quantum(ens: &QuantumEnsemble, phi: &TrigPotential, dt: f64, t_final: f64) -> Result<QuantumEnsemble> {
    let (j, n, h) = (ens.particles, ens.n, ens.hbar);
    let v = nbody_potential(phi, j, n);
    let vmax = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let (steps, tau) = step_plan(dt, t_final, h, n, vmax)?;
    let mut out = ens.clone();
    if steps == 0 {
        return Ok(out);
    }
    let half: Vec<C64> = v.iter().map(|x| C64::from_polar(1.0, -x * tau / (2.0 * h))).collect();
    let kin = kinetic_phases(j, n, h, tau);
    let axes: Vec<usize> = (0..j).collect();
    let norm = 1.0 / n.pow(j as u32) as f64;
    for m in &mut out.members {
        let psi = &mut m.psi;
        for _ in 0..steps {
            psi.iter_mut().zip(&half).for_each(|(a, b)| *a *= b);
            fft_axes(psi, n, j, &axes, FftDirection::Forward);
            psi.iter_mut().zip(&kin).for_each(|(a, b)| *a *= b * norm);
            fft_axes(psi, n, j, &axes, FftDirection::Inverse);
            psi.iter_mut().zip(&half).for_each(|(a, b)| *a *= b);
        }
    }
    Ok(out)
}

/// Reduced kernel of one pure state onto the ordered slots `slots`.
fn reduce_member(psi: &[C64], particles: usize, n: usize, slots: &[usize]) -> Vec<C64> {
    let j = slots.len();
    let rest: Vec<usize> = (0..particles).filter(|s| !slots.contains(s)).collect();
    let (dk, dr) = (n.pow(j as u32), n.pow(rest.len() as u32));
    // gather into a (dk × dr) matrix with the kept slots as the row index
    let mut mat = vec![C64::new(0.0, 0.0); dk * dr];
    let mut ix = vec![0usize; particles];
    for (i, val) in psi.iter().enumerate() {
        unravel(i, n, &mut ix);
        let r = slots.iter().fold(0, |acc, &s| acc * n + ix[s]);
        let c = rest.iter().fold(0, |acc, &s| acc * n + ix[s]);
        mat[r * dr + c] = *val;
    }
    let w = dx(n).powi(rest.len() as i32);
    let mut out = vec![C64::new(0.0, 0.0); dk * dk];
    for a in 0..dk {
        let ra = &mat[a * dr..(a + 1) * dr];
        for b in a..dk {
            let rb = &mat[b * dr..(b + 1) * dr];
            let s: C64 = ra.iter().zip(rb).map(|(x, y)| x * y.conj()).sum::<C64>() * w;
            out[a * dk + b] = s;
            out[b * dk + a] = s.conj();
        }
    }
    out
}

fn ordered_tuples(particles: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..j {
        let mut next = Vec::new();
        for t in &out {
            for s in (0..particles).filter(|s| !t.contains(s)) {
                let mut u = t.clone();
                u.push(s);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// Reduced state onto the given slots, without label averaging.
pub fn reduced_state_on(ens: &QuantumEnsemble, slots: &[usize]) -> Result<DensityOperator> {
    let j = slots.len();
    if j == 0 || j > 2 || slots.iter().any(|&s| s >= ens.particles) {
        return Err(Error::Representation(format!("dense reduced states need 1 or 2 valid slots, got {slots:?}")));
    }
    let mut k = DenseKernel::zeros(j, ens.n);
    for m in &ens.members {
        let r = reduce_member(&m.psi, ens.particles, ens.n, slots);
        k.data.iter_mut().zip(&r).for_each(|(a, b)| *a += b * m.weight);
    }
    Ok(DensityOperator::dense(k, ens.hbar))
}

/// `j`-particle marginal `D^N_j`; symmetrized members are averaged over ordered slot tuples.
pub fn reduced_state(ens: &QuantumEnsemble, j: usize) -> Result<DensityOperator> {
    if j == 0 || j > 2 || j > ens.particles {
        return Err(Error::Representation(format!("dense reduced states are limited to j <= 2 (asked {j})")));
    }
    if !ens.symmetrized {
        return reduced_state_on(ens, &(0..j).collect::<Vec<_>>());
    }
    let tuples = ordered_tuples(ens.particles, j);
    let mut k = DenseKernel::zeros(j, ens.n);
    let w = 1.0 / tuples.len() as f64;
    for m in &ens.members {
        for t in &tuples {
            let r = reduce_member(&m.psi, ens.particles, ens.n, t);
            k.data.iter_mut().zip(&r).for_each(|(a, b)| *a += b * (m.weight * w));
        }
    }
    Ok(DensityOperator::dense(k, ens.hbar))
}

/// Wigner function of the `j`-particle marginal.
pub fn reduced_wigner(ens: &QuantumEnsemble, j: usize) -> Result<PhaseFunction> {
    wigner_transform(&reduced_state(ens, j)?)
}
