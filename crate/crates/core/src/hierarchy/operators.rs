use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftDirection;

use crate::dynamics::TrigPotential;
use crate::error::{Error, Result};
use crate::fft::{fft_axes, mode_of};
use crate::phase_space::{FourierPhaseFunction, PhaseGrid};

/// Relative sup of the coefficients allowed on the outer ring of the band.
pub const BAND_TOL: f64 = 1e-9;

pub(crate) fn modes_of(mut idx: usize, n: usize, out: &mut [i64]) {
    for o in out.iter_mut().rev() {
        *o = mode_of(idx % n, n);
        idx /= n;
    }
}

/// Interaction multiplier `2 sin(ħ η h / 2)/ħ`, or its limit `η h` at `ħ = 0`.
#[inline]
pub fn multiplier(hbar: f64, eta: f64, h: f64) -> f64 {
    if hbar == 0.0 {
        eta * h
    } else {
        2.0 * (0.5 * hbar * eta * h).sin() / hbar
    }
}

fn check_torus(g: &PhaseGrid) -> Result<()> {
    if (g.period - 2.0 * PI).abs() > 1e-12 {
        return Err(Error::Grid(format!("hierarchy operators need period 2π, got {}", g.period)));
    }
    Ok(())
}

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar >= 0.0 && hbar.is_finite()) {
        return Err(Error::Domain(format!("hbar must be nonnegative, got {hbar}")));
    }
    Ok(())
}

fn sup(f: &FourierPhaseFunction) -> f64 {
    f.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Largest coefficient with some selected mode within `margin` of the band edge, relative to the sup.
fn ring_fraction(f: &FourierPhaseFunction, axes: std::ops::Range<usize>, margin: i64) -> f64 {
    let g = f.grid;
    let n = g.n();
    let h = n as i64 / 2;
    let total = sup(f);
    if total == 0.0 {
        return 0.0;
    }
    let mut m = vec![0i64; g.rank()];
    let mut worst = 0.0f64;
    for (i, c) in f.coefficients.iter().enumerate() {
        let a = c.norm();
        if a <= worst {
            continue;
        }
        modes_of(i, n, &mut m);
        if m[axes.clone()].iter().any(|&k| k < -h + margin || k >= h - margin) {
            worst = a;
        }
    }
    worst / total
}

/// Guard for operators shifting `ξ` by up to `shift` modes.
fn check_xi_band(f: &FourierPhaseFunction, shift: i64) -> Result<()> {
    let j = f.grid.particles;
    if shift as usize >= f.grid.n() / 2 {
        return Err(Error::Resolution(format!("potential mode {shift} does not fit the band")));
    }
    let r = ring_fraction(f, 0..j, shift);
    if r > BAND_TOL {
        return Err(Error::Resolution(format!("ξ-shift of {shift} reaches content of relative size {r:.3e}")));
    }
    Ok(())
}

/// Rejects a transport that would move content of a row `ξ` out through the `η` band edge.
fn check_eta_shift(f: &FourierPhaseFunction, t: f64) -> Result<()> {
    let g = f.grid;
    let (n, j) = (g.n(), g.particles);
    let h = n as i64 / 2;
    let total = sup(f);
    let mut m = vec![0i64; 2 * j];
    let mut worst = 0.0f64;
    for (i, c) in f.coefficients.iter().enumerate() {
        let a = c.norm();
        if a <= worst {
            continue;
        }
        modes_of(i, n, &mut m);
        let hit = (0..j).any(|r| {
            if m[r] == 0 {
                return false;
            }
            // Content moves toward the edge in the direction of `tξ`.
            let s = t * g.xi(m[r]) / g.d_eta();
            let w = s.abs().ceil() as i64;
            if s > 0.0 {
                m[j + r] >= h - w
            } else {
                m[j + r] < -h + w
            }
        });
        if hit {
            worst = a;
        }
    }
    if worst > BAND_TOL * total {
        return Err(Error::Resolution(format!(
            "free transport by {t} moves content of relative size {:.3e} across the η band edge",
            worst / total
        )));
    }
    Ok(())
}

/// Per-slot factor table indexed by `(ξ index, second index)`, flattened as `a * n + b`.
fn slot_table(n: usize, f: impl Fn(i64, usize) -> C64) -> Vec<C64> {
    let mut t = Vec::with_capacity(n * n);
    for a in 0..n {
        let m = mode_of(a, n);
        for b in 0..n {
            t.push(f(m, b));
        }
    }
    t
}

/// Multiplies each coefficient by `Π_r table[ix_r * n + ix_{j+r}]`.
fn apply_slot_table(data: &mut [C64], n: usize, j: usize, table: &[C64]) {
    let inner = n.pow(j as u32);
    let mut ix = vec![0usize; j];
    let mut w = vec![C64::new(0.0, 0.0); inner];
    let mut tmp = w.clone();
    for (q, chunk) in data.chunks_exact_mut(inner).enumerate() {
        crate::fft::unravel(q, n, &mut ix);
        // Kronecker product of the per-slot rows.
        w[..n].copy_from_slice(&table[ix[0] * n..ix[0] * n + n]);
        let mut len = n;
        for &a in &ix[1..] {
            let row = &table[a * n..a * n + n];
            for (p, &x) in w[..len].iter().enumerate() {
                for (b, &y) in row.iter().enumerate() {
                    tmp[p * n + b] = x * y;
                }
            }
            len *= n;
            w[..len].copy_from_slice(&tmp[..len]);
        }
        for (c, x) in chunk.iter_mut().zip(&w) {
            *c *= x;
        }
    }
}

/// `(−1)^{m_η} e^{−i η s(ξ)}` per slot, the factor relating samples at `v_b + s` to FFT output.
fn stagger_table(g: &PhaseGrid) -> Vec<C64> {
    let n = g.n();
    slot_table(n, |m, b| {
        let e = mode_of(b, n);
        let s = g.v_shift(m);
        let c = if s != 0.0 { C64::from_polar(1.0, -g.eta(e) * s) } else { C64::new(1.0, 0.0) };
        if e.rem_euclid(2) == 0 {
            c
        } else {
            -c
        }
    })
}

/// Maps Fourier coefficients to the mixed `(ξ, v)` representation, in place.
pub(crate) fn to_mixed(g: &PhaseGrid, data: &mut [C64]) {
    let (n, j) = (g.n(), g.particles);
    let s = 1.0 / n as f64;
    let table: Vec<C64> = stagger_table(g).iter().map(|c| c.conj() * s).collect();
    apply_slot_table(data, n, j, &table);
    let v_axes: Vec<usize> = (j..2 * j).collect();
    fft_axes(data, n, 2 * j, &v_axes, FftDirection::Inverse);
}

fn from_mixed(g: &PhaseGrid, data: &mut [C64]) {
    let (n, j) = (g.n(), g.particles);
    let v_axes: Vec<usize> = (j..2 * j).collect();
    fft_axes(data, n, 2 * j, &v_axes, FftDirection::Forward);
    apply_slot_table(data, n, j, &stagger_table(g));
}

/// Free transport `S(t)`: `f̃(ξ, η) ↦ f̃(ξ, η − tξ)`.
///
/// The shift is applied exactly on the velocity samples of the mixed
/// representation, which is band-limited interpolation in `η`. On lattice
/// grids this is the exact free quantum evolution. On other grids the call is
/// rejected when it would shift non-negligible content across the band edge.
pub fn free_transport(f: &FourierPhaseFunction, t: f64) -> Result<FourierPhaseFunction> {
    if t == 0.0 {
        return Ok(f.clone());
    }
    if !t.is_finite() {
        return Err(Error::Domain("transport time must be finite".into()));
    }
    let g = f.grid;
    let (n, j) = (g.n(), g.particles);
    if !g.stagger {
        check_eta_shift(f, t)?;
    }
    let mut data = f.coefficients.clone();
    to_mixed(&g, &mut data);
    let table = slot_table(n, |m, b| {
        if m == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::from_polar(1.0, g.xi(m) * t * (g.v(b) + g.v_shift(m)))
        }
    });
    apply_slot_table(&mut data, n, j, &table);
    from_mixed(&g, &mut data);
    Ok(FourierPhaseFunction { grid: g, coefficients: data })
}

/// For each potential mode `h`, the FFT index reached by shifting index `a` by `−h` (`usize::MAX` off band).
fn shift_tables(n: usize, pairs: &[(i64, f64)]) -> Vec<Vec<usize>> {
    pairs
        .iter()
        .map(|&(h, _)| (0..n).map(|a| crate::fft::index_of(mode_of(a, n) - h, n).unwrap_or(usize::MAX)).collect())
        .collect()
}

/// Collision operator `C_{j+1}`, mapping a `(j+1)`-particle function to `j` particles.
///
/// `out(ξ; η) = Σ_r Σ_h Φ̂(h) m(η_r, h) f(ξ − h e_r, h; η, 0)` with `m` from [`multiplier`].
pub fn apply_c(f: &FourierPhaseFunction, phi: &TrigPotential, hbar: f64) -> Result<FourierPhaseFunction> {
    check_hbar(hbar)?;
    let g = f.grid;
    check_torus(&g)?;
    let jp = g.particles;
    if jp < 2 {
        return Err(Error::Domain("apply_c needs at least two particles".into()));
    }
    let j = jp - 1;
    let out_grid = g.with_particles(j);
    let mut out = FourierPhaseFunction::zeros(out_grid);
    let pairs = phi.fourier_pairs();
    if pairs.is_empty() {
        return Ok(out);
    }
    check_xi_band(f, phi.max_mode() as i64)?;
    let n = g.n();
    let shifts = shift_tables(n, &pairs);
    let inner = n.pow(j as u32);
    let inner_src = inner * n;
    let mut ix = vec![0usize; j];
    let mut src = vec![0usize; jp];
    for r in 0..j {
        for (p, &(h, w)) in pairs.iter().enumerate() {
            let Some(e_new) = crate::fft::index_of(h, n) else { continue };
            // Multiplier over the η block, which depends on η_r only.
            let mult: Vec<f64> = (0..inner)
                .map(|e| {
                    let b = (e / n.pow((j - 1 - r) as u32)) % n;
                    w * multiplier(hbar, g.eta(mode_of(b, n)), h as f64)
                })
                .collect();
            for (q, chunk) in out.coefficients.chunks_exact_mut(inner).enumerate() {
                crate::fft::unravel(q, n, &mut ix);
                let a = shifts[p][ix[r]];
                if a == usize::MAX {
                    continue;
                }
                src[..j].copy_from_slice(&ix);
                src[r] = a;
                src[j] = e_new;
                let base = crate::fft::ravel(&src, n) * inner_src;
                // Source η block is (η, 0): stride n with the last slot at index 0.
                for (e, (c, m)) in chunk.iter_mut().zip(&mult).enumerate() {
                    *c += f.coefficients[base + e * n] * *m;
                }
            }
        }
    }
    Ok(out)
}

/// Pair operator `T_j`: `(1/2) Σ_{l≠r} Σ_h Φ̂(h) m(η_r − η_l, h) f(ξ − h e_r + h e_l; η)`.
pub fn apply_t(f: &FourierPhaseFunction, phi: &TrigPotential, hbar: f64) -> Result<FourierPhaseFunction> {
    check_hbar(hbar)?;
    let g = f.grid;
    check_torus(&g)?;
    let j = g.particles;
    let mut out = FourierPhaseFunction::zeros(g);
    let pairs = phi.fourier_pairs();
    if j < 2 || pairs.is_empty() {
        return Ok(out);
    }
    check_xi_band(f, phi.max_mode() as i64)?;
    let n = g.n();
    let minus = shift_tables(n, &pairs);
    let neg: Vec<(i64, f64)> = pairs.iter().map(|&(h, w)| (-h, w)).collect();
    let plus = shift_tables(n, &neg);
    let inner = n.pow(j as u32);
    let slot = |e: usize, r: usize| (e / n.pow((j - 1 - r) as u32)) % n;
    let mut ix = vec![0usize; j];
    for r in 0..j {
        for l in 0..j {
            if l == r {
                continue;
            }
            for (p, &(h, w)) in pairs.iter().enumerate() {
                let mult: Vec<f64> = (0..inner)
                    .map(|e| {
                        let d = g.eta(mode_of(slot(e, r), n)) - g.eta(mode_of(slot(e, l), n));
                        0.5 * w * multiplier(hbar, d, h as f64)
                    })
                    .collect();
                for (q, chunk) in out.coefficients.chunks_exact_mut(inner).enumerate() {
                    crate::fft::unravel(q, n, &mut ix);
                    let (ar, al) = (minus[p][ix[r]], plus[p][ix[l]]);
                    if ar == usize::MAX || al == usize::MAX {
                        continue;
                    }
                    let (sr, sl) = (ix[r], ix[l]);
                    ix[r] = ar;
                    ix[l] = al;
                    let base = crate::fft::ravel(&ix, n) * inner;
                    ix[r] = sr;
                    ix[l] = sl;
                    let source = &f.coefficients[base..base + inner];
                    for ((c, s), m) in chunk.iter_mut().zip(source).zip(&mult) {
                        *c += s * *m;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Interaction-picture operator `S(−τ) A S(τ)` for `A` one of [`apply_c`] or [`apply_t`].
pub fn conjugated(
    f: &FourierPhaseFunction,
    tau: f64,
    op: impl Fn(&FourierPhaseFunction) -> Result<FourierPhaseFunction>,
) -> Result<FourierPhaseFunction> {
    let moved = free_transport(f, tau)?;
    free_transport(&op(&moved)?, -tau)
}
