use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use super::grid::{inverse_symplectic_fourier, FourierPhaseFunction, PhaseFunction, PhaseGrid};
use crate::error::{Error, Result};
use crate::fft::{fft_axes, index_of, mode_of, ravel, unravel};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Relative kernel energy allowed outside the representable diagonals.
pub const RESOLUTION_TOL: f64 = 1e-10;

/// Dense kernel `F(x, y)` of a `j`-particle operator on the position grid.
///
/// `(Fψ)(x_a) = Σ_b F_ab ψ(x_b) dx^j`, indices row-major over `(a_1..a_j, b_1..b_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseKernel {
    pub particles: usize,
    pub n: usize,
    pub data: Vec<C64>,
}

/// Weighted product pure state `ψ_1 ⊗ … ⊗ ψ_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductMember {
    pub weight: f64,
    pub factors: Vec<Vec<C64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Representation {
    Dense(DenseKernel),
    Ensemble { particles: usize, n: usize, members: Vec<ProductMember> },
}

/// Trace-class operator on `L²` of the `2π` torus, sampled on `n` points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOperator {
    pub representation: Representation,
    pub hbar: f64,
}

/// Phase-space point labelling the coherent state `|p, q⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentPoint {
    pub q: f64,
    pub p: f64,
    pub hbar: f64,
}

pub fn dx(n: usize) -> f64 {
    2.0 * PI / n as f64
}

impl CoherentPoint {
    pub fn new(q: f64, p: f64, hbar: f64) -> Self {
        Self { q, p, hbar }
    }

    /// Periodized Gaussian packet sampled on `n` points, normalized on the grid.
    pub fn state(&self, n: usize) -> Vec<C64> {
        let h = self.hbar;
        let images = 3 + (4.0 * h.sqrt()).ceil() as i64;
        let mut psi: Vec<C64> = (0..n)
            .map(|a| {
                let x = a as f64 * dx(n);
                (-images..=images)
                    .map(|w| {
                        let y = x - self.q + 2.0 * PI * w as f64;
                        C64::from_polar((-y * y / (2.0 * h)).exp(), self.p * y / h)
                    })
                    .sum()
            })
            .collect();
        normalize(&mut psi, dx(n));
        psi
    }

    /// Continuum Wigner function of the projector, `(πħ)^{-1} e^{−|z−z₀|²/ħ}`.
    pub fn wigner(&self, x: f64, v: f64) -> f64 {
        (-((x - self.q).powi(2) + (v - self.p).powi(2)) / self.hbar).exp() / (PI * self.hbar)
    }

    /// Continuum Husimi function of the projector, `(2πħ)^{-1} e^{−|z−z₀|²/2ħ}`.
    pub fn husimi(&self, x: f64, v: f64) -> f64 {
        (-((x - self.q).powi(2) + (v - self.p).powi(2)) / (2.0 * self.hbar)).exp() / (2.0 * PI * self.hbar)
    }
}

pub(crate) fn normalize(psi: &mut [C64], cell: f64) {
    let s = (psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * cell).sqrt();
    for c in psi.iter_mut() {
        *c /= s;
    }
}

/// Coefficients in the orthonormal basis `e^{ikx}/√(2π)`, FFT order in `k`.
pub fn momentum_coefficients(psi: &[C64]) -> Vec<C64> {
    let n = psi.len();
    let mut d = psi.to_vec();
    fft_axes(&mut d, n, 1, &[0], FftDirection::Forward);
    let s = dx(n) / (2.0 * PI).sqrt();
    d.iter_mut().for_each(|c| *c *= s);
    d
}

/// Inverse of [`momentum_coefficients`].
pub fn position_samples(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len();
    let mut d = coeffs.to_vec();
    fft_axes(&mut d, n, 1, &[0], FftDirection::Inverse);
    let s = 1.0 / (2.0 * PI).sqrt();
    d.iter_mut().for_each(|c| *c *= s);
    d
}

impl DenseKernel {
    pub fn zeros(particles: usize, n: usize) -> Self {
        Self { particles, n, data: vec![ZERO; n.pow(2 * particles as u32)] }
    }

    pub fn dim(&self) -> usize {
        self.n.pow(self.particles as u32)
    }

    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.data[a * self.dim() + b]
    }

    pub fn cell(&self) -> f64 {
        dx(self.n).powi(self.particles as i32)
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|a| self.data[a * d + a]).sum::<C64>() * self.cell()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in a..d {
                worst = worst.max((self.data[a * d + b] - self.data[b * d + a].conj()).norm());
            }
        }
        worst
    }

    /// Adds `w |ψ⟩⟨ψ|` for a (possibly multi-particle) grid wavefunction.
    pub fn add_pure(&mut self, w: f64, psi: &[C64]) {
        let d = self.dim();
        assert_eq!(psi.len(), d);
        for a in 0..d {
            let pa = psi[a] * w;
            let row = &mut self.data[a * d..(a + 1) * d];
            for (r, pb) in row.iter_mut().zip(psi) {
                *r += pa * pb.conj();
            }
        }
    }

    /// Cell-weighted matrix `F_ab dx^j`, the operator in the orthonormal grid basis.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        let c = self.cell();
        DMatrix::from_fn(d, d, |a, b| self.data[a * d + b] * c)
    }

    /// Momentum-basis matrix `a_{k,l}` (FFT order on every axis).
    pub fn momentum_matrix(&self) -> Vec<C64> {
        let (j, n) = (self.particles, self.n);
        let mut a = self.data.clone();
        let rows: Vec<usize> = (0..j).collect();
        let cols: Vec<usize> = (j..2 * j).collect();
        fft_axes(&mut a, n, 2 * j, &rows, FftDirection::Forward);
        fft_axes(&mut a, n, 2 * j, &cols, FftDirection::Inverse);
        let s = dx(n).powi(2 * j as i32) / (2.0 * PI).powi(j as i32);
        a.iter_mut().for_each(|c| *c *= s);
        a
    }

    pub fn from_momentum_matrix(particles: usize, n: usize, a: &[C64]) -> Self {
        let j = particles;
        let mut d = a.to_vec();
        let rows: Vec<usize> = (0..j).collect();
        let cols: Vec<usize> = (j..2 * j).collect();
        fft_axes(&mut d, n, 2 * j, &rows, FftDirection::Inverse);
        fft_axes(&mut d, n, 2 * j, &cols, FftDirection::Forward);
        let s = (2.0 * PI).powi(j as i32) / dx(n).powi(2 * j as i32) / (n as f64).powi(2 * j as i32);
        d.iter_mut().for_each(|c| *c *= s);
        Self { particles, n, data: d }
    }
}

fn product_state(factors: &[Vec<C64>]) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.len());
        for a in &out {
            for b in f {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

impl DensityOperator {
    pub fn dense(kernel: DenseKernel, hbar: f64) -> Self {
        Self { representation: Representation::Dense(kernel), hbar }
    }

    pub fn ensemble(particles: usize, n: usize, members: Vec<ProductMember>, hbar: f64) -> Result<Self> {
        for m in &members {
            if m.weight < 0.0 || m.factors.len() != particles || m.factors.iter().any(|f| f.len() != n) {
                return Err(Error::Representation("malformed ensemble member".into()));
            }
        }
        Ok(Self { representation: Representation::Ensemble { particles, n, members }, hbar })
    }

    /// Projector onto a single coherent state.
    pub fn coherent(z: CoherentPoint, n: usize) -> Self {
        let m = ProductMember { weight: 1.0, factors: vec![z.state(n)] };
        Self::ensemble(1, n, vec![m], z.hbar).expect("well formed")
    }

    pub fn particles(&self) -> usize {
        match &self.representation {
            Representation::Dense(k) => k.particles,
            Representation::Ensemble { particles, .. } => *particles,
        }
    }

    pub fn n(&self) -> usize {
        match &self.representation {
            Representation::Dense(k) => k.n,
            Representation::Ensemble { n, .. } => *n,
        }
    }

    pub fn trace(&self) -> C64 {
        match &self.representation {
            Representation::Dense(k) => k.trace(),
            Representation::Ensemble { members, n, .. } => members
                .iter()
                .map(|m| {
                    m.weight * m.factors.iter().map(|f| f.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx(*n)).product::<f64>()
                })
                .sum::<f64>()
                .into(),
        }
    }

    pub fn to_dense(&self) -> Result<DenseKernel> {
        match &self.representation {
            Representation::Dense(k) => Ok(k.clone()),
            Representation::Ensemble { particles, n, members } => {
                if *particles > 2 {
                    return Err(Error::Representation(format!("dense kernel for {particles} particles")));
                }
                let mut k = DenseKernel::zeros(*particles, *n);
                for m in members {
                    k.add_pure(m.weight, &product_state(&m.factors));
                }
                Ok(k)
            }
        }
    }

    /// Phase-space grid carrying the Wigner function of this operator.
    pub fn lattice_grid(&self) -> Result<PhaseGrid> {
        PhaseGrid::lattice(self.particles(), self.n(), self.hbar)
    }
}

/// Fourier side `f̃(ξ,η) = Σ_k a_{k,k+ξ} e^{−iħη·(k+ξ/2)}` from a momentum matrix.
fn wigner_fourier_from_momentum(j: usize, n: usize, hbar: f64, a: &[C64], tol: f64) -> Result<FourierPhaseFunction> {
    let grid = PhaseGrid::lattice(j, n, hbar)?;
    let dim = n.pow(j as u32);
    let h = (n / 2) as i64;
    let total: f64 = a.iter().map(|c| c.norm_sqr()).sum();
    // entries whose diagonal offset leaves (-n/2, n/2) in some coordinate
    let mut dropped = 0.0;
    {
        let (mut k, mut l) = (vec![0usize; j], vec![0usize; j]);
        for kf in 0..dim {
            unravel(kf, n, &mut k);
            for lf in 0..dim {
                unravel(lf, n, &mut l);
                if (0..j).any(|r| {
                    let d = mode_of(l[r], n) - mode_of(k[r], n);
                    d <= -h || d >= h
                }) {
                    dropped += a[kf * dim + lf].norm_sqr();
                }
            }
        }
    }
    let mut out = FourierPhaseFunction::zeros(grid);
    let mut kk = vec![0usize; j];
    let mut xs = vec![0usize; j];
    let mut ll = vec![0usize; j];
    let mut c = vec![ZERO; dim];
    for xi_flat in 0..dim {
        unravel(xi_flat, n, &mut xs);
        let xim: Vec<i64> = xs.iter().map(|&i| mode_of(i, n)).collect();
        if xim.iter().any(|&m| m <= -h) {
            continue;
        }
        for (kf, ck) in c.iter_mut().enumerate() {
            unravel(kf, n, &mut kk);
            let mut ok = true;
            for r in 0..j {
                match index_of(mode_of(kk[r], n) + xim[r], n) {
                    Some(l) => ll[r] = l,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            *ck = if ok { a[kf * dim + ravel(&ll, n)] } else { ZERO };
        }
        fft_axes(&mut c, n, j, &(0..j).collect::<Vec<_>>(), FftDirection::Forward);
        for (mf, v) in c.iter().enumerate() {
            unravel(mf, n, &mut kk);
            let phase: f64 = (0..j).map(|r| -PI * mode_of(kk[r], n) as f64 * xim[r] as f64 / n as f64).sum();
            out.coefficients[xi_flat * dim + mf] = v * C64::from_polar(1.0, phase);
        }
    }
    if total > 0.0 && dropped > tol * tol * total {
        return Err(Error::Resolution(format!(
            "relative kernel energy {:.3e} beyond the x-mode band; refine the grid",
            (dropped / total).sqrt()
        )));
    }
    Ok(out)
}

fn wigner_fourier_1p(psi: &[C64], hbar: f64, tol: f64) -> Result<FourierPhaseFunction> {
    let n = psi.len();
    let ph = momentum_coefficients(psi);
    let mut a = vec![ZERO; n * n];
    for k in 0..n {
        for l in 0..n {
            a[k * n + l] = ph[k] * ph[l].conj();
        }
    }
    wigner_fourier_from_momentum(1, n, hbar, &a, tol)
}

/// Exact lattice Fourier coefficients of the Wigner function of `d`.
pub fn wigner_fourier(d: &DensityOperator) -> Result<FourierPhaseFunction> {
    wigner_fourier_with_tolerance(d, RESOLUTION_TOL)
}

/// [`wigner_fourier`] with a caller-chosen bound on the relative kernel amplitude beyond the band.
pub fn wigner_fourier_with_tolerance(d: &DensityOperator, tol: f64) -> Result<FourierPhaseFunction> {
    match &d.representation {
        Representation::Dense(k) => wigner_fourier_from_momentum(k.particles, k.n, d.hbar, &k.momentum_matrix(), tol),
        Representation::Ensemble { particles, n, members } => {
            let grid = PhaseGrid::lattice(*particles, *n, d.hbar)?;
            // per distinct factor, the 1-particle transform
            let mut out = FourierPhaseFunction::zeros(grid);
            for m in members {
                let mut prod: Option<FourierPhaseFunction> = None;
                for f in &m.factors {
                    let w = wigner_fourier_1p(f, d.hbar, tol)?;
                    prod = Some(match prod {
                        None => w,
                        Some(p) => p.tensor(&w)?,
                    });
                }
                let mut p = prod.expect("at least one particle");
                p.scale(m.weight);
                out.add_assign(&p)?;
            }
            Ok(out)
        }
    }
}

/// Wigner function on the staggered lattice grid.
pub fn wigner_transform(d: &DensityOperator) -> Result<PhaseFunction> {
    Ok(inverse_symplectic_fourier(&wigner_fourier(d)?))
}

/// Rebuilds the dense kernel from lattice Fourier coefficients.
pub fn inverse_wigner_fourier(f: &FourierPhaseFunction, hbar: f64) -> Result<DensityOperator> {
    let g = f.grid;
    if !g.stagger || (g.dv() - hbar).abs() > 1e-12 * hbar {
        return Err(Error::Grid("inverse Wigner needs the staggered ħ-lattice grid".into()));
    }
    let (j, n) = (g.particles, g.n());
    if j > 2 {
        return Err(Error::Representation("dense kernels are limited to 2 particles".into()));
    }
    let dim = n.pow(j as u32);
    let h = (n / 2) as i64;
    let mut a = vec![ZERO; dim * dim];
    let mut xs = vec![0usize; j];
    let mut kk = vec![0usize; j];
    let mut ll = vec![0usize; j];
    let mut c = vec![ZERO; dim];
    for xi_flat in 0..dim {
        unravel(xi_flat, n, &mut xs);
        let xim: Vec<i64> = xs.iter().map(|&i| mode_of(i, n)).collect();
        if xim.iter().any(|&m| m <= -h) {
            continue;
        }
        for (mf, v) in c.iter_mut().enumerate() {
            unravel(mf, n, &mut kk);
            let phase: f64 = (0..j).map(|r| PI * mode_of(kk[r], n) as f64 * xim[r] as f64 / n as f64).sum();
            *v = f.coefficients[xi_flat * dim + mf] * C64::from_polar(1.0, phase) / dim as f64;
        }
        fft_axes(&mut c, n, j, &(0..j).collect::<Vec<_>>(), FftDirection::Inverse);
        for (kf, v) in c.iter().enumerate() {
            unravel(kf, n, &mut kk);
            let mut ok = true;
            for r in 0..j {
                match index_of(mode_of(kk[r], n) + xim[r], n) {
                    Some(l) => ll[r] = l,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                a[kf * dim + ravel(&ll, n)] = *v;
            }
        }
    }
    Ok(DensityOperator::dense(DenseKernel::from_momentum_matrix(j, n, &a), hbar))
}

pub fn inverse_wigner(w: &PhaseFunction, hbar: f64) -> Result<DensityOperator> {
    inverse_wigner_fourier(&super::grid::symplectic_fourier(w), hbar)
}

/// `e^{sΔ}W` evaluated on the unstaggered lattice grid through the exact Gaussian
/// velocity integral; `s = ħ/4` gives the Husimi function.
pub fn heat_mollified_wigner(d: &DensityOperator, s: f64) -> Result<PhaseFunction> {
    if s <= 0.0 {
        return Err(Error::Domain("heat time must be positive".into()));
    }
    let f = wigner_fourier(d)?;
    let g = f.grid;
    let (j, n, hbar) = (g.particles, g.n(), d.hbar);
    let dim = n.pow(j as u32);
    let out_grid = g.unstaggered();
    let norm = 1.0 / (4.0 * PI * s).sqrt();
    // Y[ξ][b] accumulates Σ_k c_{ξ,k} Π_r G(v_b − ħ(k+ξ/2)) e^{−sξ²}/(2π)
    let mut y = vec![ZERO; dim * dim];
    let mut xs = vec![0usize; j];
    let mut kk = vec![0usize; j];
    let mut c = vec![ZERO; dim];
    for xi_flat in 0..dim {
        unravel(xi_flat, n, &mut xs);
        let xim: Vec<i64> = xs.iter().map(|&i| mode_of(i, n)).collect();
        // recover c_{ξ,k} from the η samples
        for (mf, v) in c.iter_mut().enumerate() {
            unravel(mf, n, &mut kk);
            let phase: f64 = (0..j).map(|r| PI * mode_of(kk[r], n) as f64 * xim[r] as f64 / n as f64).sum();
            *v = f.coefficients[xi_flat * dim + mf] * C64::from_polar(1.0, phase) / dim as f64;
        }
        fft_axes(&mut c, n, j, &(0..j).collect::<Vec<_>>(), FftDirection::Inverse);
        // contract each slot's k with the Gaussian matrix
        let mut cur = c.clone();
        for r in 0..j {
            let xi = xim[r] as f64;
            let gmat: Vec<f64> = (0..n * n)
                .map(|idx| {
                    let (b, k) = (idx / n, idx % n);
                    let u = g.v(b) - hbar * (mode_of(k, n) as f64 + 0.5 * xi);
                    norm * (-u * u / (4.0 * s)).exp()
                })
                .collect();
            let stride = n.pow((j - 1 - r) as u32);
            let mut next = vec![ZERO; dim];
            let mut ix = vec![0usize; j];
            for (i, nx) in next.iter_mut().enumerate() {
                unravel(i, n, &mut ix);
                let b = ix[r];
                let base = i - b * stride;
                let mut acc = ZERO;
                for k in 0..n {
                    acc += cur[base + k * stride] * gmat[b * n + k];
                }
                *nx = acc;
            }
            cur = next;
        }
        let damp: f64 = xim.iter().map(|&m| (-s * (m * m) as f64).exp() / (2.0 * PI)).product();
        for (b, v) in cur.iter().enumerate() {
            y[xi_flat * dim + b] = v * damp;
        }
    }
    fft_axes(&mut y, n, 2 * j, &(0..j).collect::<Vec<_>>(), FftDirection::Forward);
    Ok(PhaseFunction { grid: out_grid, values: y.iter().map(|c| c.re).collect() })
}

/// Husimi function `(2πħ)^{-j} ⟨P_z|F|P_z⟩` on the unstaggered lattice grid.
///
/// One particle uses coherent-state matrix elements directly; more particles use
/// the heat-mollified Wigner function.
pub fn husimi(d: &DensityOperator) -> Result<PhaseFunction> {
    if d.particles() == 1 {
        husimi_direct(d)
    } else {
        heat_mollified_wigner(d, 0.25 * d.hbar)
    }
}

/// Direct coherent-state Husimi function for one particle.
pub fn husimi_direct(d: &DensityOperator) -> Result<PhaseFunction> {
    if d.particles() != 1 {
        return Err(Error::Representation("direct Husimi is implemented for one particle".into()));
    }
    let n = d.n();
    let grid = d.lattice_grid()?.unstaggered();
    let h = d.hbar;
    let pref = 1.0 / (2.0 * PI * h);
    let cell = dx(n);
    let mut values = vec![0.0; grid.len()];
    // states at q = x_a are cyclic shifts of the state at q = 0 when p is fixed
    for b in 0..n {
        let base = CoherentPoint::new(0.0, grid.v(b), h).state(n);
        for a in 0..n {
            let st: Vec<C64> = (0..n).map(|i| base[(i + n - a) % n]).collect();
            let val = match &d.representation {
                Representation::Dense(k) => {
                    let mut acc = ZERO;
                    for i in 0..n {
                        let mut row = ZERO;
                        for l in 0..n {
                            row += k.data[i * n + l] * st[l];
                        }
                        acc += st[i].conj() * row;
                    }
                    acc.re * cell * cell
                }
                Representation::Ensemble { members, .. } => members
                    .iter()
                    .map(|m| {
                        let ov: C64 = st.iter().zip(&m.factors[0]).map(|(p, f)| p.conj() * f).sum::<C64>() * cell;
                        m.weight * ov.norm_sqr()
                    })
                    .sum(),
            };
            values[a * n + b] = pref * val;
        }
    }
    Ok(PhaseFunction { grid, values })
}

/// Töplitz operator `(2πħ)^{-1} ∫ μ(q,p) |P_{q,p}⟩⟨P_{q,p}| dq dp` of a grid symbol,
/// with the symbol's grid cells acting as point masses.
pub fn toeplitz_quantize(mu: &PhaseFunction, hbar: f64) -> Result<DensityOperator> {
    let g = mu.grid;
    if g.particles != 1 || g.stagger || (g.period - 2.0 * PI).abs() > 1e-12 {
        return Err(Error::Grid("Töplitz symbols live on an unstaggered 1-particle 2π grid".into()));
    }
    if let Some(v) = mu.values.iter().find(|v| **v < 0.0) {
        return Err(Error::Domain(format!("negative symbol value {v}")));
    }
    let n = g.n();
    let mut k = DenseKernel::zeros(1, n);
    let w0 = g.dx() * g.dv() / (2.0 * PI * hbar);
    for b in 0..n {
        let base = CoherentPoint::new(0.0, g.v(b), hbar).state(n);
        for a in 0..n {
            let w = mu.values[a * n + b] * w0;
            if w == 0.0 {
                continue;
            }
            let st: Vec<C64> = (0..n).map(|i| base[(i + n - a) % n]).collect();
            k.add_pure(w, &st);
        }
    }
    Ok(DensityOperator::dense(k, hbar))
}

/// Töplitz state of a probability measure made of point masses: `Σ w_m |P_m⟩⟨P_m|`.
///
/// This is the Töplitz operator of the symbol `(2πħ) Σ w_m δ_{z_m}`.
pub fn toeplitz_point_masses(points: &[(f64, f64, f64)], hbar: f64, n: usize) -> Result<DensityOperator> {
    if points.iter().any(|p| p.2 < 0.0) {
        return Err(Error::Domain("negative point mass".into()));
    }
    let members = points
        .iter()
        .map(|&(q, p, w)| ProductMember { weight: w, factors: vec![CoherentPoint::new(q, p, hbar).state(n)] })
        .collect();
    DensityOperator::ensemble(1, n, members, hbar)
}

/// Partial trace of a dense kernel over its last `j − k` particles.
pub fn partial_trace(d: &DensityOperator, k: usize) -> Result<DensityOperator> {
    let j = d.particles();
    if k == 0 || k > j {
        return Err(Error::Domain(format!("partial trace onto {k} of {j} particles")));
    }
    match &d.representation {
        Representation::Ensemble { n, members, .. } => {
            let ms = members
                .iter()
                .map(|m| {
                    let rest: f64 = m.factors[k..].iter().map(|f| f.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx(*n)).product();
                    ProductMember { weight: m.weight * rest, factors: m.factors[..k].to_vec() }
                })
                .collect();
            DensityOperator::ensemble(k, *n, ms, d.hbar)
        }
        Representation::Dense(ker) => {
            let n = ker.n;
            let (dk, dr) = (n.pow(k as u32), n.pow((j - k) as u32));
            let dj = dk * dr;
            let mut out = DenseKernel::zeros(k, n);
            let w = dx(n).powi((j - k) as i32);
            for a in 0..dk {
                for b in 0..dk {
                    let mut acc = ZERO;
                    for c in 0..dr {
                        acc += ker.data[(a * dr + c) * dj + b * dr + c];
                    }
                    out.data[a * dk + b] = acc * w;
                }
            }
            Ok(DensityOperator::dense(out, d.hbar))
        }
    }
}

/// Sum of absolute eigenvalues of the cell-weighted kernel.
pub fn trace_norm(k: &DenseKernel) -> Result<f64> {
    let m = k.to_matrix();
    let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let defect = (&m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if defect > 1e-10 * scale.max(1.0) {
        return Err(Error::Domain(format!("kernel is not Hermitian (defect {defect:.3e})")));
    }
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Eigenvalues of the cell-weighted kernel, ascending.
pub fn eigenvalues(k: &DenseKernel) -> Vec<f64> {
    let m = k.to_matrix();
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut v: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}
