use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{fft_axes, index_of, mode_of, unravel};

/// Periodic discretization of `(x, v)` phase space for `j` particles in one dimension.
///
/// Axis layout is row-major by `(x_1..x_j, v_1..v_j)`. The Fourier side uses
/// FFT ordering on every axis. When `stagger` is set, velocity samples for odd
/// `x`-modes sit half a cell higher, which is how the torus Wigner function of
/// a lattice operator is represented exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub particles: usize,
    pub points_per_axis: usize,
    pub period: f64,
    pub velocity_cutoff: f64,
    #[serde(default)]
    pub stagger: bool,
}

impl PhaseGrid {
    pub fn new(particles: usize, points_per_axis: usize, period: f64, velocity_cutoff: f64) -> Result<Self> {
        let g = Self { particles, points_per_axis, period, velocity_cutoff, stagger: false };
        g.validate()?;
        Ok(g)
    }

    /// Quantum lattice grid on the `2π` torus: `dv = ħ`, staggered.
    pub fn lattice(particles: usize, points_per_axis: usize, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Grid(format!("hbar must be positive, got {hbar}")));
        }
        let mut g = Self::new(particles, points_per_axis, 2.0 * PI, 0.5 * hbar * points_per_axis as f64)?;
        g.stagger = true;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points_per_axis;
        if self.particles == 0 {
            return Err(Error::Grid("particles must be positive".into()));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Grid(format!("points_per_axis must be a power of two >= 8, got {n}")));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::Grid("period must be positive".into()));
        }
        if !(self.velocity_cutoff > 0.0 && self.velocity_cutoff.is_finite()) {
            return Err(Error::Grid("velocity_cutoff must be positive".into()));
        }
        if self.stagger && (self.period - 2.0 * PI).abs() > 1e-12 {
            return Err(Error::Grid("staggered grids need period 2π".into()));
        }
        Ok(())
    }

    pub fn with_particles(&self, particles: usize) -> Self {
        Self { particles, ..*self }
    }

    pub fn unstaggered(&self) -> Self {
        Self { stagger: false, ..*self }
    }

    pub fn n(&self) -> usize {
        self.points_per_axis
    }

    pub fn rank(&self) -> usize {
        2 * self.particles
    }

    pub fn len(&self) -> usize {
        self.n().pow(self.rank() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.period / self.n() as f64
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.velocity_cutoff / self.n() as f64
    }

    /// Phase-space cell volume `(dx dv)^j`.
    pub fn cell_volume(&self) -> f64 {
        (self.dx() * self.dv()).powi(self.particles as i32)
    }

    pub fn x(&self, a: usize) -> f64 {
        a as f64 * self.dx()
    }

    pub fn v(&self, b: usize) -> f64 {
        -self.velocity_cutoff + b as f64 * self.dv()
    }

    /// Velocity offset applied to samples of `x`-mode `m`.
    pub fn v_shift(&self, m: i64) -> f64 {
        if self.stagger && m.rem_euclid(2) == 1 {
            0.5 * self.dv()
        } else {
            0.0
        }
    }

    pub fn xi(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.period
    }

    pub fn eta(&self, m: i64) -> f64 {
        m as f64 * PI / self.velocity_cutoff
    }

    pub fn d_eta(&self) -> f64 {
        PI / self.velocity_cutoff
    }

    /// Integer x-mode number and eta-mode number for every axis of flat Fourier index `idx`.
    pub fn mode_numbers(&self, idx: usize, out: &mut [i64]) {
        let mut ix = vec![0usize; self.rank()];
        unravel(idx, self.n(), &mut ix);
        for (o, i) in out.iter_mut().zip(ix) {
            *o = mode_of(i, self.n());
        }
    }

    /// Flat Fourier index of the given mode numbers, `None` if any is off band.
    pub fn fourier_index(&self, modes: &[i64]) -> Option<usize> {
        let n = self.n();
        let mut acc = 0usize;
        for &m in modes {
            acc = acc * n + index_of(m, n)?;
        }
        Some(acc)
    }

    /// Largest representable `|η|`.
    pub fn eta_max(&self) -> f64 {
        self.eta(self.n() as i64 / 2 - 1)
    }
}

/// Real grid values of a phase-space function on `j` particles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseFunction {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
}

impl PhaseFunction {
    pub fn new(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::Grid(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x_1..x_j, v_1..v_j)` at grid points (unstaggered grids only).
    pub fn from_fn(grid: PhaseGrid, f: impl Fn(&[f64], &[f64]) -> f64) -> Result<Self> {
        grid.validate()?;
        if grid.stagger {
            return Err(Error::Grid("sampling needs an unstaggered grid".into()));
        }
        let j = grid.particles;
        let mut ix = vec![0usize; 2 * j];
        let mut xs = vec![0.0; j];
        let mut vs = vec![0.0; j];
        let values = (0..grid.len())
            .map(|i| {
                unravel(i, grid.n(), &mut ix);
                for r in 0..j {
                    xs[r] = grid.x(ix[r]);
                    vs[r] = grid.v(ix[j + r]);
                }
                f(&xs, &vs)
            })
            .collect();
        Ok(Self { grid, values })
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Value at grid indices `(a_1..a_j, b_1..b_j)`.
    pub fn at(&self, ix: &[usize]) -> f64 {
        self.values[crate::fft::ravel(ix, self.grid.n())]
    }
}

/// Symplectic Fourier coefficients `f̃(ξ, η)` on the resolved band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierPhaseFunction {
    pub grid: PhaseGrid,
    pub coefficients: Vec<C64>,
}

impl FourierPhaseFunction {
    pub fn zeros(grid: PhaseGrid) -> Self {
        Self { grid, coefficients: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    /// Fills coefficients from a closure of `(ξ, η)` physical mode values.
    pub fn from_fn(grid: PhaseGrid, f: impl Fn(&[f64], &[f64]) -> C64) -> Self {
        let j = grid.particles;
        let mut m = vec![0i64; 2 * j];
        let mut xi = vec![0.0; j];
        let mut eta = vec![0.0; j];
        let coefficients = (0..grid.len())
            .map(|i| {
                grid.mode_numbers(i, &mut m);
                for r in 0..j {
                    xi[r] = grid.xi(m[r]);
                    eta[r] = grid.eta(m[j + r]);
                }
                f(&xi, &eta)
            })
            .collect();
        Self { grid, coefficients }
    }

    /// Coefficient at integer mode numbers `(m_ξ1..m_ξj, m_η1..m_ηj)`; zero off band.
    pub fn get(&self, modes: &[i64]) -> C64 {
        self.grid
            .fourier_index(modes)
            .map(|i| self.coefficients[i])
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coefficients {
            *c *= s;
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Grid("grid mismatch".into()));
        }
        let coefficients = self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, coefficients })
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Grid("grid mismatch".into()));
        }
        for (a, b) in self.coefficients.iter_mut().zip(&other.coefficients) {
            *a += b;
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Tensor product `f ⊗ g` on `j + k` particles.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let (a, b) = (self.grid, other.grid);
        if a.with_particles(1) != b.with_particles(1) {
            return Err(Error::Grid("grid mismatch".into()));
        }
        let (ja, jb) = (a.particles, b.particles);
        let grid = a.with_particles(ja + jb);
        let n = a.n();
        let mut out = Self::zeros(grid);
        let mut ix = vec![0usize; 2 * (ja + jb)];
        let mut ia = vec![0usize; 2 * ja];
        let mut ib = vec![0usize; 2 * jb];
        for (i, c) in out.coefficients.iter_mut().enumerate() {
            unravel(i, n, &mut ix);
            ia[..ja].copy_from_slice(&ix[..ja]);
            ia[ja..].copy_from_slice(&ix[ja + jb..2 * ja + jb]);
            ib[..jb].copy_from_slice(&ix[ja..ja + jb]);
            ib[jb..].copy_from_slice(&ix[2 * ja + jb..]);
            *c = self.coefficients[crate::fft::ravel(&ia, n)] * other.coefficients[crate::fft::ravel(&ib, n)];
        }
        Ok(out)
    }

    /// `j`-fold tensor power.
    pub fn tensor_power(&self, j: usize) -> Result<Self> {
        if self.grid.particles != 1 || j == 0 {
            return Err(Error::Domain("tensor power needs a 1-particle function and j >= 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..j {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    /// Maximum of `|f̃(ξ,η) − conj f̃(−ξ,−η)|`; zero for real physical functions.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let rank = self.grid.rank();
        let mut m = vec![0i64; rank];
        let mut neg = vec![0i64; rank];
        let mut worst: f64 = 0.0;
        for (i, c) in self.coefficients.iter().enumerate() {
            self.grid.mode_numbers(i, &mut m);
            for (a, b) in neg.iter_mut().zip(&m) {
                *a = -b;
            }
            if let Some(k) = self.grid.fourier_index(&neg) {
                worst = worst.max((c - self.coefficients[k].conj()).norm());
            }
        }
        worst
    }
}

fn stagger_factor(grid: &PhaseGrid, m: &[i64]) -> C64 {
    let j = grid.particles;
    let mut phase = 0.0;
    for r in 0..j {
        let s = grid.v_shift(m[r]);
        if s != 0.0 {
            phase -= grid.eta(m[j + r]) * s;
        }
    }
    C64::from_polar(1.0, phase)
}

/// Symplectic Fourier transform `f̃(ξ,η) ≈ ∫ e^{i(x·ξ − v·η)} f dx dv` by the trapezoid rule.
pub fn symplectic_fourier(f: &PhaseFunction) -> FourierPhaseFunction {
    let g = f.grid;
    let (n, j) = (g.n(), g.particles);
    let mut data: Vec<C64> = f.values.iter().map(|&v| C64::new(v, 0.0)).collect();
    let x_axes: Vec<usize> = (0..j).collect();
    let v_axes: Vec<usize> = (j..2 * j).collect();
    fft_axes(&mut data, n, 2 * j, &x_axes, FftDirection::Inverse);
    fft_axes(&mut data, n, 2 * j, &v_axes, FftDirection::Forward);
    let vol = g.cell_volume();
    let mut m = vec![0i64; 2 * j];
    for (i, c) in data.iter_mut().enumerate() {
        g.mode_numbers(i, &mut m);
        let sign: i64 = m[j..].iter().sum();
        let s = if sign.rem_euclid(2) == 0 { vol } else { -vol };
        *c *= s * stagger_factor(&g, &m);
    }
    FourierPhaseFunction { grid: g, coefficients: data }
}

/// Exact inverse of [`symplectic_fourier`] on the grid; imaginary residue is discarded.
pub fn inverse_symplectic_fourier(f: &FourierPhaseFunction) -> PhaseFunction {
    let (values, _) = inverse_symplectic_fourier_complex(f);
    PhaseFunction { grid: f.grid, values }
}

/// As [`inverse_symplectic_fourier`], also returning the largest discarded imaginary part.
pub fn inverse_symplectic_fourier_complex(f: &FourierPhaseFunction) -> (Vec<f64>, f64) {
    let g = f.grid;
    let (n, j) = (g.n(), g.particles);
    let vol = g.cell_volume();
    let total = (n as f64).powi(2 * j as i32);
    let mut m = vec![0i64; 2 * j];
    let mut data = f.coefficients.clone();
    for (i, c) in data.iter_mut().enumerate() {
        g.mode_numbers(i, &mut m);
        let sign: i64 = m[j..].iter().sum();
        let s = if sign.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        *c *= s / (vol * total) * stagger_factor(&g, &m).conj();
    }
    let x_axes: Vec<usize> = (0..j).collect();
    let v_axes: Vec<usize> = (j..2 * j).collect();
    fft_axes(&mut data, n, 2 * j, &x_axes, FftDirection::Forward);
    fft_axes(&mut data, n, 2 * j, &v_axes, FftDirection::Inverse);
    let imag = data.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    (data.iter().map(|c| c.re).collect(), imag)
}

/// Weighted sup `sup |f̃(ξ,η)| e^{ρ(|ξ|+|η|)}` with its maximizing flat index.
pub fn weighted_sup(f: &FourierPhaseFunction, rho: f64) -> (f64, usize) {
    let g = f.grid;
    let rank = g.rank();
    let j = g.particles;
    let mut m = vec![0i64; rank];
    let mut best = (0.0, 0usize);
    for (i, c) in f.coefficients.iter().enumerate() {
        let a = c.norm();
        if a == 0.0 {
            continue;
        }
        g.mode_numbers(i, &mut m);
        let w: f64 = (0..j).map(|r| g.xi(m[r]).abs() + g.eta(m[j + r]).abs()).sum();
        let val = a * (rho * w).exp();
        if val > best.0 {
            best = (val, i);
        }
    }
    best
}

/// Whether flat Fourier index `idx` touches the outer ring of the band on any axis.
pub fn on_band_boundary(g: &PhaseGrid, idx: usize) -> bool {
    let mut m = vec![0i64; g.rank()];
    g.mode_numbers(idx, &mut m);
    let h = g.n() as i64 / 2;
    m.iter().any(|&k| k <= -h || k >= h - 1)
}

/// The β-norm `‖f‖_ρ` restricted to the band.
///
/// Fails with [`Error::UnresolvedNorm`] when the maximizer sits on the band
/// boundary, since the value is then only a lower bound.
pub fn beta_norm(f: &FourierPhaseFunction, rho: f64) -> Result<f64> {
    let (val, idx) = weighted_sup(f, rho);
    if val > 0.0 && on_band_boundary(&f.grid, idx) {
        return Err(Error::UnresolvedNorm { lower_bound: val });
    }
    Ok(val)
}

/// `Σ_j e^{−αj} ‖f_j‖_β`, entry `j` being `fs[j-1]`.
pub fn sequence_norm(fs: &[FourierPhaseFunction], alpha: f64, beta: f64) -> Result<f64> {
    let mut s = 0.0;
    for (i, f) in fs.iter().enumerate() {
        s += (-alpha * (i + 1) as f64).exp() * beta_norm(f, beta)?;
    }
    Ok(s)
}

/// Fourier-side marginal: evaluate at `ξ = η = 0` on the traced slots.
pub fn fourier_marginal(f: &FourierPhaseFunction, k: usize) -> Result<FourierPhaseFunction> {
    let g = f.grid;
    let j = g.particles;
    if k > j || k == 0 {
        return Err(Error::Domain(format!("marginal onto {k} of {j} particles")));
    }
    let out_grid = g.with_particles(k);
    let mut out = FourierPhaseFunction::zeros(out_grid);
    let mut m = vec![0i64; 2 * k];
    let mut full = vec![0i64; 2 * j];
    for (i, c) in out.coefficients.iter_mut().enumerate() {
        out_grid.mode_numbers(i, &mut m);
        full.iter_mut().for_each(|x| *x = 0);
        full[..k].copy_from_slice(&m[..k]);
        full[j..j + k].copy_from_slice(&m[k..]);
        *c = f.get(&full);
    }
    Ok(out)
}

/// Physical-space marginal onto the first `k` particles.
pub fn marginal(f: &PhaseFunction, k: usize) -> Result<PhaseFunction> {
    let g = f.grid;
    let j = g.particles;
    if k > j || k == 0 {
        return Err(Error::Domain(format!("marginal onto {k} of {j} particles")));
    }
    let n = g.n();
    let out_grid = g.with_particles(k);
    let mut values = vec![0.0; out_grid.len()];
    let mut ix = vec![0usize; 2 * j];
    let mut ox = vec![0usize; 2 * k];
    let w = (g.dx() * g.dv()).powi((j - k) as i32);
    for (i, v) in f.values.iter().enumerate() {
        unravel(i, n, &mut ix);
        ox[..k].copy_from_slice(&ix[..k]);
        ox[k..].copy_from_slice(&ix[j..j + k]);
        values[crate::fft::ravel(&ox, n)] += v * w;
    }
    Ok(PhaseFunction { grid: out_grid, values })
}

/// Heat semigroup `e^{sΔ}` as the Fourier multiplier `e^{−s(|ξ|²+|η|²)}`.
pub fn heat_semigroup(f: &FourierPhaseFunction, s: f64) -> FourierPhaseFunction {
    let g = f.grid;
    let j = g.particles;
    let mut out = f.clone();
    let mut m = vec![0i64; 2 * j];
    for (i, c) in out.coefficients.iter_mut().enumerate() {
        g.mode_numbers(i, &mut m);
        let q: f64 = (0..j).map(|r| g.xi(m[r]).powi(2) + g.eta(m[j + r]).powi(2)).sum();
        *c *= (-s * q).exp();
    }
    out
}

/// Sanity helper: `true` when the band contains the mode `(m_ξ, m_η)` on every slot.
pub fn band_contains(g: &PhaseGrid, m: i64) -> bool {
    index_of(m, g.n()).is_some()
}
