use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::operators::{apply_c, apply_t, free_transport, multiplier, to_mixed};
use super::quadrature::{gauss_legendre, simplex_rule};
use super::{
    c_weight, closes, t_weight, DysonString, Flavor, HierarchySequence, Particles, TermRecord, MAX_ORDER,
};
use crate::constants::solve_beta0;
use crate::dynamics::TrigPotential;
use crate::error::{Error, Result};
use crate::fft::index_of;
use crate::phase_space::{beta_norm, FourierPhaseFunction, PhaseGrid};

/// `S(t)` applied entrywise.
pub fn transport(f: &HierarchySequence, t: f64) -> Result<HierarchySequence> {
    let entries = f.entries.iter().map(|e| free_transport(e, t)).collect::<Result<Vec<_>>>()?;
    Ok(HierarchySequence { entries, cutoff: f.cutoff })
}

/// Interaction-picture generator `S(−τ) A S(τ)` with `A` the flavor's operator.
///
/// `select` restricts `A` to its `T` part (`Some(0)`) or its `C` part (`Some(1)`).
/// When the flavor does not close on the stored levels the top entry cannot be
/// formed and the output is one entry shorter.
#[allow(clippy::too_many_arguments)]
pub fn interaction(
    f: &HierarchySequence,
    tau: f64,
    flavor: Flavor,
    particles: Particles,
    phi: &TrigPotential,
    hbar: f64,
    select: Option<u8>,
) -> Result<HierarchySequence> {
    let len = f.len();
    let out_len = if closes(flavor, particles, len) { len } else { len.saturating_sub(1) };
    if out_len == 0 {
        return Err(Error::Capacity("no level left inside the storage cutoff".into()));
    }
    let moved = transport(f, tau)?;
    let use_t = select != Some(1);
    let use_c = select != Some(0);
    let mut entries = Vec::with_capacity(out_len);
    for j in 1..=out_len {
        let mut acc = FourierPhaseFunction::zeros(moved.entries[j - 1].grid);
        let wt = t_weight(flavor, particles);
        if use_t && wt != 0.0 && j >= 2 {
            let t = apply_t(&moved.entries[j - 1], phi, hbar)?;
            axpy(&mut acc, &t, wt);
        }
        let wc = c_weight(flavor, particles, j);
        if use_c && wc != 0.0 && j < len {
            let c = apply_c(&moved.entries[j], phi, hbar)?;
            axpy(&mut acc, &c, wc);
        }
        entries.push(free_transport(&acc, -tau)?);
    }
    Ok(HierarchySequence { entries, cutoff: f.cutoff })
}

fn axpy(acc: &mut FourierPhaseFunction, x: &FourierPhaseFunction, w: f64) {
    for (a, b) in acc.coefficients.iter_mut().zip(&x.coefficients) {
        *a += b * w;
    }
}

/// The string `S(t) Π_k S(−t_k) A S(t_k) f^in`, last time leftmost.
pub fn dyson_term(
    f_in: &HierarchySequence,
    s: &DysonString,
    phi: &TrigPotential,
    hbar: f64,
    particles: Particles,
) -> Result<HierarchySequence> {
    s.validate()?;
    let mut g = f_in.clone();
    for (k, &tk) in s.times.iter().enumerate() {
        let select = s.sigma.as_ref().map(|v| v[k]);
        g = interaction(&g, tk, s.flavor, particles, phi, hbar, select)?;
    }
    transport(&g, s.t)
}

/// Expansion controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DysonSettings {
    pub flavor: Flavor,
    pub particles: Particles,
    /// Highest order `K`.
    pub order: usize,
    pub quadrature_order: usize,
    pub alpha: f64,
    pub beta: f64,
    pub beta_prime: f64,
}

impl DysonSettings {
    pub fn new(flavor: Flavor, particles: Particles, order: usize, alpha: f64, beta: f64, beta_prime: f64) -> Self {
        Self { flavor, particles, order, quadrature_order: 4, alpha, beta, beta_prime }
    }

    fn check(&self, t: f64, phi: &TrigPotential) -> Result<f64> {
        if self.order > MAX_ORDER {
            return Err(Error::Domain(format!("expansion order {} exceeds {MAX_ORDER}", self.order)));
        }
        if self.flavor != Flavor::Hartree && self.particles == Particles::Finite(0) {
            return Err(Error::Domain("N must be positive".into()));
        }
        gauss_legendre(self.quadrature_order)?;
        let (_, horizon) = solve_beta0(self.alpha, self.beta, self.beta_prime, phi)?;
        if t.abs() >= horizon {
            return Err(Error::Horizon { t: t.abs(), horizon });
        }
        Ok(horizon)
    }
}

/// Truncated Dyson expansion and its per-term data.
#[derive(Debug, Clone)]
pub struct DysonExpansion {
    pub sum: HierarchySequence,
    /// `terms[n]`, the time-integrated order-`n` contribution.
    pub terms: Vec<HierarchySequence>,
    /// `‖terms[n]‖_{α,β}`.
    pub term_norms: Vec<f64>,
    pub horizon: f64,
    pub records: Vec<TermRecord>,
}

/// `Σ_{n≤K} ∫_{0≤t_1≤…≤t_n≤t} g_n(t, t_1, …, t_n)` by iterated Gauss–Legendre.
pub fn dyson_partial_sum(
    f_in: &HierarchySequence,
    settings: &DysonSettings,
    t: f64,
    phi: &TrigPotential,
    hbar: f64,
) -> Result<DysonExpansion> {
    let horizon = settings.check(t, phi)?;
    let rule = gauss_legendre(settings.quadrature_order)?;
    let mut terms = Vec::with_capacity(settings.order + 1);
    for n in 0..=settings.order {
        let g = nested(f_in, n, t, &rule, settings, phi, hbar)?;
        terms.push(transport(&g, t)?);
    }
    let mut sum = terms[0].clone();
    for term in &terms[1..] {
        sum.add_scaled(term, 1.0);
    }
    let mut term_norms = Vec::with_capacity(terms.len());
    let mut records = Vec::new();
    for (n, term) in terms.iter().enumerate() {
        let mut total = 0.0;
        for (i, e) in term.entries.iter().enumerate() {
            let b = beta_norm(e, settings.beta)?;
            total += (-settings.alpha * (i + 1) as f64).exp() * b;
            records.push(TermRecord {
                flavor: settings.flavor,
                n,
                sigma: "*".into(),
                j: i + 1,
                beta_norm: b,
                quadrature_order: settings.quadrature_order,
            });
        }
        term_norms.push(total);
    }
    Ok(DysonExpansion { sum, terms, term_norms, horizon, records })
}

/// `G_n(s) = ∫_0^s S(−u) A S(u) G_{n−1}(u) du`, `G_0 = f^in`.
fn nested(
    f_in: &HierarchySequence,
    n: usize,
    s: f64,
    rule: &[(f64, f64)],
    settings: &DysonSettings,
    phi: &TrigPotential,
    hbar: f64,
) -> Result<HierarchySequence> {
    if n == 0 {
        return Ok(f_in.clone());
    }
    let mut acc: Option<HierarchySequence> = None;
    for &(x, w) in rule {
        let u = s * x;
        let inner = nested(f_in, n - 1, u, rule, settings, phi, hbar)?;
        let step = interaction(&inner, u, settings.flavor, settings.particles, phi, hbar, None)?;
        match acc.as_mut() {
            None => {
                let mut z = step.zeros_like();
                z.add_scaled(&step, w * s);
                acc = Some(z);
            }
            Some(a) => a.add_scaled(&step, w * s),
        }
    }
    acc.ok_or_else(|| Error::Internal("empty quadrature rule".into()))
}

/// One-particle datum evaluated off the `η` lattice by band-limited interpolation.
#[derive(Debug, Clone)]
pub struct LazyDatum {
    grid: PhaseGrid,
    mixed: Vec<C64>,
}

impl LazyDatum {
    pub fn new(f: &FourierPhaseFunction) -> Result<Self> {
        if f.grid.particles != 1 {
            return Err(Error::Domain("lazy datum needs a one-particle function".into()));
        }
        let mut mixed = f.coefficients.clone();
        to_mixed(&f.grid, &mut mixed);
        Ok(Self { grid: f.grid, mixed })
    }

    pub fn grid(&self) -> PhaseGrid {
        self.grid
    }

    /// `f̃(ξ, η)` for integer `ξ` mode and real `η`; zero off the `ξ` band.
    pub fn eval(&self, xi: i64, eta: f64) -> C64 {
        let n = self.grid.n();
        let Some(a) = index_of(xi, n) else {
            return C64::new(0.0, 0.0);
        };
        let s = self.grid.v_shift(xi);
        let row = &self.mixed[a * n..(a + 1) * n];
        let mut acc = C64::new(0.0, 0.0);
        for (b, g) in row.iter().enumerate() {
            let v = self.grid.v(b) + s;
            acc += g * C64::from_polar(1.0, -eta * v);
        }
        acc
    }
}

struct Lazy<'a> {
    datum: &'a LazyDatum,
    flavor: Flavor,
    particles: Particles,
    pairs: Vec<(i64, f64)>,
    hbar: f64,
}

impl Lazy<'_> {
    /// `[A_k … A_1 f^in](ξ, η)` with `A_i = S(−t_i) A S(t_i)`.
    fn value(&self, times: &[f64], xi: &[i64], eta: &[f64]) -> C64 {
        let j = xi.len();
        let Some((&tk, rest)) = times.split_last() else {
            if let Particles::Finite(n) = self.particles {
                if j > n {
                    return C64::new(0.0, 0.0);
                }
            }
            return xi.iter().zip(eta).map(|(&x, &e)| self.datum.eval(x, e)).product();
        };
        let q: Vec<f64> = eta.iter().zip(xi).map(|(&e, &x)| e + tk * x as f64).collect();
        let mut acc = C64::new(0.0, 0.0);
        let wt = t_weight(self.flavor, self.particles);
        if wt != 0.0 && j >= 2 {
            let mut x2 = xi.to_vec();
            for r in 0..j {
                for l in 0..j {
                    if l == r || q[r] == q[l] {
                        continue;
                    }
                    for &(h, w) in &self.pairs {
                        x2[r] = xi[r] - h;
                        x2[l] = xi[l] + h;
                        let e2: Vec<f64> = q.iter().zip(&x2).map(|(&e, &x)| e - tk * x as f64).collect();
                        let m = multiplier(self.hbar, q[r] - q[l], h as f64);
                        acc += self.value(rest, &x2, &e2) * (0.5 * wt * w * m);
                    }
                    x2[r] = xi[r];
                    x2[l] = xi[l];
                }
            }
        }
        let wc = c_weight(self.flavor, self.particles, j);
        if wc != 0.0 {
            let mut x2 = xi.to_vec();
            x2.push(0);
            let mut q2 = q.clone();
            q2.push(0.0);
            for r in 0..j {
                if q[r] == 0.0 {
                    continue;
                }
                for &(h, w) in &self.pairs {
                    x2[r] = xi[r] - h;
                    x2[j] = h;
                    let e2: Vec<f64> = q2.iter().zip(&x2).map(|(&e, &x)| e - tk * x as f64).collect();
                    let m = multiplier(self.hbar, q[r], h as f64);
                    acc += self.value(rest, &x2, &e2) * (wc * w * m);
                }
                x2[r] = xi[r];
            }
        }
        acc
    }
}

/// Dyson terms of level `j` at the given points, with `f^in_j = (f^in)^{⊗j}` evaluated lazily.
///
/// Returns `values[n][p]` for `n = 0..=K`. Each point is a pair of `ξ` modes and real `η`
/// values on `j` slots. Cost grows like `(quadrature · levels · modes)^K` per point.
pub fn lazy_dyson_values(
    datum: &LazyDatum,
    settings: &DysonSettings,
    t: f64,
    phi: &TrigPotential,
    hbar: f64,
    points: &[(Vec<i64>, Vec<f64>)],
) -> Result<Vec<Vec<C64>>> {
    settings.check(t, phi)?;
    if points.iter().any(|(x, e)| x.len() != e.len() || x.is_empty()) {
        return Err(Error::Domain("lazy points need matching nonempty ξ and η".into()));
    }
    let lazy = Lazy { datum, flavor: settings.flavor, particles: settings.particles, pairs: phi.fourier_pairs(), hbar };
    let mut out = Vec::with_capacity(settings.order + 1);
    for n in 0..=settings.order {
        let rule = simplex_rule(n, t, settings.quadrature_order)?;
        let vals = points
            .iter()
            .map(|(xi, eta)| {
                let e: Vec<f64> = eta.iter().zip(xi).map(|(&e, &x)| e - t * x as f64).collect();
                rule.iter().map(|(times, w)| lazy.value(times, xi, &e) * *w).sum()
            })
            .collect();
        out.push(vals);
    }
    Ok(out)
}
