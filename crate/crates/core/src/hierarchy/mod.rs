//! Fourier-side BBGKY operators, free transport, truncated Dyson expansions and propagation audits.

pub mod audit;
pub mod dyson;
pub mod operators;
pub mod quadrature;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{sequence_norm, FourierPhaseFunction, PhaseGrid};

pub use audit::{audit_propagation_bounds, AuditSettings, InequalityStats, PropagationAudit};
pub use dyson::{
    dyson_partial_sum, dyson_term, interaction, lazy_dyson_values, transport, DysonExpansion, DysonSettings,
    LazyDatum,
};
pub use operators::{apply_c, apply_t, conjugated, free_transport, multiplier, BAND_TOL};
pub use quadrature::{gauss_legendre, simplex_rule};

/// Default storage cutoff `j_max`.
pub const DEFAULT_CUTOFF: usize = 4;
/// Largest admissible expansion order.
pub const MAX_ORDER: usize = 6;
/// Largest grid entry allowed in stored sequences.
pub const MAX_ENTRY_LEN: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    #[serde(rename = "NBody")]
    NBody,
    #[serde(rename = "Hartree")]
    Hartree,
    #[serde(rename = "HHN")]
    Hhn,
}

impl Flavor {
    pub fn name(&self) -> &'static str {
        match self {
            Flavor::NBody => "NBody",
            Flavor::Hartree => "Hartree",
            Flavor::Hhn => "HHN",
        }
    }
}

/// Particle number `N`, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Particles {
    Finite(usize),
    Infinite,
}

impl Particles {
    pub fn finite(&self) -> Option<usize> {
        match self {
            Particles::Finite(n) => Some(*n),
            Particles::Infinite => None,
        }
    }
}

/// Weight of `T_j` in a flavor's generator.
pub(crate) fn t_weight(flavor: Flavor, particles: Particles) -> f64 {
    match (flavor, particles) {
        (Flavor::NBody, Particles::Finite(n)) => 1.0 / n as f64,
        _ => 0.0,
    }
}

/// Weight of `C_{j+1}` in the equation for level `j`.
pub(crate) fn c_weight(flavor: Flavor, particles: Particles, j: usize) -> f64 {
    match (flavor, particles) {
        (Flavor::Hartree, _) | (_, Particles::Infinite) => 1.0,
        (_, Particles::Finite(n)) => {
            if j >= n {
                0.0
            } else {
                (n - j) as f64 / n as f64
            }
        }
    }
}

/// Whether a flavor's sequence closes on the first `len` levels.
pub(crate) fn closes(flavor: Flavor, particles: Particles, len: usize) -> bool {
    matches!((flavor, particles), (Flavor::NBody | Flavor::Hhn, Particles::Finite(n)) if len >= n)
}

/// Finite sequence `f_1, …, f_len` of Fourier phase functions, entry `j` on `j` particles.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchySequence {
    pub entries: Vec<FourierPhaseFunction>,
    pub cutoff: usize,
}

impl HierarchySequence {
    pub fn new(entries: Vec<FourierPhaseFunction>, cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::Domain("cutoff must be at least 1".into()));
        }
        if entries.len() > cutoff {
            return Err(Error::Domain(format!("{} entries exceed cutoff {cutoff}", entries.len())));
        }
        if let Some(first) = entries.first() {
            let base = first.grid.with_particles(1);
            for (i, e) in entries.iter().enumerate() {
                if e.grid.particles != i + 1 || e.grid.with_particles(1) != base {
                    return Err(Error::Grid(format!("entry {} is not on the {}-particle base grid", i + 1, i + 1)));
                }
                if e.coefficients.len() != e.grid.len() {
                    return Err(Error::Grid(format!("entry {} has the wrong length", i + 1)));
                }
            }
        }
        Ok(Self { entries, cutoff })
    }

    /// `f_j = f^{⊗j}` for `j ≤ min(cutoff, N)`.
    pub fn factorized(f: &FourierPhaseFunction, cutoff: usize, particles: Particles) -> Result<Self> {
        if f.grid.particles != 1 {
            return Err(Error::Domain("factorized data needs a one-particle function".into()));
        }
        let top = particles.finite().map_or(cutoff, |n| n.min(cutoff));
        let mut entries = vec![f.clone()];
        for j in 2..=top {
            let g = f.grid.with_particles(j);
            if g.len() > MAX_ENTRY_LEN {
                return Err(Error::Capacity(format!("entry {j} needs {} coefficients", g.len())));
            }
            let next = entries[j - 2].tensor(f)?;
            entries.push(next);
        }
        Self::new(entries, cutoff)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry `j` (1-based).
    pub fn entry(&self, j: usize) -> Option<&FourierPhaseFunction> {
        j.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    pub fn base_grid(&self) -> Option<PhaseGrid> {
        self.entries.first().map(|e| e.grid)
    }

    /// `‖f‖_{α,β}` over the stored entries.
    pub fn norm(&self, alpha: f64, beta: f64) -> Result<f64> {
        sequence_norm(&self.entries, alpha, beta)
    }

    pub fn truncated(&self, len: usize) -> Self {
        Self { entries: self.entries[..len.min(self.len())].to_vec(), cutoff: self.cutoff }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|e| FourierPhaseFunction::zeros(e.grid)).collect(),
            cutoff: self.cutoff,
        }
    }

    /// `self += w · other` on the common leading entries; `self` is truncated to them.
    pub fn add_scaled(&mut self, other: &Self, w: f64) {
        let len = self.len().min(other.len());
        self.entries.truncate(len);
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            for (x, y) in a.coefficients.iter_mut().zip(&b.coefficients) {
                *x += y * w;
            }
        }
    }
}

/// One factor string of the Dyson expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DysonString {
    /// Final time `t`.
    pub t: f64,
    /// `t_1 ≤ … ≤ t_n`.
    pub times: Vec<f64>,
    pub flavor: Flavor,
    /// Per factor, `0` selects `T^N` and `1` selects `C^N`; `None` keeps both.
    pub sigma: Option<Vec<u8>>,
}

impl DysonString {
    pub fn new(t: f64, times: Vec<f64>, flavor: Flavor, sigma: Option<Vec<u8>>) -> Result<Self> {
        let s = Self { t, times, flavor, sigma };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() || self.times.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("string times must be finite".into()));
        }
        let (lo, hi) = if self.t >= 0.0 { (0.0, self.t) } else { (self.t, 0.0) };
        if self.times.iter().any(|&x| x < lo || x > hi) {
            return Err(Error::Domain("string times must lie between 0 and t".into()));
        }
        let ordered = if self.t >= 0.0 {
            self.times.windows(2).all(|w| w[0] <= w[1])
        } else {
            self.times.windows(2).all(|w| w[0] >= w[1])
        };
        if !ordered {
            return Err(Error::Domain("string times must be ordered".into()));
        }
        if let Some(s) = &self.sigma {
            if s.len() != self.times.len() {
                return Err(Error::Domain(format!("sigma has {} entries for {} times", s.len(), self.times.len())));
            }
            if s.iter().any(|&b| b > 1) {
                return Err(Error::Domain("sigma entries must be 0 or 1".into()));
            }
            if self.flavor != Flavor::NBody && s.contains(&0) {
                return Err(Error::Domain(format!("{} strings have no T factors", self.flavor.name())));
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.times.len()
    }

    pub fn sigma_label(&self) -> String {
        match &self.sigma {
            Some(s) => s.iter().map(|b| char::from(b'0' + b)).collect(),
            None => "*".into(),
        }
    }
}

/// One row of the term-by-term dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub flavor: Flavor,
    pub n: usize,
    pub sigma: String,
    pub j: usize,
    pub beta_norm: f64,
    pub quadrature_order: usize,
}

pub const TERM_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TermRow {
    format_version: u32,
    flavor: Flavor,
    n: usize,
    sigma: String,
    j: usize,
    beta_norm: f64,
    quadrature_order: usize,
}

pub fn write_terms_csv(records: &[TermRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(TermRow {
            format_version: TERM_FORMAT_VERSION,
            flavor: r.flavor,
            n: r.n,
            sigma: r.sigma.clone(),
            j: r.j,
            beta_norm: r.beta_norm,
            quadrature_order: r.quadrature_order,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_terms_csv(path: impl AsRef<Path>) -> Result<Vec<TermRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize::<TermRow>() {
        let row = row?;
        if row.format_version != TERM_FORMAT_VERSION {
            return Err(Error::Io(format!("unsupported term format version {}", row.format_version)));
        }
        out.push(TermRecord {
            flavor: row.flavor,
            n: row.n,
            sigma: row.sigma,
            j: row.j,
            beta_norm: row.beta_norm,
            quadrature_order: row.quadrature_order,
        });
    }
    Ok(out)
}
