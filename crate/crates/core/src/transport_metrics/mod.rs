//! Exact discrete Monge–Kantorovich distances, the explicit coupling `π̃`, and
//! rasterization of phase-space densities into discrete measures.

pub mod simplex;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use simplex::{solve_transport, TransportSolution};


use crate::error::{Error, Result};
use crate::phase_space::io::FORMAT_VERSION;
use crate::phase_space::PhaseFunction;

/// Largest support handled by the exact LP.
pub const MAX_SUPPORT: usize = 400;

/// Probability measure on finitely many distinct phase-space points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub support: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(support: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() || support.is_empty() {
            return Err(Error::Domain("support and weights must be nonempty and of equal length".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Domain("weights must be nonnegative".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("weights sum to {s}, not 1")));
        }
        for i in 0..support.len() {
            for j in 0..i {
                if support[i] == support[j] {
                    return Err(Error::Domain(format!("repeated support point {:?}", support[i])));
                }
            }
        }
        Ok(Self { support, weights })
    }

    pub fn dirac(z: [f64; 2]) -> Self {
        Self { support: vec![z], weights: vec![1.0] }
    }

    /// Normalizes nonnegative masses to a probability measure.
    pub fn from_masses(support: Vec<[f64; 2]>, masses: Vec<f64>) -> Result<Self> {
        let s: f64 = masses.iter().sum();
        if !(s > 0.0) {
            return Err(Error::Domain("total mass must be positive".into()));
        }
        Self::new(support, masses.iter().map(|m| m / s).collect())
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn translate(&self, a: [f64; 2]) -> Self {
        Self {
            support: self.support.iter().map(|z| [z[0] + a[0], z[1] + a[1]]).collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["format_version", "x", "v", "weight"])?;
        for (z, m) in self.support.iter().zip(&self.weights) {
            wr.write_record(&[FORMAT_VERSION.to_string(), format!("{:.17e}", z[0]), format!("{:.17e}", z[1]), format!("{m:.17e}")])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let (mut support, mut weights) = (Vec::new(), Vec::new());
        for rec in rd.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Io("short CSV row".into()))?
                    .parse::<f64>()
                    .map_err(|e| Error::Io(e.to_string()))
            };
            if field(0)? as u32 != FORMAT_VERSION {
                return Err(Error::Io("unsupported format_version".into()));
            }
            support.push([field(1)?, field(2)?]);
            weights.push(field(3)?);
        }
        Self::new(support, weights)
    }
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn check_size(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    for m in [mu, nu] {
        if m.len() > MAX_SUPPORT {
            return Err(Error::Size(m.len()));
        }
    }
    Ok(())
}

/// Optimal transport with cost `c(z, z')`, returning the LP solution.
pub fn optimal_transport(mu: &DiscreteMeasure, nu: &DiscreteMeasure, c: impl Fn(&[f64; 2], &[f64; 2]) -> f64) -> Result<TransportSolution> {
    check_size(mu, nu)?;
    let cost: Vec<f64> = mu.support.iter().flat_map(|a| nu.support.iter().map(|b| c(a, b)).collect::<Vec<_>>()).collect();
    solve_transport(&mu.weights, &nu.weights, &cost)
}

pub fn dist1_cost(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    dist(a, b).min(1.0)
}

pub fn mk2_cost(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// `dist₁` with cost `min(1, |z − z'|)`.
pub fn dist1(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    Ok(optimal_transport(mu, nu, dist1_cost)?.value.max(0.0))
}

/// `dist₁` together with an optimal coupling as a dense row-major matrix.
pub fn dist1_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(f64, Vec<f64>)> {
    let sol = optimal_transport(mu, nu, dist1_cost)?;
    Ok((sol.value.max(0.0), sol.dense_plan(mu.len(), nu.len())))
}

/// Wasserstein distance of exponent 2.
pub fn mk2(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    Ok(optimal_transport(mu, nu, mk2_cost)?.value.max(0.0).sqrt())
}

/// The coupling `π̃ = diag(λ) + (μ−λ)⊗(ν−λ)/(1 − Σλ)` with `λ = min(μ, ν)`, and
/// its `dist₁` cost. Both measures must share the same support, in the same order.
pub fn tilde_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(Vec<f64>, f64)> {
    if mu.support != nu.support {
        return Err(Error::Domain("π̃ needs a common support".into()));
    }
    let m = mu.len();
    let lam: Vec<f64> = mu.weights.iter().zip(&nu.weights).map(|(a, b)| a.min(*b)).collect();
    let overlap: f64 = lam.iter().sum();
    let mut pi = vec![0.0; m * m];
    for i in 0..m {
        pi[i * m + i] = lam[i];
    }
    let rest = 1.0 - overlap;
    if rest > 0.0 {
        for i in 0..m {
            let a = mu.weights[i] - lam[i];
            if a == 0.0 {
                continue;
            }
            for j in 0..m {
                pi[i * m + j] += a * (nu.weights[j] - lam[j]) / rest;
            }
        }
    }
    let mut bound = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j && pi[i * m + j] != 0.0 {
                bound += pi[i * m + j] * dist1_cost(&mu.support[i], &mu.support[j]);
            }
        }
    }
    Ok((pi, bound))
}

/// `‖μ − ν‖_{L¹}` over the union of supports.
pub fn l1_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let mut used = vec![false; nu.len()];
    let mut s = 0.0;
    for (z, w) in mu.support.iter().zip(&mu.weights) {
        match nu.support.iter().position(|y| y == z) {
            Some(k) => {
                used[k] = true;
                s += (w - nu.weights[k]).abs();
            }
            None => s += w,
        }
    }
    s + nu.weights.iter().zip(&used).filter(|(_, u)| !**u).map(|(w, _)| w).sum::<f64>()
}

/// The three distances of the comparison lemma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub dist1: f64,
    pub mk2: f64,
    pub l1: f64,
    /// `dist₁ ≤ min(‖μ−ν‖_{L¹}, MK₂)` with `1e-10` slack.
    pub lemma_holds: bool,
}

pub fn distance_comparison(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DistanceReport> {
    let d1 = dist1(mu, nu)?;
    let d2 = mk2(mu, nu)?;
    let l1 = l1_distance(mu, nu);
    Ok(DistanceReport { dist1: d1, mk2: d2, l1, lemma_holds: d1 <= l1.min(d2) + 1e-10 })
}

/// Result of coarsening a density to at most `max_points` atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub measures: Vec<DiscreteMeasure>,
    /// Cells merged per axis.
    pub block: usize,
    /// Upper bound on the `dist₁` error introduced by moving mass to block centres.
    pub error_bound: f64,
    /// Mass lost to clamping negative grid values to zero, per input.
    pub clamped_mass: Vec<f64>,
}

/// Coarsens 1-particle densities on a common grid into discrete measures on a
/// common support of block centres, doubling the block size until the union of
/// occupied blocks has at most `max_points` atoms.
pub fn rasterize(fs: &[&PhaseFunction], max_points: usize) -> Result<Raster> {
    let first = fs.first().ok_or_else(|| Error::Domain("nothing to rasterize".into()))?;
    let g = first.grid;
    if g.particles != 1 || fs.iter().any(|f| f.grid.unstaggered() != g.unstaggered()) {
        return Err(Error::Grid("rasterization needs 1-particle functions on a common grid".into()));
    }
    let n = g.n();
    let mut clamped = Vec::new();
    let cells: Vec<Vec<f64>> = fs
        .iter()
        .map(|f| {
            clamped.push(f.values.iter().filter(|v| **v < 0.0).map(|v| -v).sum::<f64>() * g.cell_volume());
            f.values.iter().map(|v| v.max(0.0) * g.cell_volume()).collect()
        })
        .collect();
    let mut block = 1;
    loop {
        let nb = n.div_ceil(block);
        let mut masses = vec![vec![0.0; nb * nb]; cells.len()];
        for (k, c) in cells.iter().enumerate() {
            for (i, m) in c.iter().enumerate() {
                let (a, b) = (i / n, i % n);
                masses[k][(a / block) * nb + b / block] += m;
            }
        }
        let occupied: Vec<usize> = (0..nb * nb).filter(|&i| masses.iter().any(|m| m[i] > 0.0)).collect();
        if occupied.len() <= max_points || block >= n {
            let centre = |i: usize| {
                let (a, b) = (i / nb, i % nb);
                [(a as f64 * block as f64 + 0.5 * (block as f64 - 1.0)) * g.dx(), g.v(0) + (b as f64 * block as f64 + 0.5 * (block as f64 - 1.0)) * g.dv()]
            };
            let support: Vec<[f64; 2]> = occupied.iter().map(|&i| centre(i)).collect();
            let measures = masses
                .iter()
                .map(|m| DiscreteMeasure::from_masses(support.clone(), occupied.iter().map(|&i| m[i]).collect()))
                .collect::<Result<Vec<_>>>()?;
            let half_diag = 0.5 * (block as f64 - 1.0) * (g.dx().powi(2) + g.dv().powi(2)).sqrt();
            return Ok(Raster { measures, block, error_bound: half_diag.min(1.0), clamped_mass: clamped });
        }
        block *= 2;
    }
}
