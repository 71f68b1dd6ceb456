use std::f64::consts::{E, PI};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::operators::{apply_c, apply_t, free_transport};
use crate::constants::c_phi;
use crate::dynamics::TrigPotential;
use crate::error::{Error, Result};
use crate::phase_space::{beta_norm, FourierPhaseFunction, PhaseGrid};

/// Absolute slack allowed before an inequality counts as violated (scaled by `max(1, rhs)`).
pub const AUDIT_SLACK: f64 = 1e-9;

/// Velocity half-width of the 32-point classical test grid.
const CLASSICAL_WINDOW: f64 = 6.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSettings {
    pub samples: usize,
    pub hbar: f64,
    pub beta: f64,
    pub beta_prime: f64,
    pub t_range: (f64, f64),
    pub seed: u64,
    /// Points per axis of the test grids.
    pub points_per_axis: usize,
}

impl AuditSettings {
    pub fn new(samples: usize, hbar: f64, beta: f64, beta_prime: f64, t_range: (f64, f64), seed: u64) -> Self {
        Self { samples, hbar, beta, beta_prime, t_range, seed, points_per_axis: 16 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InequalityStats {
    pub checks: usize,
    pub violations: usize,
    /// Largest `lhs − rhs`.
    pub worst_slack: f64,
    /// Largest `lhs / rhs` over checks with `rhs > 0`.
    pub worst_ratio: f64,
    /// Samples skipped because a norm or operator was not resolved on the grid.
    pub unresolved: usize,
}

impl InequalityStats {
    fn record(&mut self, lhs: f64, rhs: f64) {
        if self.checks == 0 {
            self.worst_slack = f64::NEG_INFINITY;
        }
        self.checks += 1;
        let d = lhs - rhs;
        self.worst_slack = self.worst_slack.max(d);
        if rhs > 0.0 {
            self.worst_ratio = self.worst_ratio.max(lhs / rhs);
        }
        if d > AUDIT_SLACK * rhs.max(1.0) {
            self.violations += 1;
        }
    }
}

/// Results for the free-transport, collision and pair-operator estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationAudit {
    pub settings: AuditSettings,
    pub transport: InequalityStats,
    pub collision: InequalityStats,
    pub pair: InequalityStats,
}

impl PropagationAudit {
    pub fn violations(&self) -> usize {
        self.transport.violations + self.collision.violations + self.pair.violations
    }
}

fn grid(j: usize, n: usize, hbar: f64) -> Result<PhaseGrid> {
    if hbar > 0.0 {
        PhaseGrid::lattice(j, n, hbar)
    } else {
        PhaseGrid::new(j, n, 2.0 * PI, CLASSICAL_WINDOW * n as f64 / 32.0)
    }
}

#[derive(Clone, Copy)]
struct Bump {
    q: f64,
    p: f64,
    sx: f64,
    sv: f64,
}

impl Bump {
    fn random(r: &mut ChaCha8Rng, classical: bool) -> Self {
        // Classical grids are not periodic in η, so the velocity profile must fit both windows.
        let (p, sv) = if classical { (0.1, 0.99..1.01) } else { (0.5, 0.45..0.8) };
        Self {
            q: PI + r.random_range(-1.0..1.0),
            p: r.random_range(-p..p),
            sx: r.random_range(0.95..1.25),
            sv: r.random_range(sv),
        }
    }

    fn fourier(&self, xi: f64, eta: f64) -> C64 {
        let a = -0.5 * (self.sx * self.sx * xi * xi + self.sv * self.sv * eta * eta);
        C64::from_polar(a.exp(), xi * self.q - eta * self.p)
    }
}

/// Random mixture of products of periodized Gaussians on `j` particles.
fn random_mixture(g: PhaseGrid, r: &mut ChaCha8Rng, classical: bool) -> FourierPhaseFunction {
    let j = g.particles;
    let comps = r.random_range(1..=3usize);
    let mut parts = Vec::with_capacity(comps);
    for _ in 0..comps {
        let w: f64 = r.random_range(0.2..1.0);
        let bumps: Vec<Bump> = (0..j).map(|_| Bump::random(r, classical)).collect();
        parts.push((w, bumps));
    }
    let total: f64 = parts.iter().map(|p| p.0).sum();
    FourierPhaseFunction::from_fn(g, |xi, eta| {
        parts
            .iter()
            .map(|(w, bumps)| bumps.iter().enumerate().map(|(s, b)| b.fourier(xi[s], eta[s])).product::<C64>() * *w)
            .sum::<C64>()
            / total
    })
}

fn unresolved(e: &Error) -> bool {
    matches!(e, Error::UnresolvedNorm { .. } | Error::Resolution(_))
}

/// Evaluates `(lhs, rhs)`; `None` when a norm or an operator is not resolved on the grid.
fn pair_of(lhs: Result<f64>, rhs: Result<f64>) -> Result<Option<(f64, f64)>> {
    match (lhs, rhs) {
        (Ok(a), Ok(b)) => Ok(Some((a, b))),
        (Err(e), _) | (_, Err(e)) if unresolved(&e) => Ok(None),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// Audits the three propagation estimates on random Gaussian mixtures.
///
/// Transport: `‖S_j(t) f‖_β ≤ ‖f‖_{β'}` for `|t| ≤ (β'−β)/β'` (`j = 1, 2`).
/// Collision: `‖S_1(−t) C_2 S_2(t) f‖_β ≤ (1+|t|) C_Φ⁰ ‖f‖_{β'} / (e(β'−β))`.
/// Pair: `‖S_2(−t) T_2 S_2(t) f‖_β ≤ 2(1+|t|) C_Φ^{β'}(t) ‖f‖_{β'} / (e(β'−β))`.
pub fn audit_propagation_bounds(phi: &TrigPotential, settings: &AuditSettings) -> Result<PropagationAudit> {
    let (beta, bp) = (settings.beta, settings.beta_prime);
    if !(beta > 0.0 && beta < bp) {
        return Err(Error::Precondition("need 0 < β < β'".into()));
    }
    let (t0, t1) = settings.t_range;
    if !(t0.is_finite() && t1.is_finite() && t0 <= t1) {
        return Err(Error::Domain("t_range must be an ordered finite interval".into()));
    }
    let classical = settings.hbar == 0.0;
    let n = settings.points_per_axis;
    let g1 = grid(1, if classical { 2 * n } else { n }, settings.hbar)?;
    let g2 = grid(2, if classical { 2 * n } else { n }, settings.hbar)?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let admissible = (bp - beta) / bp;
    let gap = bp - beta;
    let mut out = PropagationAudit {
        settings: settings.clone(),
        transport: InequalityStats::default(),
        collision: InequalityStats::default(),
        pair: InequalityStats::default(),
    };
    for _ in 0..settings.samples {
        let t = if t1 > t0 { rng.random_range(t0..=t1) } else { t0 };
        let f1 = random_mixture(g1, &mut rng, classical);
        let f2 = random_mixture(g2, &mut rng, classical);
        let ts = t.clamp(-admissible, admissible);
        for f in [&f1, &f2] {
            let lhs = free_transport(f, ts).and_then(|s| beta_norm(&s, beta));
            match pair_of(lhs, beta_norm(f, bp))? {
                Some((a, b)) => out.transport.record(a, b),
                None => out.transport.unresolved += 1,
            }
        }
        let rhs2 = beta_norm(&f2, bp);
        let coll = free_transport(&f2, t)
            .and_then(|s| apply_c(&s, phi, settings.hbar))
            .and_then(|c| free_transport(&c, -t))
            .and_then(|c| beta_norm(&c, beta));
        let kc = (1.0 + t.abs()) * c_phi(0.0, t, phi) / (E * gap);
        match pair_of(coll, rhs2.clone())? {
            Some((a, b)) => out.collision.record(a, kc * b),
            None => out.collision.unresolved += 1,
        }
        let pair = free_transport(&f2, t)
            .and_then(|s| apply_t(&s, phi, settings.hbar))
            .and_then(|c| free_transport(&c, -t))
            .and_then(|c| beta_norm(&c, beta));
        let kt = 2.0 * (1.0 + t.abs()) * c_phi(bp, t, phi) / (E * gap);
        match pair_of(pair, rhs2)? {
            Some((a, b)) => out.pair.record(a, kt * b),
            None => out.pair.unresolved += 1,
        }
    }
    for s in [&mut out.transport, &mut out.collision, &mut out.pair] {
        if s.checks == 0 {
            s.worst_slack = 0.0;
        }
    }
    Ok(out)
}
