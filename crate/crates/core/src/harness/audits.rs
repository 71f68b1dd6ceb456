use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::StudyConfig;
use super::quantum::gauss_hermite_points;
use crate::constants::{
    hat_hbar, hbar_dependent_bound, hierarchy_norm_bound, interpolation_bound, remainder_bound, selected_bound, solve_beta0,
    RateParameters,
};
use crate::dynamics::TrigPotential;
use crate::error::{Error, Result};
use crate::hierarchy::{
    audit_propagation_bounds, dyson_partial_sum, AuditSettings, DysonSettings, Flavor, HierarchySequence,
    InequalityStats, Particles,
};
use crate::phase_space::{beta_norm, toeplitz_point_masses, wigner_fourier, FourierPhaseFunction};
use crate::transport_metrics::{dist1, distance_comparison, tilde_coupling, DiscreteMeasure};

const SLACK: f64 = 1e-9;

/// Tally of one family of inequalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub name: String,
    pub checks: usize,
    pub violations: usize,
    /// Largest `lhs − rhs`; 0 when nothing was checked.
    pub worst_slack: f64,
    pub unresolved: usize,
}

impl AuditEntry {
    fn new(name: &str) -> Self {
        Self { name: name.into(), checks: 0, violations: 0, worst_slack: f64::NEG_INFINITY, unresolved: 0 }
    }

    fn from_stats(name: &str, s: &InequalityStats) -> Self {
        Self {
            name: name.into(),
            checks: s.checks,
            violations: s.violations,
            worst_slack: s.worst_slack,
            unresolved: s.unresolved,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64) {
        self.checks += 1;
        let d = lhs - rhs;
        self.worst_slack = self.worst_slack.max(d);
        if !(d <= SLACK * rhs.abs().max(1.0)) {
            self.violations += 1;
        }
    }

    /// A predicate, recorded as slack −1 when it holds and +1 when it fails.
    fn holds(&mut self, ok: bool) {
        self.record(if ok { 0.0 } else { 2.0 }, 1.0);
    }

    fn finish(mut self) -> Self {
        if self.checks == 0 {
            self.worst_slack = 0.0;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub format_version: u32,
    pub seed: u64,
    pub entries: Vec<AuditEntry>,
}

impl AuditSummary {
    pub fn violations(&self) -> usize {
        self.entries.iter().map(|e| e.violations).sum()
    }

    pub fn entry(&self, name: &str) -> Option<&AuditEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Runs every inequality audit at the configured parameters. Report-only:
/// inequalities that fail are counted, never raised.
pub fn run_bound_audits(cfg: &StudyConfig) -> Result<AuditSummary> {
    cfg.validate()?;
    let phi = cfg.potential()?;
    let a = &cfg.audit;
    let (beta, bp) = (cfg.rates.beta, cfg.rates.beta_prime);
    let mut entries = Vec::new();

    let mut settings = AuditSettings::new(a.samples, a.hbar, beta, bp, a.t_range, cfg.seed);
    settings.points_per_axis = 16;
    let prop = audit_propagation_bounds(&phi, &settings)?;
    entries.push(AuditEntry::from_stats("propagation_transport", &prop.transport));
    entries.push(AuditEntry::from_stats("propagation_collision", &prop.collision));
    entries.push(AuditEntry::from_stats("propagation_pair", &prop.pair));

    let (norms, remainders) = dyson_audit(cfg, &phi)?;
    entries.push(norms);
    entries.push(remainders);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    entries.extend(distance_audit(a.measure_pairs, &mut rng)?);

    entries.extend(rate_logic_audit(cfg, &phi)?);
    Ok(AuditSummary {
        format_version: super::ROW_FORMAT_VERSION,
        seed: cfg.seed,
        entries: entries.into_iter().map(AuditEntry::finish).collect(),
    })
}

/// Sequence-norm growth and remainder estimates on a two-body Dyson sum of the
/// benchmark datum at `t = T/4`. Needs `ħ > 0`; at `ħ = 0` nothing is checked.
fn dyson_audit(cfg: &StudyConfig, phi: &TrigPotential) -> Result<(AuditEntry, AuditEntry)> {
    let a = &cfg.audit;
    let mut norms = AuditEntry::new("hierarchy_norm");
    let mut rem = AuditEntry::new("remainder");
    if a.hbar == 0.0 {
        return Ok((norms, rem));
    }
    let (beta, bp) = (cfg.rates.beta, cfg.rates.beta_prime);
    let points = gauss_hermite_points(&cfg.initial);
    let f1 = wigner_fourier(&toeplitz_point_masses(&points, a.hbar, a.points_per_axis)?)?;
    let f_norm = beta_norm(&f1, bp)?;
    let alpha = cfg.rates.alpha.unwrap_or(f_norm.ln() + LN_2);
    let particles = Particles::Finite(2);
    let seq = HierarchySequence::factorized(&f1, 2, particles)?;
    let mut s = DysonSettings::new(Flavor::NBody, particles, a.dyson_order, alpha, beta, bp);
    s.quadrature_order = a.quadrature_order;
    let (_, horizon) = solve_beta0(alpha, beta, bp, phi)?;
    let t = horizon / 4.0;
    let tau = t / horizon;
    let exp = dyson_partial_sum(&seq, &s, t, phi, a.hbar)?;
    let seq_norm = seq.norm(alpha, bp)?;
    norms.record(exp.sum.norm(alpha, beta)?, hierarchy_norm_bound(seq_norm, tau));
    for n0 in 0..s.order {
        for j in 1..=seq.len() {
            let grid = seq.entry(j).map(|e| e.grid).ok_or_else(|| Error::Internal("missing level".into()))?;
            let mut tail = FourierPhaseFunction::zeros(grid);
            for term in &exp.terms[n0 + 1..] {
                if let Some(e) = term.entry(j) {
                    tail.add_assign(e)?;
                }
            }
            match beta_norm(&tail, beta) {
                Ok(r) => rem.record(r, remainder_bound(alpha, j as u32, tau, n0 as u32, seq_norm)),
                Err(Error::UnresolvedNorm { .. }) => rem.unresolved += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok((norms, rem))
}

fn random_measure(rng: &mut ChaCha8Rng, support: Vec<[f64; 2]>) -> Result<DiscreteMeasure> {
    let w: Vec<f64> = support.iter().map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    DiscreteMeasure::new(support, w.iter().map(|x| x / s).collect())
}

fn random_point(rng: &mut ChaCha8Rng) -> [f64; 2] {
    [rng.random_range(0.0..2.0 * PI), rng.random_range(-2.0..2.0)]
}

/// `dist₁ ≤ min(L¹, MK₂)` on random pairs with partly shared supports, and the
/// coupling bound `dist₁ ≤ cost(π̃)` on common supports.
fn distance_audit(pairs: usize, rng: &mut ChaCha8Rng) -> Result<[AuditEntry; 2]> {
    let mut lemma = AuditEntry::new("distance_comparison");
    let mut coupling = AuditEntry::new("tilde_coupling");
    for _ in 0..pairs {
        let m = rng.random_range(2..=6usize);
        let base: Vec<[f64; 2]> = (0..m).map(|_| random_point(rng)).collect();
        let mut other: Vec<[f64; 2]> = base.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        while other.len() < 2 {
            other.push(random_point(rng));
        }
        let mu = random_measure(rng, base.clone())?;
        let nu = random_measure(rng, other)?;
        let r = distance_comparison(&mu, &nu)?;
        lemma.record(r.dist1, r.l1.min(r.mk2));
        let nu2 = random_measure(rng, base)?;
        let (_, cost) = tilde_coupling(&mu, &nu2)?;
        coupling.record(dist1(&mu, &nu2)?, cost);
    }
    Ok([lemma, coupling])
}

/// Monotonicity of comparison admissibility in `N`, the alternative's branch
/// selection, and `E ≥ B(ħ*), B(ĥ)`.
fn rate_logic_audit(cfg: &StudyConfig, phi: &TrigPotential) -> Result<[AuditEntry; 3]> {
    let a = &cfg.audit;
    let (beta, bp) = (cfg.rates.beta, cfg.rates.beta_prime);
    let mut adm = AuditEntry::new("comparison_admissibility");
    let mut branch = AuditEntry::new("alternative_branch");
    let mut interp = AuditEntry::new("interpolation_bound");
    let mut ns = a.particle_numbers.clone();
    ns.sort_by(f64::total_cmp);
    let times: Vec<f64> =
        [a.t_range.0.abs(), a.t_range.1.abs(), 0.5 * (a.t_range.0.abs() + a.t_range.1.abs())]
            .into_iter()
            .filter(|t| *t > 0.0)
            .collect();
    let hbars = if a.hbar > 0.0 { vec![0.01, 0.1, a.hbar, 1.0, 4.0] } else { vec![0.01, 0.1, 1.0, 4.0] };
    let point = |hbar: f64, t: f64, n: f64, j: u32| {
        let mut p = RateParameters::with_default_alpha(beta, bp, phi.clone(), hbar, j, t, n, 1.0);
        if let Some(al) = cfg.rates.alpha {
            p.alpha = al;
        }
        p
    };
    for &t in &times {
        for &hbar in &hbars {
            for j in [1u32, 2] {
                let flags: Vec<bool> = ns.iter().map(|&n| hbar_dependent_bound(&point(hbar, t, n, j)).admissible).collect();
                for w in flags.windows(2) {
                    adm.holds(!w[0] || w[1]);
                }
                for &n in &ns {
                    let p = point(hbar, t, n, j);
                    if let Ok(s) = selected_bound(&p) {
                        branch.holds(s.value <= s.mk_candidate);
                        match (s.branch, s.l1_candidate) {
                            ('a', Some(l1)) => {
                                branch.holds(s.value == l1.min(s.mk_candidate));
                                let hh = hat_hbar(n, j, t, phi.sup_norm())?;
                                branch.holds(hbar >= hh);
                            }
                            ('b', None) => branch.holds(s.value == s.mk_candidate),
                            _ => branch.holds(false),
                        }
                    }
                    if let Ok(ib) = interpolation_bound(&p, t) {
                        interp.record(ib.b_at_hbar_star, ib.e_bound);
                        interp.record(ib.b_at_hat_hbar, ib.e_bound);
                    }
                }
            }
        }
    }
    Ok([adm, branch, interp])
}
