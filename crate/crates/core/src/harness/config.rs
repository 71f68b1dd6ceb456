use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::TrigPotential;
use crate::error::{Error, Result};

fn default_seed() -> u64 {
    7
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Experiment configuration, read from a TOML file with one table per concern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Wall-clock timings in the rows; off keeps outputs byte-identical across runs.
    #[serde(default)]
    pub record_runtime: bool,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub rates: RatesConfig,
    #[serde(default)]
    pub quantum: QuantumConfig,
    #[serde(default)]
    pub classical: ClassicalConfig,
    #[serde(default)]
    pub audit: AuditConfig,
}

impl Default for StudyConfig {
    /// The benchmark setup.
    fn default() -> Self {
        Self {
            seed: default_seed(),
            output_dir: default_output(),
            record_runtime: false,
            potential: PotentialConfig::default(),
            initial: InitialConfig::default(),
            rates: RatesConfig::default(),
            quantum: QuantumConfig::default(),
            classical: ClassicalConfig::default(),
            audit: AuditConfig::default(),
        }
    }
}

/// `Φ(x) = Σ c_k cos(kx)` as `[k, c_k]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    pub modes: Vec<(u32, f64)>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self { modes: vec![(1, 0.1)] }
    }
}

/// Periodized Gaussian `f^in` centred at `(q, p)` with standard deviation `width` in `x` and `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub q: f64,
    pub p: f64,
    pub width: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { q: std::f64::consts::PI, p: 0.0, width: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesConfig {
    pub beta: f64,
    pub beta_prime: f64,
    /// Defaults to `log ‖f^in‖_{β'} + log 2`.
    pub alpha: Option<f64>,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self { beta: 0.25, beta_prime: 0.5, alpha: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantumConfig {
    pub hbar: Vec<f64>,
    pub particles: Vec<usize>,
    pub marginals: Vec<usize>,
    /// Times as fractions of the horizon `T`.
    pub times: Vec<f64>,
    pub points_per_axis: usize,
    /// Largest step of the split-step solvers.
    pub dt: f64,
    /// Relative kernel amplitude allowed beyond the Wigner band.
    pub wigner_tolerance: f64,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        Self {
            hbar: vec![1.0, 0.5, 0.25],
            particles: vec![2, 3, 4],
            marginals: vec![1],
            times: vec![0.125, 0.25],
            points_per_axis: 32,
            dt: 0.002,
            wigner_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalConfig {
    pub particles: Vec<usize>,
    pub replicas: usize,
    /// Replicas simulated together.
    pub batch: usize,
    /// Times as fractions of the horizon `T`.
    pub times: Vec<f64>,
    /// Verlet steps per run.
    pub steps: usize,
    /// The reference Vlasov field uses a stratified `m × m` sample.
    pub reference_samples: usize,
    /// Largest `|ξ|` and `|η|/eta_step` of the estimated modes.
    pub modes: u32,
    pub eta_step: f64,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self {
            particles: vec![8, 32, 128],
            replicas: 1_000_000,
            batch: 4096,
            times: vec![0.25],
            steps: 8,
            reference_samples: 1000,
            modes: 3,
            eta_step: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    pub samples: usize,
    pub hbar: f64,
    /// Interval of audited times.
    pub t_range: (f64, f64),
    /// Dyson order of the hierarchy-norm and remainder audits.
    pub dyson_order: usize,
    pub quadrature_order: usize,
    /// Lattice of the Dyson audits.
    pub points_per_axis: usize,
    /// Random measure pairs for the distance comparison.
    pub measure_pairs: usize,
    /// Particle numbers of the comparison and alternative checks.
    pub particle_numbers: Vec<f64>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            hbar: 0.5,
            t_range: (-0.5, 0.5),
            dyson_order: 3,
            quadrature_order: 4,
            points_per_axis: 32,
            measure_pairs: 100,
            particle_numbers: vec![1e3, 1e6, 1e9, 1e12, 1e20],
        }
    }
}

impl StudyConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn potential(&self) -> Result<TrigPotential> {
        TrigPotential::new(self.potential.modes.iter().copied())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |k: &str, why: &str| Err(Error::Config(format!("`{k}`: {why}")));
        let r = &self.rates;
        if !(r.beta > 0.0 && r.beta < r.beta_prime) {
            return bad("rates.beta", "need 0 < beta < beta_prime");
        }
        if !(self.initial.width > 0.0) {
            return bad("initial.width", "must be positive");
        }
        let q = &self.quantum;
        for (k, empty) in [
            ("quantum.hbar", q.hbar.is_empty()),
            ("quantum.particles", q.particles.is_empty()),
            ("quantum.marginals", q.marginals.is_empty()),
            ("quantum.times", q.times.is_empty()),
            ("classical.particles", self.classical.particles.is_empty()),
            ("classical.times", self.classical.times.is_empty()),
            ("audit.particle_numbers", self.audit.particle_numbers.is_empty()),
        ] {
            if empty {
                return bad(k, "list must be nonempty");
            }
        }
        if q.hbar.iter().any(|&h| !(h > 0.0)) {
            return bad("quantum.hbar", "entries must be positive");
        }
        if q.particles.iter().any(|&n| !(2..=4).contains(&n)) {
            return bad("quantum.particles", "entries must lie in 2..=4");
        }
        if q.marginals.iter().any(|&j| j == 0 || j > 2) {
            return bad("quantum.marginals", "entries must be 1 or 2");
        }
        for (k, ts) in [("quantum.times", &q.times), ("classical.times", &self.classical.times)] {
            if ts.iter().any(|&t| !(t.abs() < 1.0)) {
                return bad(k, "fractions of the horizon must lie in (-1, 1)");
            }
        }
        if !(q.dt > 0.0) || !(q.wigner_tolerance > 0.0) {
            return bad("quantum.dt", "dt and wigner_tolerance must be positive");
        }
        let c = &self.classical;
        if c.particles.iter().any(|&n| n == 0 || n > 128) {
            return bad("classical.particles", "entries must lie in 1..=128");
        }
        if c.replicas < 2 || c.batch == 0 || c.steps == 0 || c.reference_samples < 100 || c.modes == 0 {
            return bad("classical", "replicas >= 2, batch, steps, modes > 0 and reference_samples >= 100 required");
        }
        if !(c.eta_step > 0.0) {
            return bad("classical.eta_step", "must be positive");
        }
        let a = &self.audit;
        if !(a.hbar >= 0.0) || !(a.t_range.0 <= a.t_range.1) {
            return bad("audit", "hbar must be nonnegative and t_range ordered");
        }
        if a.particle_numbers.iter().any(|&n| !(n >= 2.0)) {
            return bad("audit.particle_numbers", "entries must be at least 2");
        }
        Ok(())
    }
}
