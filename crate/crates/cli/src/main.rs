use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mflab::constants::{rate_report, RateParameters};
use mflab::dynamics::{evolve_hartree, evolve_nbody_quantum, reduced_state, QuantumEnsemble};
use mflab::harness::{
    gauss_hermite_points, run_bound_audits, run_classical_study, run_quantum_study, write_rows_csv, StudyConfig,
};
use mflab::phase_space::io::{write_fourier, write_phase_csv};
use mflab::phase_space::{
    beta_norm, inverse_symplectic_fourier, toeplitz_point_masses, wigner_fourier_with_tolerance, FourierPhaseFunction,
};
use mflab::{Error, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "mflab", version, about = "Mean-field limit experiments on the circle")]
struct Cli {
    /// TOML study configuration; the benchmark setup when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wigner transform of the initial datum at one ħ.
    Transform {
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        /// Binary Fourier container.
        #[arg(long)]
        out: PathBuf,
        /// Phase-space samples as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evolves the datum and writes the 1-particle Wigner marginal.
    Evolve {
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        /// Particle number of the quantum N-body run; Hartree when omitted.
        #[arg(long)]
        particles: Option<usize>,
        /// Final time as a fraction of the horizon.
        #[arg(long, default_value_t = 0.25)]
        time: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rate report as JSON on stdout.
    Constants {
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = 1)]
        j: u32,
        /// Time as a fraction of the horizon.
        #[arg(long, default_value_t = 0.25)]
        time: f64,
        #[arg(long = "particles", default_value_t = 2.0)]
        n: f64,
    },
    /// Runs every inequality audit; exit status 3 on any violation.
    Audit {
        /// Also write the summary here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence studies, written as CSV under the output directory.
    Study {
        #[arg(long, value_enum, default_value_t = Kind::All)]
        kind: Kind,
        /// Overrides `output_dir`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Quantum,
    Classical,
    All,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_AUDIT: u8 = 3;

fn load(path: Option<&Path>) -> Result<StudyConfig> {
    match path {
        Some(p) => StudyConfig::from_path(p),
        None => Ok(StudyConfig::default()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?))
}

/// Wigner function of the Töplitz datum at `hbar`, with its `β'`-norm.
fn initial_wigner(cfg: &StudyConfig, hbar: f64) -> Result<(FourierPhaseFunction, f64)> {
    let points = gauss_hermite_points(&cfg.initial);
    let d = toeplitz_point_masses(&points, hbar, cfg.quantum.points_per_axis)?;
    let w = wigner_fourier_with_tolerance(&d, cfg.quantum.wigner_tolerance)?;
    let norm = beta_norm(&w, cfg.rates.beta_prime)?;
    Ok((w, norm))
}

fn parameters(cfg: &StudyConfig, hbar: f64, j: u32, t: f64, n: f64, f_norm: f64) -> Result<RateParameters> {
    let mut p = RateParameters::with_default_alpha(
        cfg.rates.beta,
        cfg.rates.beta_prime,
        cfg.potential()?,
        hbar,
        j,
        t,
        n,
        f_norm,
    );
    if let Some(a) = cfg.rates.alpha {
        p.alpha = a;
    }
    Ok(p)
}

fn horizon(cfg: &StudyConfig, hbar: f64, f_norm: f64) -> Result<f64> {
    let p = parameters(cfg, hbar, 1, 0.0, 2.0, f_norm)?;
    Ok(mflab::constants::solve_beta0_and_horizon(&p)?.1)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = load(cli.config.as_deref())?;
    match cli.command {
        Command::Transform { hbar, out, csv } => {
            let (w, _) = initial_wigner(&cfg, hbar)?;
            let mut f = create(&out)?;
            write_fourier(&mut f, &w, json!({ "seed": cfg.seed, "hbar": hbar }))?;
            f.flush()?;
            if let Some(path) = csv {
                write_phase_csv(create(&path)?, &inverse_symplectic_fourier(&w))?;
            }
        }
        Command::Evolve { hbar, particles, time, out } => {
            let (_, f_norm) = initial_wigner(&cfg, hbar)?;
            let t = time * horizon(&cfg, hbar, f_norm)?;
            let phi = cfg.potential()?;
            let q = &cfg.quantum;
            let points = gauss_hermite_points(&cfg.initial);
            let state = match particles {
                Some(np) => {
                    let ens = QuantumEnsemble::coherent_power(&points, hbar, q.points_per_axis, np)?;
                    reduced_state(&evolve_nbody_quantum(&ens, &phi, q.dt, t)?, 1)?
                }
                None => evolve_hartree(&toeplitz_point_masses(&points, hbar, q.points_per_axis)?, &phi, q.dt, t)?,
            };
            let w = wigner_fourier_with_tolerance(&state, q.wigner_tolerance)?;
            let mut f = create(&out)?;
            write_fourier(&mut f, &w, json!({ "seed": cfg.seed, "hbar": hbar, "t": t, "particles": particles }))?;
            f.flush()?;
        }
        Command::Constants { hbar, j, time, n } => {
            let (_, f_norm) = initial_wigner(&cfg, hbar)?;
            let t = time * horizon(&cfg, hbar, f_norm)?;
            let report = rate_report(&parameters(&cfg, hbar, j, t, n, f_norm)?)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Audit { out } => {
            let summary = run_bound_audits(&cfg)?;
            let text = serde_json::to_string_pretty(&summary)?;
            println!("{text}");
            if let Some(path) = out {
                writeln!(create(&path)?, "{text}")?;
            }
            return Ok(summary.violations() == 0);
        }
        Command::Study { kind, out_dir } => {
            let dir = out_dir.unwrap_or_else(|| cfg.output_dir.clone());
            if kind != Kind::Classical {
                let rows = run_quantum_study(&cfg)?;
                let path = dir.join("quantum.csv");
                write_rows_csv(&rows, create(&path)?)?;
                println!("{}", path.display());
            }
            if kind != Kind::Quantum {
                let study = run_classical_study(&cfg)?;
                let path = dir.join("classical.csv");
                write_rows_csv(&study.rows, create(&path)?)?;
                println!("{}", path.display());
                let slopes: Vec<_> = study.slopes.iter().map(|(t, s)| json!({ "t": t, "slope": s })).collect();
                let path = dir.join("classical_slopes.json");
                let doc = json!({ "format_version": 1, "seed": cfg.seed, "slopes": slopes });
                writeln!(create(&path)?, "{}", serde_json::to_string_pretty(&doc)?)?;
                println!("{}", path.display());
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_AUDIT),
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
