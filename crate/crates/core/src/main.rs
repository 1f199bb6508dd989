use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coherent_ergotropy::bosonic::{DEFAULT_N_MAX, N_MAX_CAP};
use coherent_ergotropy::experiments::{
    self, qutrit, suite::SuiteConfig, DisplacedOptions, GAD_CSV, QUTRIT_CSV, SUITE_JSONL,
};
use coherent_ergotropy::Error;

/// Coherent and incoherent ergotropy of quantum states.
///
/// Exit codes: 0 success, 1 computation failure, 2 invalid input.
#[derive(Parser)]
#[command(name = "ergotropy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose the ergotropy of a state read from a JSON state file.
    Analyze {
        /// State file with `dim`, `energies`, `rho_re`, `rho_im`.
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated energy levels, ascending; overrides the file.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        energies: Option<Vec<f64>>,
        /// Inverse temperature for the reported bounds [default: beta*].
        #[arg(long)]
        beta: Option<f64>,
        /// Energy unit applied to reported values.
        #[arg(long, default_value_t = 1.0)]
        energy_unit: f64,
        /// Directory for report.json; the report is printed when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Zero-level curves of the three-level bound-ergotropy gap.
    QutritSaturation {
        /// Comma-separated ratios eps2/eps3 in [0, 1].
        #[arg(long = "R", value_delimiter = ',', default_values_t = qutrit::DEFAULT_R_LIST.to_vec())]
        ratios: Vec<f64>,
        /// Number of r1 grid points in [1/3, 1].
        #[arg(long, default_value_t = qutrit::DEFAULT_GRID)]
        grid: usize,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Coherent ergotropy of displaced thermal states of one bosonic mode.
    DisplacedThermal {
        /// Largest displacement |alpha|.
        #[arg(long, default_value_t = 3.0)]
        alpha_max: f64,
        /// Number of alpha grid points in [0, alpha-max].
        #[arg(long, default_value_t = 61)]
        alpha_points: usize,
        /// Comma-separated thermal occupations.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 1.0])]
        n_bar: Vec<f64>,
        /// Initial Fock truncation, grown per row until converged.
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
        /// Largest truncation tried.
        #[arg(long, default_value_t = N_MAX_CAP)]
        n_cap: usize,
        /// Mode frequency.
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// Energy unit applied to reported values.
        #[arg(long, default_value_t = 1.0)]
        energy_unit: f64,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Generalized amplitude damping scan of a maximally coherent qubit.
    GadCounterexample {
        /// Damping strength.
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        /// Ground-state population of the input qubit.
        #[arg(long, default_value_t = 1.0 / 3.0)]
        rho11: f64,
        /// Number of q grid points in [0, 1].
        #[arg(long, default_value_t = 201)]
        q_points: usize,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Seeded invariant checks over random states.
    PropertySuite {
        /// RNG seed.
        #[arg(long, default_value_t = SuiteConfig::default().seed)]
        seed: u64,
        /// Random states per dimension for each invariant.
        #[arg(long, default_value_t = SuiteConfig::default().count)]
        count: usize,
        /// Force the decomposition-identity check to fail (harness self-test).
        #[arg(long)]
        inject_bad_tolerance: bool,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_bad_input() { 2 } else { 1 })
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Analyze {
            state,
            energies,
            beta,
            energy_unit,
            out,
        } => {
            let a = experiments::cmd_analyze(&state, energies, beta, energy_unit)?;
            let json = serde_json::to_string_pretty(&a.json).map_err(|e| Error::Parse(e.to_string()))?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join("report.json"), json + "\n")?;
                    print!("{}", a.summary);
                }
                None => {
                    eprint!("{}", a.summary);
                    println!("{json}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::QutritSaturation { ratios, grid, out } => {
            let curves = experiments::cmd_qutrit_saturation(&ratios, grid, &out)?;
            let mut ok = true;
            for c in &curves {
                println!(
                    "R = {}: {} points, {} anomalies, {} missing",
                    c.ratio,
                    c.points.len(),
                    c.anomalies.len(),
                    c.missing.len()
                );
                ok &= c.points.iter().all(|p| p.delta_ec.abs() < qutrit::LOCUS_TOL);
            }
            println!("wrote {}", out.join(QUTRIT_CSV).display());
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::DisplacedThermal {
            alpha_max,
            alpha_points,
            n_bar,
            n_max,
            n_cap,
            omega,
            energy_unit,
            out,
        } => {
            let opts = DisplacedOptions {
                alpha_max,
                alpha_points,
                n_bars: n_bar,
                n_max,
                n_cap,
                omega,
                energy_unit,
            };
            let sweep = experiments::cmd_displaced_thermal(&opts, &out)?;
            println!("{} rows, {} failures", sweep.rows.len(), sweep.failures.len());
            for f in &sweep.failures {
                eprintln!("alpha={} n_bar={}: {}", f.alpha, f.n_bar, f.message);
            }
            Ok(if sweep.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::GadCounterexample {
            gamma,
            rho11,
            q_points,
            out,
        } => {
            let g = experiments::cmd_gad_counterexample(gamma, rho11, q_points, &out)?;
            println!("{}", g.summary);
            println!("wrote {}", out.join(GAD_CSV).display());
            Ok(ExitCode::SUCCESS)
        }
        Command::PropertySuite {
            seed,
            count,
            inject_bad_tolerance,
            out,
        } => {
            let cfg = SuiteConfig {
                seed,
                count,
                inject_bad_tolerance,
            };
            let outcome = experiments::cmd_property_suite(&cfg, &out)?;
            for r in &outcome.results {
                println!(
                    "{} {} (worst {:e}, tolerance {:e}, {} samples)",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.invariant,
                    r.worst,
                    r.tolerance,
                    r.samples
                );
            }
            for f in &outcome.counterexample_files {
                println!("counterexample written to {}", f.display());
            }
            println!("wrote {}", out.join(SUITE_JSONL).display());
            Ok(if outcome.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    run(cli.command).unwrap_or_else(fail)
}
