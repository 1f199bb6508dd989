//! Command implementations behind the `ergotropy` binary: state analysis,
//! figure sweeps and the property suite. Every command writes its CSV, SVG
//! and log files into an output directory and returns the computed data.

pub mod io;
pub mod plot;
pub mod qutrit;
pub mod suite;
pub mod sweeps;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::bosonic::{DEFAULT_N_MAX, N_MAX_CAP};
use crate::channels::MonotoneScan;
use crate::error::{Error, Result};
use crate::ergotropy::{analyze_with_beta, ErgotropyReport};
use crate::states::Hamiltonian;
use plot::{render_svg, Series};
use qutrit::SaturationCurve;
use suite::{InvariantResult, SuiteConfig};
use sweeps::DisplacedSweep;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let mut f = create(dir, name)?;
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

fn check_unit(energy_unit: f64) -> Result<()> {
    if energy_unit > 0.0 && energy_unit.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("energy unit must be positive, got {energy_unit}")))
    }
}

pub struct Analysis {
    pub hamiltonian: Hamiltonian,
    pub report: ErgotropyReport,
    pub json: Value,
    pub summary: String,
}

/// Reads and validates a state file, then runs the full decomposition.
/// `energies` overrides the levels stored in the file; `beta` moves the
/// reported bounds away from `β*`.
pub fn cmd_analyze(
    state_file: &Path,
    energies: Option<Vec<f64>>,
    beta: Option<f64>,
    energy_unit: f64,
) -> Result<Analysis> {
    check_unit(energy_unit)?;
    let (rho, h) = io::read_state_file(state_file)?.into_problem(energies)?;
    // β is given in output units
    let report = analyze_with_beta(&rho, &h, beta.map(|b| b * energy_unit))?;
    Ok(Analysis {
        json: io::report_json(&report, &h, energy_unit),
        summary: io::report_summary(&report, energy_unit),
        hamiltonian: h,
        report,
    })
}

pub const QUTRIT_CSV: &str = "qutrit_saturation.csv";
pub const QUTRIT_SVG: &str = "qutrit_saturation.svg";
pub const QUTRIT_LOG: &str = "qutrit_saturation_anomalies.log";

/// Zero-level curves of `ΔE_c` for each level ratio `R`, one CSV block per
/// curve. Multiple roots for one `r1` and grid points without a root are
/// written to the anomaly log.
pub fn cmd_qutrit_saturation(ratios: &[f64], grid_resolution: usize, out_dir: &Path) -> Result<Vec<SaturationCurve>> {
    if ratios.is_empty() || grid_resolution == 0 {
        return Err(Error::Domain("R list and r1 grid must be non-empty".into()));
    }
    let grid = qutrit::r1_grid(grid_resolution);
    let curves = ratios
        .iter()
        .map(|&r| qutrit::saturation_curve(r, &grid))
        .collect::<Result<Vec<_>>>()?;

    let mut csv = create(out_dir, QUTRIT_CSV)?;
    qutrit::write_csv(&curves, &mut csv)?;
    let mut log = String::new();
    for c in &curves {
        for a in &c.anomalies {
            log.push_str(&format!("R={} r1={} multiple roots r2={:?}\n", a.ratio, a.r1, a.roots));
        }
        for r1 in &c.missing {
            log.push_str(&format!("R={} r1={} no root\n", c.ratio, r1));
        }
        for p in c.points.iter().filter(|p| p.delta_ec.abs() >= qutrit::LOCUS_TOL) {
            log.push_str(&format!("R={} r1={} r2={} self-check failed, delta_ec={:e}\n", p.ratio, p.r1, p.r2, p.delta_ec));
        }
    }
    write_text(out_dir, QUTRIT_LOG, &log)?;
    let series: Vec<Series> = curves
        .iter()
        .map(|c| Series::new(format!("R = {}", c.ratio), c.points.iter().map(|p| (p.r1, p.r2)).collect()))
        .collect();
    write_text(out_dir, QUTRIT_SVG, &render_svg("Zero bound-ergotropy gap", "r1", "r2", &series))?;
    Ok(curves)
}

pub const DISPLACED_CSV: &str = "displaced_thermal.csv";
pub const DISPLACED_SVG: &str = "displaced_thermal.svg";
pub const DISPLACED_FRACTION_SVG: &str = "displaced_thermal_fraction.svg";
pub const DISPLACED_LOG: &str = "displaced_thermal_failures.log";

#[derive(Debug, Clone)]
pub struct DisplacedOptions {
    pub alpha_max: f64,
    pub alpha_points: usize,
    pub n_bars: Vec<f64>,
    /// Starting truncation; grown per row up to `n_cap`.
    pub n_max: usize,
    pub n_cap: usize,
    pub omega: f64,
    pub energy_unit: f64,
}

impl Default for DisplacedOptions {
    fn default() -> Self {
        Self {
            alpha_max: 3.0,
            alpha_points: 61,
            n_bars: vec![0.0, 1.0],
            n_max: DEFAULT_N_MAX,
            n_cap: N_MAX_CAP,
            omega: 1.0,
            energy_unit: 1.0,
        }
    }
}

/// Coherent ergotropy of displaced thermal states over an `α` grid for each
/// `n̄`. Rows whose truncation does not converge go to the failure log.
pub fn cmd_displaced_thermal(opts: &DisplacedOptions, out_dir: &Path) -> Result<DisplacedSweep> {
    check_unit(opts.energy_unit)?;
    if !(opts.alpha_max >= 0.0 && opts.alpha_max.is_finite()) {
        return Err(Error::Domain(format!("alpha max must be >= 0, got {}", opts.alpha_max)));
    }
    let alphas = sweeps::alpha_grid(opts.alpha_max, opts.alpha_points);
    let sweep = sweeps::displaced_thermal_sweep(&alphas, &opts.n_bars, opts.omega, opts.n_max, opts.n_cap)?;

    let mut csv = create(out_dir, DISPLACED_CSV)?;
    sweep.write_csv(&mut csv, opts.energy_unit)?;
    let log: String = sweep
        .failures
        .iter()
        .map(|f| format!("alpha={} n_bar={}: {}\n", f.alpha, f.n_bar, f.message))
        .collect();
    write_text(out_dir, DISPLACED_LOG, &log)?;

    let u = opts.energy_unit;
    let mut main = Vec::new();
    let mut fraction = Vec::new();
    for &n_bar in &opts.n_bars {
        let rows: Vec<_> = sweep.rows.iter().filter(|r| r.n_bar == n_bar).collect();
        main.push(Series::new(format!("Ec, n_bar = {n_bar}"), rows.iter().map(|r| (r.alpha, r.ec * u)).collect()));
        fraction.push(Series::new(
            format!("n_bar = {n_bar}"),
            rows.iter().filter_map(|r| r.ec_over_e.map(|x| (r.alpha, x))).collect(),
        ));
    }
    main.push(
        Series::new(
            "total ergotropy",
            alphas.iter().map(|&a| (a, opts.omega * a * a * u)).collect(),
        )
        .dashed(),
    );
    write_text(out_dir, DISPLACED_SVG, &render_svg("Displaced thermal states", "alpha", "coherent ergotropy", &main))?;
    write_text(
        out_dir,
        DISPLACED_FRACTION_SVG,
        &render_svg("Coherent fraction of the ergotropy", "alpha", "Ec / E", &fraction),
    )?;
    Ok(sweep)
}

pub const GAD_CSV: &str = "gad_counterexample.csv";
pub const GAD_SVG: &str = "gad_counterexample.svg";

pub struct GadOutcome {
    pub scan: MonotoneScan,
    pub summary: String,
}

/// Generalized amplitude damping scan over `q ∈ [0, 1]`.
pub fn cmd_gad_counterexample(gamma: f64, rho11: f64, q_points: usize, out_dir: &Path) -> Result<GadOutcome> {
    let scan = sweeps::gad_scan(gamma, rho11, q_points)?;
    let mut csv = create(out_dir, GAD_CSV)?;
    scan.write_csv(&mut csv)?;
    let series = [
        Series::new("Ec(rho) - Ec(out)", scan.rows.iter().map(|r| (r.q, r.diff)).collect()),
        Series::new("zero", vec![(0.0, 0.0), (1.0, 0.0)]).dashed(),
    ];
    write_text(out_dir, GAD_SVG, &render_svg(&format!("Amplitude damping, gamma = {gamma}"), "q", "difference", &series))?;
    let min = scan.min_diff().expect("non-empty grid");
    let summary = format!(
        "min difference {} at q = {}; {} of {} grid points increase the coherent ergotropy",
        min.diff,
        min.q,
        scan.increases().count(),
        scan.rows.len()
    );
    Ok(GadOutcome { scan, summary })
}

pub const SUITE_JSONL: &str = "property_suite.jsonl";

pub struct SuiteOutcome {
    pub results: Vec<InvariantResult>,
    pub counterexample_files: Vec<PathBuf>,
}

impl SuiteOutcome {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

/// Runs the property suite; one JSON line per invariant, plus a state file
/// for every failing invariant.
pub fn cmd_property_suite(cfg: &SuiteConfig, out_dir: &Path) -> Result<SuiteOutcome> {
    let results = suite::run_property_suite(cfg);
    let mut lines = String::new();
    let mut files = Vec::new();
    for r in &results {
        lines.push_str(&serde_json::to_string(r).map_err(|e| Error::Parse(e.to_string()))?);
        lines.push('\n');
        if let Some(ce) = &r.counterexample {
            let name = format!("counterexample_{}.json", r.invariant);
            let text = serde_json::to_string_pretty(&ce.state).map_err(|e| Error::Parse(e.to_string()))?;
            write_text(out_dir, &name, &(text + "\n"))?;
            files.push(out_dir.join(name));
        }
    }
    write_text(out_dir, SUITE_JSONL, &lines)?;
    Ok(SuiteOutcome {
        results,
        counterexample_files: files,
    })
}
