//! Displaced-thermal and amplitude-damping sweeps.

use rayon::prelude::*;
use serde::Serialize;

use crate::bosonic::{adaptive_report, DisplacedThermalSpec, FockContext};
use crate::channels::{csv_err, maximally_coherent_qubit, monotone_counterexample_scan, unit_grid, MonotoneScan};
use crate::error::{Error, Result};
use crate::states::Hamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisplacedRow {
    pub alpha: f64,
    pub n_bar: f64,
    pub n_max: usize,
    pub energy: f64,
    pub ergotropy: f64,
    pub ec: f64,
    pub ei: f64,
    /// `𝓔_c / 𝓔`; undefined at `α = 0`.
    pub ec_over_e: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowFailure {
    pub alpha: f64,
    pub n_bar: f64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct DisplacedSweep {
    pub rows: Vec<DisplacedRow>,
    pub failures: Vec<RowFailure>,
}

/// `points` uniform values covering `[0, alpha_max]`.
pub fn alpha_grid(alpha_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|k| k as f64 * alpha_max / (points - 1) as f64).collect(),
    }
}

/// One row per `(n̄, α)`, `n̄` outermost, each with its own adaptive
/// truncation starting at `n_start`. Failing rows are collected, not fatal.
pub fn displaced_thermal_sweep(
    alphas: &[f64],
    n_bars: &[f64],
    omega: f64,
    n_start: usize,
    n_cap: usize,
) -> Result<DisplacedSweep> {
    if alphas.is_empty() || n_bars.is_empty() {
        return Err(Error::Domain("empty alpha or n_bar grid".into()));
    }
    let ctx = FockContext::new(n_start, omega)?;
    let jobs: Vec<(f64, f64)> = n_bars
        .iter()
        .flat_map(|&n| alphas.iter().map(move |&a| (a, n)))
        .collect();
    let results: Vec<std::result::Result<DisplacedRow, RowFailure>> = jobs
        .par_iter()
        .map(|&(alpha, n_bar)| {
            let run = || -> Result<DisplacedRow> {
                let spec = DisplacedThermalSpec::real(alpha, n_bar)?;
                let (r, _) = adaptive_report(&ctx, &spec, n_cap)?;
                Ok(DisplacedRow {
                    alpha,
                    n_bar,
                    n_max: r.n_max,
                    energy: r.energy,
                    ergotropy: r.report.ergotropy,
                    ec: r.report.coherent,
                    ei: r.report.incoherent,
                    ec_over_e: (alpha != 0.0).then(|| r.report.coherent / r.report.ergotropy),
                })
            };
            run().map_err(|e| RowFailure {
                alpha,
                n_bar,
                message: e.to_string(),
            })
        })
        .collect();
    let mut sweep = DisplacedSweep::default();
    for r in results {
        match r {
            Ok(row) => sweep.rows.push(row),
            Err(f) => sweep.failures.push(f),
        }
    }
    Ok(sweep)
}

impl DisplacedSweep {
    /// Writes `alpha,n_bar,n_max,energy,ergotropy,ec,ei,ec_over_e`, energies
    /// multiplied by `energy_unit`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W, energy_unit: f64) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["alpha", "n_bar", "n_max", "energy", "ergotropy", "ec", "ei", "ec_over_e"])
            .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.alpha.to_string(),
                r.n_bar.to_string(),
                r.n_max.to_string(),
                (r.energy * energy_unit).to_string(),
                (r.ergotropy * energy_unit).to_string(),
                (r.ec * energy_unit).to_string(),
                (r.ei * energy_unit).to_string(),
                r.ec_over_e.map(|x| x.to_string()).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Amplitude-damping scan of the maximally coherent qubit with populations
/// `(ρ11, 1 - ρ11)` and unit gap.
pub fn gad_scan(gamma: f64, rho11: f64, q_points: usize) -> Result<MonotoneScan> {
    if q_points == 0 {
        return Err(Error::Domain("q grid must be non-empty".into()));
    }
    let rho = maximally_coherent_qubit(rho11, 0.0)?;
    let h = Hamiltonian::new(vec![0.0, 1.0])?;
    monotone_counterexample_scan(&rho, &h, gamma, &unit_grid(q_points))
}
