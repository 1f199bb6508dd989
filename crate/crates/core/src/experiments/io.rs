//! State files and JSON reports.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ergotropy::ErgotropyReport;
use crate::qmat::ComplexMatrix;
use crate::states::{DensityMatrix, Hamiltonian};

/// A real matrix given either as nested rows or as a flat row-major array.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RealMatrix {
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl RealMatrix {
    fn into_rows(self, dim: usize, field: &str) -> Result<Vec<f64>> {
        let flat = match self {
            RealMatrix::Nested(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::Parse(format!("`{field}` must be {dim}x{dim}")));
                }
                rows.into_iter().flatten().collect()
            }
            RealMatrix::Flat(v) => v,
        };
        if flat.len() != dim * dim {
            return Err(Error::Parse(format!(
                "`{field}` has {} entries, expected {}",
                flat.len(),
                dim * dim
            )));
        }
        Ok(flat)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStateFile {
    dim: usize,
    #[serde(default)]
    energies: Option<Vec<f64>>,
    rho_re: RealMatrix,
    #[serde(default)]
    rho_im: Option<RealMatrix>,
}

/// Parsed but not yet validated state file. `rho_im` may be omitted.
#[derive(Debug, Clone)]
pub struct StateFile {
    pub dim: usize,
    pub energies: Option<Vec<f64>>,
    pub rho: ComplexMatrix,
}

impl StateFile {
    /// Validated state and Hamiltonian. `energies` overrides the file's levels.
    pub fn into_problem(self, energies: Option<Vec<f64>>) -> Result<(DensityMatrix, Hamiltonian)> {
        let levels = energies
            .or(self.energies)
            .ok_or_else(|| Error::Parse("no energies in state file or on the command line".into()))?;
        if levels.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: levels.len(),
            });
        }
        let h = Hamiltonian::new(levels)?;
        let rho = DensityMatrix::new(self.rho)?;
        Ok((rho, h))
    }
}

pub fn parse_state_json(text: &str) -> Result<StateFile> {
    let raw: RawStateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if raw.dim == 0 {
        return Err(Error::Empty);
    }
    let d = raw.dim;
    let re = raw.rho_re.into_rows(d, "rho_re")?;
    let im = match raw.rho_im {
        Some(m) => m.into_rows(d, "rho_im")?,
        None => vec![0.0; d * d],
    };
    let entries: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
    Ok(StateFile {
        dim: d,
        energies: raw.energies,
        rho: ComplexMatrix::from_row_slice(d, d, &entries),
    })
}

pub fn read_state_file(path: &Path) -> Result<StateFile> {
    parse_state_json(&std::fs::read_to_string(path)?)
}

/// 17 significant digits, always a valid JSON number.
pub fn format_f64_17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn rows_17(m: &ComplexMatrix, part: impl Fn(Complex64) -> f64) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let cells: Vec<String> = (0..m.ncols()).map(|j| format_f64_17(part(m[(i, j)]))).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[\n    {}\n  ]", rows.join(",\n    "))
}

/// State file text with every number written to 17 significant digits.
pub fn state_file_json(energies: &[f64], rho: &ComplexMatrix) -> String {
    let levels: Vec<String> = energies.iter().map(|&e| format_f64_17(e)).collect();
    format!(
        "{{\n  \"dim\": {},\n  \"energies\": [{}],\n  \"rho_re\": {},\n  \"rho_im\": {}\n}}\n",
        rho.nrows(),
        levels.join(", "),
        rows_17(rho, |z| z.re),
        rows_17(rho, |z| z.im),
    )
}

pub fn write_state_file(path: &Path, energies: &[f64], rho: &ComplexMatrix) -> Result<()> {
    std::fs::write(path, state_file_json(energies, rho))?;
    Ok(())
}

fn matrix_value(m: &ComplexMatrix) -> Value {
    let part = |f: fn(Complex64) -> f64| -> Value {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| f(m[(i, j)])).collect::<Vec<f64>>())
            .collect::<Vec<_>>()
            .into()
    };
    json!({ "re": part(|z| z.re), "im": part(|z| z.im) })
}

/// JSON form of a report. Energies are multiplied by `energy_unit` and
/// inverse temperatures divided by it; dimensionless entries are unchanged.
pub fn report_json(report: &ErgotropyReport, h: &Hamiltonian, energy_unit: f64) -> Value {
    let e = |x: f64| x * energy_unit;
    let beta_star = match report.beta_star.finite() {
        Some(b) => json!(b / energy_unit),
        None => json!("inf"),
    };
    let bounds = report.bounds.map(|b| {
        json!({
            "beta": b.beta / energy_unit,
            "scaled_coherent": b.scaled_coherent,
            "coherence": b.coherence,
            "d_dephased_passive": b.d_dephased_passive,
            "d_passive": b.d_passive,
            "identity_residual": b.identity_residual,
            "lower": b.lower,
            "upper": b.upper,
        })
    });
    json!({
        "dim": h.dim(),
        "energies": h.energies().iter().map(|&x| e(x)).collect::<Vec<_>>(),
        "energy_unit": energy_unit,
        "ergotropy": e(report.ergotropy),
        "incoherent_ergotropy": e(report.incoherent),
        "incoherent_ergotropy_dephased": e(report.incoherent_dephased),
        "coherent_ergotropy": e(report.coherent),
        "beta_star": beta_star,
        "bound_ergotropy": e(report.bound_ergotropy),
        "lower_bound": report.lower_bound.map(e),
        "upper_bound": report.upper_bound.map(e),
        "bounds": bounds,
        "coherence": report.coherence,
        "l1_coherence": report.l1_coherence,
        "optimal_perm": report.optimal_perm.perm(),
        "optimal_perm_phases": report.optimal_perm.phases(),
        "degenerate_hamiltonian": report.degenerate_hamiltonian,
        "passive_state": matrix_value(report.passive_state.matrix()),
        "dephased_passive_state": matrix_value(report.dephased_passive.matrix()),
        "sigma_state": matrix_value(report.sigma_state.matrix()),
        "dephased_state": matrix_value(report.dephased.matrix()),
        "ergotropic_unitary": matrix_value(&report.ergotropic_unitary),
    })
}

/// Plain-text summary of a report.
pub fn report_summary(report: &ErgotropyReport, energy_unit: f64) -> String {
    let mut s = format!(
        "ergotropy            {:.12}\nincoherent           {:.12}\ncoherent             {:.12}\nbeta*                {}\nbound ergotropy      {:.12}\ncoherence (nats)     {:.12}\n",
        report.ergotropy * energy_unit,
        report.incoherent * energy_unit,
        report.coherent * energy_unit,
        match report.beta_star.finite() {
            Some(b) => format!("{:.12}", b / energy_unit),
            None => "inf".to_string(),
        },
        report.bound_ergotropy * energy_unit,
        report.coherence,
    );
    if let (Some(lo), Some(hi)) = (report.lower_bound, report.upper_bound) {
        s.push_str(&format!(
            "coherent bounds      [{:.12}, {:.12}]\n",
            lo * energy_unit,
            hi * energy_unit
        ));
    }
    if report.degenerate_hamiltonian {
        s.push_str("note: degenerate Hamiltonian, permutation optimum is not unique\n");
    }
    s
}
