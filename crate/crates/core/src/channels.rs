//! Kraus channels, incoherence checks, and the generalized amplitude damping
//! scan showing that the coherent ergotropy can grow under an incoherent
//! operation.

use num_complex::Complex64;
use serde::Serialize;

use crate::coherence::l1_coherence;
use crate::error::{Error, Result};
use crate::ergotropy::{coherent_ergotropy, qubit_coherent_ergotropy};
use crate::qmat::{self, ComplexMatrix};
use crate::states::{purity, DensityMatrix, Hamiltonian};

/// Tolerance on `Σ_j E_j†E_j - I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Off-diagonal mass below which a conjugated projector counts as incoherent.
pub const INCOHERENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::Domain("channel needs at least one Kraus operator".into()))?;
        let d = qmat::ensure_square(first)?;
        let mut sum = ComplexMatrix::zeros(d, d);
        for op in &operators {
            if qmat::ensure_square(op)? != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: op.nrows(),
                });
            }
            sum += op.adjoint() * op;
        }
        let residual = qmat::max_abs(&(sum - qmat::identity(d)));
        if residual > COMPLETENESS_TOL {
            return Err(Error::IncompleteChannel { residual });
        }
        Ok(Self { operators })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            operators: vec![qmat::identity(dim)],
        }
    }

    /// Single-operator channel `ρ → UρU†`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Full dephasing in the energy basis: Kraus set `{|k⟩⟨k|}`.
    pub fn dephasing(dim: usize) -> Self {
        let operators = (0..dim)
            .map(|k| {
                let mut p = ComplexMatrix::zeros(dim, dim);
                p[(k, k)] = Complex64::new(1.0, 0.0);
                p
            })
            .collect();
        Self { operators }
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    /// `Σ_j E_j†E_j - I`, max-norm.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, op| acc + op.adjoint() * op);
        qmat::max_abs(&(sum - qmat::identity(d)))
    }
}

/// `Ω(ρ) = Σ_j E_j ρ E_j†`.
pub fn apply_channel(channel: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d = channel.dim();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.dim(),
        });
    }
    let out = channel
        .operators
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, e| acc + e * rho.matrix() * e.adjoint());
    Ok(DensityMatrix::from_map_output(out))
}

/// Qubit generalized amplitude damping with bath parameter `q` and damping `γ`.
pub fn generalized_amplitude_damping(q: f64, gamma: f64) -> Result<KrausChannel> {
    for (name, v) in [("q", q), ("gamma", gamma)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
        }
    }
    let re = |x: f64| Complex64::new(x, 0.0);
    let zero = re(0.0);
    let (sq, sq1) = (q.sqrt(), (1.0 - q).sqrt());
    let (sg, sg1) = (gamma.sqrt(), (1.0 - gamma).sqrt());
    let m = |a, b, c, d| ComplexMatrix::from_row_slice(2, 2, &[a, b, c, d]);
    KrausChannel::new(vec![
        m(re(sq), zero, zero, re(sq * sg1)),
        m(zero, re(sq * sg), zero, zero),
        m(re(sq1 * sg1), zero, zero, re(sq1)),
        m(zero, zero, re(sq1 * sg), zero),
    ])
}

/// Result of [`check_incoherent_operation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IncoherenceWitness {
    Incoherent,
    /// `E_j |k⟩⟨k| E_j†` carries off-diagonal mass.
    Violation {
        operator: usize,
        basis_index: usize,
        off_diagonal_mass: f64,
    },
}

impl IncoherenceWitness {
    pub fn is_incoherent(&self) -> bool {
        matches!(self, IncoherenceWitness::Incoherent)
    }
}

/// Checks that every Kraus operator maps every energy eigenprojector to a
/// diagonal operator.
pub fn check_incoherent_operation(channel: &KrausChannel) -> IncoherenceWitness {
    let d = channel.dim();
    for (j, e) in channel.operators.iter().enumerate() {
        for k in 0..d {
            // E |k⟩⟨k| E† = column k of E times its adjoint
            let col = e.column(k);
            let mut mass = 0.0;
            for a in 0..d {
                for b in 0..d {
                    if a != b {
                        mass += (col[a] * col[b].conj()).norm();
                    }
                }
            }
            if mass >= INCOHERENCE_TOL {
                return IncoherenceWitness::Violation {
                    operator: j,
                    basis_index: k,
                    off_diagonal_mass: mass,
                };
            }
        }
    }
    IncoherenceWitness::Incoherent
}

/// Qubit state with populations `(ρ11, 1 - ρ11)` and the largest coherence
/// compatible with them, `ρ12 = √(ρ11 ρ22) e^{iφ}`.
pub fn maximally_coherent_qubit(rho11: f64, phase: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&rho11) {
        return Err(Error::Domain(format!("rho11 = {rho11} outside [0, 1]")));
    }
    let rho22 = 1.0 - rho11;
    let off = Complex64::from_polar((rho11 * rho22).sqrt(), phase);
    DensityMatrix::new(ComplexMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(rho11, 0.0), off, off.conj(), Complex64::new(rho22, 0.0)],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub q: f64,
    pub ec_in: f64,
    pub ec_out: f64,
    /// `𝓔_c(ρ) - 𝓔_c(Ω(ρ))`.
    pub diff: f64,
    pub purity_out: f64,
    pub p_c: Option<f64>,
    /// `diff` recomputed from the qubit closed form.
    pub diff_closed_form: f64,
}

#[derive(Debug, Clone)]
pub struct MonotoneScan {
    pub gamma: f64,
    pub rows: Vec<ScanRow>,
}

impl MonotoneScan {
    /// Row with the most negative `diff`.
    pub fn min_diff(&self) -> Option<&ScanRow> {
        self.rows.iter().min_by(|a, b| a.diff.total_cmp(&b.diff))
    }

    /// Rows where the coherent ergotropy grew under the channel.
    pub fn increases(&self) -> impl Iterator<Item = &ScanRow> {
        self.rows.iter().filter(|r| r.diff < 0.0)
    }

    /// Writes `q,ec_in,ec_out,diff,purity_out,p_c`; `p_c` is empty when undefined.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["q", "ec_in", "ec_out", "diff", "purity_out", "p_c"])
            .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.q.to_string(),
                r.ec_in.to_string(),
                r.ec_out.to_string(),
                r.diff.to_string(),
                r.purity_out.to_string(),
                r.p_c.map(|p| p.to_string()).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// Purity below which the channel output has more coherent ergotropy than
/// the input: `1/2 + (1/2)(𝓔_c/ω + C_l1(Ω(ρ))² ω / (4 𝓔_c))²`, with `ω` the
/// level spacing. Undefined when `𝓔_c(ρ) = 0`.
pub fn purity_threshold(ec_in: f64, l1_out: f64, gap: f64) -> Option<f64> {
    if ec_in <= 0.0 {
        return None;
    }
    let x = ec_in / gap + l1_out * l1_out * gap / (4.0 * ec_in);
    Some(0.5 + 0.5 * x * x)
}

/// Tabulates `𝓔_c(ρ) - 𝓔_c(Ω(ρ))` over a grid of bath parameters `q` for
/// generalized amplitude damping with fixed `γ`.
pub fn monotone_counterexample_scan(
    rho: &DensityMatrix,
    h: &Hamiltonian,
    gamma: f64,
    q_grid: &[f64],
) -> Result<MonotoneScan> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    h.check_dim(2)?;
    if q_grid.is_empty() {
        return Err(Error::Domain("empty q grid".into()));
    }
    let gap = h.energies()[1] - h.energies()[0];
    let ec_in = coherent_ergotropy(rho, h)?;
    let ec_in_closed = qubit_coherent_ergotropy(purity(rho), l1_coherence(rho), gap)?;
    let rows = q_grid
        .iter()
        .map(|&q| {
            let out = apply_channel(&generalized_amplitude_damping(q, gamma)?, rho)?;
            let ec_out = coherent_ergotropy(&out, h)?;
            let purity_out = purity(&out);
            let l1_out = l1_coherence(&out);
            let ec_out_closed = qubit_coherent_ergotropy(purity_out, l1_out, gap)?;
            Ok(ScanRow {
                q,
                ec_in,
                ec_out,
                diff: ec_in - ec_out,
                purity_out,
                p_c: purity_threshold(ec_in, l1_out, gap),
                diff_closed_form: ec_in_closed - ec_out_closed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonotoneScan { gamma, rows })
}

/// `n` uniform points covering `[0, 1]`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}
