//! Dephasing, coherence quantifiers and incoherent permutation unitaries.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{self, ComplexMatrix};
use crate::states::{entropy_of_spectrum, von_neumann_entropy, DensityMatrix};

/// `V_π = Σ_k e^{-iφ_k} |ε_k⟩⟨ε_{π_k}|`, a reshuffling of the energy basis.
///
/// Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationUnitary {
    perm: Vec<usize>,
    phases: Vec<f64>,
}

impl PermutationUnitary {
    pub fn new(perm: Vec<usize>, phases: Vec<f64>) -> Result<Self> {
        let d = perm.len();
        if phases.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: phases.len(),
            });
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || seen[p] {
                return Err(Error::Domain(format!("{perm:?} is not a permutation of 0..{d}")));
            }
            seen[p] = true;
        }
        Ok(Self { perm, phases })
    }

    /// Zero phases.
    pub fn from_perm(perm: Vec<usize>) -> Result<Self> {
        let d = perm.len();
        Self::new(perm, vec![0.0; d])
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            perm: (0..dim).collect(),
            phases: vec![0.0; dim],
        }
    }

    /// The permutation that lists `populations` in descending order. Ties are
    /// broken by ascending index.
    pub fn sorting_descending(populations: &[f64]) -> Self {
        let mut perm: Vec<usize> = (0..populations.len()).collect();
        perm.sort_by(|&a, &b| populations[b].total_cmp(&populations[a]));
        Self::from_perm(perm).expect("argsort is a permutation")
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut v = ComplexMatrix::zeros(d, d);
        for (k, (&pk, &phi)) in self.perm.iter().zip(&self.phases).enumerate() {
            v[(k, pk)] = Complex64::from_polar(1.0, -phi);
        }
        v
    }
}

/// `Δ[ρ]`: the diagonal part of `ρ` in the energy basis.
pub fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_map_output(qmat::diagonal(&rho.populations()))
}

/// `C(ρ) = S(Δ[ρ]) - S(ρ)`.
pub fn rel_entropy_coherence(rho: &DensityMatrix) -> f64 {
    (entropy_of_spectrum(&rho.populations()) - von_neumann_entropy(rho)).max(0.0)
}

/// `Σ_{j≠k} |ρ_jk|`; equals `2|ρ_12|` for a qubit.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                total += rho.get(i, j).norm();
            }
        }
    }
    total
}

/// `V_π ρ V_π†`, evaluated by relabelling entries:
/// `(VρV†)_{kk'} = e^{-i(φ_k - φ_k')} ρ_{π_k π_k'}`.
pub fn apply_permutation(rho: &DensityMatrix, v: &PermutationUnitary) -> Result<DensityMatrix> {
    let d = rho.dim();
    if v.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.dim(),
        });
    }
    let m = ComplexMatrix::from_fn(d, d, |k, kp| {
        let phase = Complex64::from_polar(1.0, v.phases[kp] - v.phases[k]);
        phase * rho.get(v.perm[k], v.perm[kp])
    });
    Ok(DensityMatrix::from_map_output(m))
}
