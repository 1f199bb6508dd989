//! Hamiltonians, density matrices, Gibbs states and entropic functionals.
//!
//! All matrices are written in the energy eigenbasis of the Hamiltonian,
//! which is therefore just an ascending list of levels. Entropies are in
//! nats.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qmat::{self, ComplexMatrix, EigenDecomposition, CLIP_TOL, HERMITIAN_TOL};

/// Tolerance on `|Tr ρ - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted on a density matrix.
pub const NEGATIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    energies: Vec<f64>,
}

impl Hamiltonian {
    /// Levels must be finite and ascending. Repeated levels are accepted and
    /// reported through [`Hamiltonian::is_degenerate`].
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidHamiltonian("no energy levels".into()));
        }
        if let Some(bad) = energies.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidHamiltonian(format!("non-finite level {bad}")));
        }
        if let Some(k) = energies.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::InvalidHamiltonian(format!(
                "levels not ascending at index {k}: {} > {}",
                energies[k],
                energies[k + 1]
            )));
        }
        Ok(Self { energies })
    }

    /// `ε_k = gap * k` for `k = 0..dim`.
    pub fn equally_spaced(dim: usize, gap: f64) -> Result<Self> {
        Self::new((0..dim).map(|k| gap * k as f64).collect())
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn is_degenerate(&self) -> bool {
        self.energies.windows(2).any(|w| w[0] == w[1])
    }

    /// Uniform shift of every level.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            energies: self.energies.iter().map(|e| e + offset).collect(),
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        qmat::diagonal(&self.energies)
    }

    /// `Σ_k ε_k p_k` for a population vector.
    pub fn energy_of(&self, populations: &[f64]) -> f64 {
        self.energies
            .iter()
            .zip(populations)
            .map(|(e, p)| e * p)
            .sum()
    }

    /// Mean energy `Tr{H ρ}`.
    pub fn mean_energy(&self, rho: &DensityMatrix) -> f64 {
        self.energy_of(&rho.populations())
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }
}

/// A validated density matrix in the energy basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates a raw matrix. See [`validate_state`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        validate_state(matrix)
    }

    pub fn from_diagonal(populations: &[f64]) -> Result<Self> {
        Self::new(qmat::diagonal(populations))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalised) nonzero vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || norm == 0.0 {
            return Err(Error::Domain("zero state vector".into()));
        }
        let psi: Vec<Complex64> = amplitudes.iter().map(|a| a / norm).collect();
        let d = psi.len();
        Self::new(ComplexMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj()))
    }

    /// `I / d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::from_diagonal(&vec![1.0 / dim as f64; dim])
    }

    /// `|ψ⟩ = Σ_k |ε_k⟩ / √d`.
    pub fn maximally_coherent(dim: usize) -> Result<Self> {
        Self::pure(&vec![Complex64::new(1.0, 0.0); dim])
    }

    /// Wraps a matrix produced by a trace- and positivity-preserving map,
    /// removing the rounding-level anti-Hermitian part.
    pub(crate) fn from_map_output(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: qmat::hermitize(&matrix),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Diagonal entries `ρ_kk` (real parts).
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn eigen(&self) -> EigenDecomposition {
        qmat::hermitian_eig(&self.matrix).expect("density matrix is Hermitian by construction")
    }

    /// Eigenvalues in descending order, with solver noise inside the clip
    /// window set to zero.
    pub fn spectrum_descending(&self) -> Vec<f64> {
        physical_spectrum(&self.eigen())
            .into_iter()
            .rev()
            .collect()
    }

    /// Eigenvalues in descending order with only negative values zeroed; the
    /// populations of the passive state, for energy sums.
    pub fn passive_populations(&self) -> Vec<f64> {
        self.eigen().values.iter().rev().map(|&v| v.max(0.0)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        qmat::is_diagonal(&self.matrix)
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        qmat::ensure_square(u)?;
        if u.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(Self::from_map_output(u * &self.matrix * u.adjoint()))
    }
}

/// Eigenvalues of a state ready for entropy evaluation: negative values are
/// dropped to zero, and solver output inside the clip window is zeroed.
/// Values from an exact (diagonal) decomposition are kept as they are.
fn physical_spectrum(eig: &EigenDecomposition) -> Vec<f64> {
    eig.values
        .iter()
        .map(|&v| {
            if v < 0.0 || (!eig.exact && v <= CLIP_TOL) {
                0.0
            } else {
                v
            }
        })
        .collect()
}

/// Checks Hermiticity, unit trace and positivity, in that order.
pub fn validate_state(matrix: ComplexMatrix) -> Result<DensityMatrix> {
    qmat::ensure_square(&matrix)?;
    if let Some(bad) = matrix.iter().find(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Parse(format!("non-finite matrix entry {bad}")));
    }
    let asym = qmat::hermitian_asymmetry(&matrix);
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            max_asymmetry: asym,
        });
    }
    let tr = qmat::trace(&matrix);
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::TraceNotUnity { re: tr.re, im: tr.im });
    }
    let matrix = qmat::hermitize(&matrix);
    let eig = qmat::hermitian_eig(&matrix)?;
    let min = eig.values[0];
    if min < -NEGATIVITY_TOL {
        return Err(Error::NegativeEigenvalue {
            min_eigenvalue: min,
        });
    }
    Ok(DensityMatrix { matrix })
}

/// `-Σ p ln p` over a non-negative spectrum.
///
/// The dominant weight's logarithm is evaluated as `ln T + ln1p(-rest/T)`,
/// so states whose other weights sit far below machine epsilon relative to
/// it (cold Gibbs states) still get a relatively accurate entropy.
pub fn entropy_of_spectrum(spectrum: &[f64]) -> f64 {
    let Some((imax, &pmax)) = spectrum
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
    else {
        return 0.0;
    };
    if pmax <= 0.0 {
        return 0.0;
    }
    let rest: f64 = spectrum
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != imax)
        .map(|(_, &p)| p.max(0.0))
        .sum();
    if rest == 0.0 {
        // rank one: the single weight is the whole (unit) trace
        return 0.0;
    }
    let total = pmax + rest;
    let ln_pmax = total.ln() + (-rest / total).ln_1p();
    let others: f64 = spectrum
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != imax)
        .map(|(_, &p)| xlogx_nonneg(p))
        .sum();
    -(pmax * ln_pmax + others)
}

fn xlogx_nonneg(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.ln()
    }
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&physical_spectrum(&rho.eigen()))
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// Quantum relative entropy `D(ρ||σ)` in nats.
///
/// Returns `f64::INFINITY` when the support of `ρ` is not contained in the
/// support of `σ`, with zero eigenvalues of `σ` identified by the clip rule.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let s_rho = von_neumann_entropy(rho);
    let eig_sigma = sigma.eigen();
    let sigma_spec = physical_spectrum(&eig_sigma);
    // ⟨s_k| ρ |s_k⟩ for every eigenvector of σ.
    let v = &eig_sigma.vectors;
    let rotated = v.adjoint() * rho.matrix() * v;
    let mut cross = 0.0;
    for (k, &s) in sigma_spec.iter().enumerate() {
        let weight = rotated[(k, k)].re;
        if weight <= CLIP_TOL {
            continue;
        }
        if s <= 0.0 {
            return Ok(f64::INFINITY);
        }
        cross += weight * s.ln();
    }
    Ok((-s_rho - cross).max(0.0))
}

/// Inverse temperature and Hamiltonian of a Gibbs state.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSpec {
    pub beta: f64,
    pub hamiltonian: Hamiltonian,
}

impl GibbsSpec {
    pub fn new(beta: f64, hamiltonian: Hamiltonian) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::Domain(format!(
                "inverse temperature must be finite and non-negative, got {beta}"
            )));
        }
        Ok(Self { beta, hamiltonian })
    }

    /// `ln p_k = -β(ε_k - ε_1) - ln Z'`, computed without forming `p_k`.
    pub fn log_weights(&self) -> Vec<f64> {
        let shifted = self.shifted_exponents();
        let ln_z = log_partition(&shifted);
        shifted.iter().map(|x| -x - ln_z).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights().into_iter().map(f64::exp).collect()
    }

    /// Entropy of the Gibbs state, evaluated from the log-weights.
    pub fn entropy(&self) -> f64 {
        let shifted = self.shifted_exponents();
        let ln_z = log_partition(&shifted);
        shifted
            .iter()
            .map(|&x| {
                let ln_p = -x - ln_z;
                -ln_p.exp() * ln_p
            })
            .sum()
    }

    /// `Tr{H ρ_β}`.
    pub fn mean_energy(&self) -> f64 {
        self.hamiltonian.energy_of(&self.weights())
    }

    fn shifted_exponents(&self) -> Vec<f64> {
        let e0 = self.hamiltonian.ground_energy();
        self.hamiltonian
            .energies()
            .iter()
            .map(|e| if self.beta == 0.0 { 0.0 } else { self.beta * (e - e0) })
            .collect()
    }
}

/// `ln Σ_k e^{-x_k}` for non-negative exponents with at least one zero.
fn log_partition(shifted: &[f64]) -> f64 {
    let ground = shifted.iter().filter(|&&x| x == 0.0).count() as f64;
    let excited: f64 = shifted
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|x| (-x).exp())
        .sum();
    ground.ln() + (excited / ground).ln_1p()
}

/// `e^{-βH} / Z`, diagonal in the energy basis.
pub fn gibbs_state(spec: &GibbsSpec) -> DensityMatrix {
    DensityMatrix {
        matrix: qmat::diagonal(&spec.weights()),
    }
}

/// The `β → ∞` limit: uniform over the ground-energy levels.
pub fn ground_state_limit(hamiltonian: &Hamiltonian) -> DensityMatrix {
    let e0 = hamiltonian.ground_energy();
    let count = hamiltonian.energies().iter().filter(|&&e| e == e0).count() as f64;
    let weights: Vec<f64> = hamiltonian
        .energies()
        .iter()
        .map(|&e| if e == e0 { 1.0 / count } else { 0.0 })
        .collect();
    DensityMatrix {
        matrix: qmat::diagonal(&weights),
    }
}

/// `D(ρ||ρ_β)` using the analytic log-weights of the Gibbs state, so that
/// exponentially small thermal populations never underflow to zero.
pub fn relative_entropy_to_gibbs(rho: &DensityMatrix, spec: &GibbsSpec) -> Result<f64> {
    spec.hamiltonian.check_dim(rho.dim())?;
    let cross: f64 = rho
        .populations()
        .iter()
        .zip(spec.log_weights())
        .map(|(p, lw)| p * lw)
        .sum();
    Ok((-von_neumann_entropy(rho) - cross).max(0.0))
}

/// Same as [`relative_entropy_to_gibbs`] for a state given by its populations
/// in the energy basis (diagonal states).
pub fn relative_entropy_diag_to_gibbs(populations: &[f64], spec: &GibbsSpec) -> Result<f64> {
    spec.hamiltonian.check_dim(populations.len())?;
    let cross: f64 = populations
        .iter()
        .zip(spec.log_weights())
        .map(|(p, lw)| p * lw)
        .sum();
    Ok((-entropy_of_spectrum(populations) - cross).max(0.0))
}

/// Hilbert–Schmidt random state `G G† / Tr(G G†)` with a seeded generator.
pub fn random_density_matrix(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_matrix_with(&mut rng, dim, rank)
}

pub fn random_density_matrix_with<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    rank: usize,
) -> Result<DensityMatrix> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::Domain(format!(
            "need 1 <= rank <= dim, got rank {rank}, dim {dim}"
        )));
    }
    let g = ComplexMatrix::from_fn(dim, rank, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let gg = &g * g.adjoint();
    let tr = qmat::trace(&gg).re;
    Ok(DensityMatrix::from_map_output(gg / Complex64::new(tr, 0.0)))
}
