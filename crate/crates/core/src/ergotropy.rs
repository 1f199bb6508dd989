//! Ergotropy and its split into incoherent and coherent contributions.
//!
//! For a state `ρ` with eigenvalues `r_1 ≥ r_2 ≥ …` and a Hamiltonian with
//! ascending levels `ε_1 ≤ ε_2 ≤ …`:
//!
//! * the passive state is `P_ρ = Σ_k r_k |ε_k⟩⟨ε_k|` and the ergotropy is
//!   `𝓔 = Tr{H(ρ - P_ρ)}`;
//! * the incoherent part `𝓔_i` is the work extractable by reshuffling the
//!   energy basis only. It is computed either by sorting the populations
//!   (permutation route, which also yields `σ_ρ`) or as the ergotropy of the
//!   dephased state (dephasing route, which yields `P_δ`);
//! * the coherent part is `𝓔_c = Tr{H(σ_ρ - P_ρ)} = 𝓔 - 𝓔_i`.
//!
//! The Gibbs state whose entropy matches `S(ρ)` fixes `β*`; the bound
//! ergotropy `Δ𝓔_c = Tr{H(P_ρ - ρ_β*)}` measures how far `P_ρ` is from
//! being thermal.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::coherence::{apply_permutation, dephase, l1_coherence, PermutationUnitary};
use crate::error::{Error, Result};
use crate::qmat::{self, ComplexMatrix, EigenDecomposition};
use crate::states::{
    entropy_of_spectrum, ground_state_limit, relative_entropy_diag_to_gibbs, DensityMatrix,
    GibbsSpec, Hamiltonian,
};

/// Largest inverse temperature tried while bracketing `β*`.
pub const BETA_CAP: f64 = 1e6;
/// Required entropy match at the returned `β*`, in nats.
pub const BETA_STAR_ENTROPY_TOL: f64 = 1e-10;
const BISECTION_MAX_ITER: usize = 2_000;

/// Inverse temperature matching the entropy of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaStar {
    Finite(f64),
    /// Zero-entropy state, or an entropy below what any finite `β` reaches.
    Infinite,
}

impl BetaStar {
    pub fn value(self) -> f64 {
        match self {
            BetaStar::Finite(b) => b,
            BetaStar::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            BetaStar::Finite(b) => Some(b),
            BetaStar::Infinite => None,
        }
    }
}

impl Serialize for BetaStar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BetaStar::Finite(b) => serializer.serialize_f64(*b),
            BetaStar::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl std::fmt::Display for BetaStar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BetaStar::Finite(b) => write!(f, "{b}"),
            BetaStar::Infinite => f.write_str("inf"),
        }
    }
}

/// Passive state of `ρ` from its eigendecomposition, together with the
/// ergotropic unitary `E_ρ = Σ_k |ε_k⟩⟨r_k|` and the descending spectrum.
fn passive_from_eigen(eig: &EigenDecomposition) -> (Vec<f64>, ComplexMatrix) {
    let d = eig.values.len();
    let spectrum: Vec<f64> = eig.values.iter().rev().map(|&v| v.max(0.0)).collect();
    // row k of E_ρ is ⟨r_k| with r_k the k-th largest eigenvalue
    let unitary = ComplexMatrix::from_fn(d, d, |k, j| eig.vectors[(j, d - 1 - k)].conj());
    (spectrum, unitary)
}

fn sorted_descending(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `P_ρ` and the unitary `E_ρ` with `E_ρ ρ E_ρ† = P_ρ`.
pub fn passive_state(rho: &DensityMatrix, h: &Hamiltonian) -> Result<(DensityMatrix, ComplexMatrix)> {
    h.check_dim(rho.dim())?;
    let (spectrum, unitary) = passive_from_eigen(&rho.eigen());
    Ok((DensityMatrix::from_map_output(qmat::diagonal(&spectrum)), unitary))
}

/// `W(ρ, U) = Tr{H(ρ - UρU†)}`.
pub fn work_extracted(rho: &DensityMatrix, h: &Hamiltonian, u: &ComplexMatrix) -> Result<f64> {
    h.check_dim(rho.dim())?;
    let out = rho.conjugate_by(u)?;
    Ok(h.mean_energy(rho) - h.mean_energy(&out))
}

/// `𝓔 = Σ_k ε_k (ρ_kk - r_k)`.
pub fn ergotropy(rho: &DensityMatrix, h: &Hamiltonian) -> Result<f64> {
    h.check_dim(rho.dim())?;
    Ok(h.mean_energy(rho) - h.energy_of(&rho.passive_populations()))
}

/// Permutation route to the incoherent ergotropy.
#[derive(Debug, Clone)]
pub struct IncoherentErgotropy {
    pub value: f64,
    /// `π̃`, listing the populations in descending order.
    pub perm: PermutationUnitary,
    /// `σ_ρ = V_π̃ ρ V_π̃†`.
    pub sigma: DensityMatrix,
}

pub fn incoherent_ergotropy_perm(rho: &DensityMatrix, h: &Hamiltonian) -> Result<IncoherentErgotropy> {
    h.check_dim(rho.dim())?;
    let perm = PermutationUnitary::sorting_descending(&rho.populations());
    let sigma = apply_permutation(rho, &perm)?;
    let value = h.mean_energy(rho) - h.mean_energy(&sigma);
    Ok(IncoherentErgotropy { value, perm, sigma })
}

/// Dephasing route: `𝓔_i = 𝓔(δ_ρ)`. Also returns `P_δ`.
pub fn incoherent_ergotropy_dephased(rho: &DensityMatrix, h: &Hamiltonian) -> Result<(f64, DensityMatrix)> {
    h.check_dim(rho.dim())?;
    let delta = dephase(rho);
    let (p_delta, _) = passive_state(&delta, h)?;
    let value = h.mean_energy(&delta) - h.mean_energy(&p_delta);
    Ok((value, p_delta))
}

/// `𝓔_c = Tr{H(σ_ρ - P_ρ)}`.
pub fn coherent_ergotropy(rho: &DensityMatrix, h: &Hamiltonian) -> Result<f64> {
    let inc = incoherent_ergotropy_perm(rho, h)?;
    Ok(h.mean_energy(&inc.sigma) - h.energy_of(&rho.passive_populations()))
}

/// Closed form of the coherent ergotropy of a qubit from its purity `p`,
/// its l1 coherence `c` and the level spacing.
pub fn qubit_coherent_ergotropy(purity: f64, l1: f64, gap: f64) -> Result<f64> {
    const TOL: f64 = 1e-12;
    if !(0.5 - TOL..=1.0 + TOL).contains(&purity) {
        return Err(Error::Domain(format!("qubit purity {purity} outside [1/2, 1]")));
    }
    if l1 < 0.0 {
        return Err(Error::Domain(format!("negative l1 coherence {l1}")));
    }
    let radius = (2.0 * purity - 1.0).max(0.0);
    let population_term = radius - l1 * l1;
    if population_term < -TOL {
        return Err(Error::Domain(format!(
            "l1 coherence {l1} too large for purity {purity} (c^2 > 2p - 1)"
        )));
    }
    Ok(0.5 * gap * (radius.sqrt() - population_term.max(0.0).sqrt()))
}

/// `β*` for a target entropy, by bisection on the (monotone) Gibbs entropy.
pub fn beta_star_for_entropy(h: &Hamiltonian, entropy: f64) -> Result<BetaStar> {
    if entropy <= 0.0 {
        return Ok(BetaStar::Infinite);
    }
    let gibbs_entropy = |beta: f64| GibbsSpec { beta, hamiltonian: h.clone() }.entropy();
    if entropy >= gibbs_entropy(0.0) {
        return Ok(BetaStar::Finite(0.0));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while gibbs_entropy(hi) >= entropy {
        lo = hi;
        hi *= 2.0;
        if hi > BETA_CAP {
            return Ok(BetaStar::Infinite);
        }
    }
    let mut iterations = 0;
    while iterations < BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gibbs_entropy(mid) >= entropy {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let beta = 0.5 * (lo + hi);
    let residual = (gibbs_entropy(beta) - entropy).abs();
    if !beta.is_finite() || residual > BETA_STAR_ENTROPY_TOL {
        return Err(Error::NonConvergence {
            what: "beta* bisection",
            iterations,
            detail: format!("bracket [{lo}, {hi}], entropy residual {residual:e}"),
        });
    }
    Ok(BetaStar::Finite(beta))
}

pub fn beta_star(rho: &DensityMatrix, h: &Hamiltonian) -> Result<BetaStar> {
    h.check_dim(rho.dim())?;
    beta_star_for_entropy(h, entropy_of_spectrum(&rho.spectrum_descending()))
}

/// Energy of the `β*` Gibbs state, or of its ground-state limit.
fn thermal_energy(h: &Hamiltonian, beta: BetaStar) -> f64 {
    match beta {
        BetaStar::Finite(b) => GibbsSpec { beta: b, hamiltonian: h.clone() }.mean_energy(),
        BetaStar::Infinite => h.mean_energy(&ground_state_limit(h)),
    }
}

/// The two expressions of the bound ergotropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundErgotropyForms {
    pub beta_star: BetaStar,
    /// `Tr{H(P_ρ - ρ_β*)}`.
    pub energy_form: f64,
    /// `D(P_ρ||ρ_β*) / β*`, only defined for finite positive `β*`.
    pub relative_entropy_form: Option<f64>,
}

pub fn bound_ergotropy_forms(rho: &DensityMatrix, h: &Hamiltonian) -> Result<BoundErgotropyForms> {
    h.check_dim(rho.dim())?;
    bound_forms_from_spectrum(&rho.passive_populations(), &rho.spectrum_descending(), h)
}

/// `energy_spectrum` feeds the energy of `P_ρ`; the clipped `spectrum` feeds
/// entropies.
fn bound_forms_from_spectrum(
    energy_spectrum: &[f64],
    spectrum: &[f64],
    h: &Hamiltonian,
) -> Result<BoundErgotropyForms> {
    let beta_star = beta_star_for_entropy(h, entropy_of_spectrum(spectrum))?;
    let energy_form = h.energy_of(energy_spectrum) - thermal_energy(h, beta_star);
    let relative_entropy_form = match beta_star {
        BetaStar::Finite(b) if b > 0.0 => {
            let spec = GibbsSpec { beta: b, hamiltonian: h.clone() };
            Some(relative_entropy_diag_to_gibbs(spectrum, &spec)? / b)
        }
        _ => None,
    };
    Ok(BoundErgotropyForms {
        beta_star,
        energy_form,
        relative_entropy_form,
    })
}

/// `Δ𝓔_c = Tr{H(P_ρ - ρ_β*)}`. For pure states this is `Tr{H P_ρ} - ε_1`.
pub fn bound_ergotropy(rho: &DensityMatrix, h: &Hamiltonian) -> Result<f64> {
    Ok(bound_ergotropy_forms(rho, h)?.energy_form)
}

/// The relative-entropy identity for `β𝓔_c` and the bounds that follow from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsCheck {
    pub beta: f64,
    /// `β 𝓔_c`.
    pub scaled_coherent: f64,
    /// `C(ρ)`.
    pub coherence: f64,
    /// `D(P_δ||ρ_β)`.
    pub d_dephased_passive: f64,
    /// `D(P_ρ||ρ_β)`.
    pub d_passive: f64,
    /// `|β𝓔_c - C - D(P_δ||ρ_β) + D(P_ρ||ρ_β)|`.
    pub identity_residual: f64,
    /// `C - D(P_ρ||ρ_β)`, a lower bound on `β𝓔_c`.
    pub lower: f64,
    /// `C + D(P_δ||ρ_β)`, an upper bound on `β𝓔_c`.
    pub upper: f64,
}

impl BoundsCheck {
    /// `β𝓔_c - lower` and `upper - β𝓔_c`; both non-negative when the bounds hold.
    pub fn slack(&self) -> (f64, f64) {
        (self.scaled_coherent - self.lower, self.upper - self.scaled_coherent)
    }
}

/// Everything the decomposition needs, computed from one eigendecomposition.
struct Pieces {
    spectrum: Vec<f64>,
    clipped: Vec<f64>,
    unitary: ComplexMatrix,
    populations: Vec<f64>,
    sorted_populations: Vec<f64>,
    coherence: f64,
    coherent: f64,
}

impl Pieces {
    fn new(rho: &DensityMatrix, h: &Hamiltonian) -> Result<Self> {
        h.check_dim(rho.dim())?;
        let eig = rho.eigen();
        let (spectrum, unitary) = passive_from_eigen(&eig);
        // solver noise near zero is dropped for entropies only
        let mut clipped = spectrum.clone();
        if !eig.exact {
            for r in &mut clipped {
                if *r <= qmat::CLIP_TOL {
                    *r = 0.0;
                }
            }
        }
        let populations = rho.populations();
        let sorted_populations = sorted_descending(&populations);
        let coherence =
            (entropy_of_spectrum(&populations) - entropy_of_spectrum(&clipped)).max(0.0);
        let coherent = h.energy_of(&sorted_populations) - h.energy_of(&spectrum);
        Ok(Self {
            spectrum,
            clipped,
            unitary,
            populations,
            sorted_populations,
            coherence,
            coherent,
        })
    }

    fn bounds(&self, h: &Hamiltonian, beta: f64) -> Result<BoundsCheck> {
        let spec = GibbsSpec::new(beta, h.clone())?;
        let d_dephased_passive = relative_entropy_diag_to_gibbs(&self.sorted_populations, &spec)?;
        let d_passive = relative_entropy_diag_to_gibbs(&self.clipped, &spec)?;
        let scaled_coherent = beta * self.coherent;
        let identity_residual =
            (scaled_coherent - self.coherence - d_dephased_passive + d_passive).abs();
        Ok(BoundsCheck {
            beta,
            scaled_coherent,
            coherence: self.coherence,
            d_dephased_passive,
            d_passive,
            identity_residual,
            lower: self.coherence - d_passive,
            upper: self.coherence + d_dephased_passive,
        })
    }
}

/// Residual of `β𝓔_c = C + D(P_δ||ρ_β) - D(P_ρ||ρ_β)` and the bounds
/// `C - D(P_ρ||ρ_β) ≤ β𝓔_c ≤ C + D(P_δ||ρ_β)` at a given finite `β ≥ 0`.
pub fn ec_identity_and_bounds(rho: &DensityMatrix, h: &Hamiltonian, beta: f64) -> Result<BoundsCheck> {
    Pieces::new(rho, h)?.bounds(h, beta)
}

/// `𝓔_i = (D(δ_ρ||ρ_β) - D(P_δ||ρ_β)) / β` for `β > 0`.
pub fn incoherent_ergotropy_relent_form(rho: &DensityMatrix, h: &Hamiltonian, beta: f64) -> Result<f64> {
    h.check_dim(rho.dim())?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Domain(format!("need finite beta > 0, got {beta}")));
    }
    let spec = GibbsSpec::new(beta, h.clone())?;
    let populations = rho.populations();
    let d_dephased = relative_entropy_diag_to_gibbs(&populations, &spec)?;
    let d_dephased_passive = relative_entropy_diag_to_gibbs(&sorted_descending(&populations), &spec)?;
    Ok((d_dephased - d_dephased_passive) / beta)
}

/// `β𝓔_c - C(ρ) = D(P_δ||ρ_β) - D(P_ρ||ρ_β)`.
///
/// A negative value rules out a thermal operation taking `P_δ` to `P_ρ`; a
/// positive value rules out the reverse conversion.
pub fn athermality_gap(rho: &DensityMatrix, h: &Hamiltonian, beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Domain(format!("need finite beta > 0, got {beta}")));
    }
    let pieces = Pieces::new(rho, h)?;
    Ok(beta * pieces.coherent - pieces.coherence)
}

/// Qutrit family saturating the lower bound at inverse temperature `beta`:
/// thermal populations placed as `(g_1, g_3, g_2)` with coherence `c`
/// between the first two levels.
pub fn qutrit_lower_bound_state(beta: f64, energies: [f64; 3], c: Complex64) -> Result<DensityMatrix> {
    let spec = GibbsSpec::new(beta, Hamiltonian::new(energies.to_vec())?)?;
    let g = spec.weights();
    let limit = (g[0] * g[2]).sqrt();
    if c.norm() > limit * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "|c| = {} exceeds sqrt(g1 g3) = {limit}",
            c.norm()
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    let m = ComplexMatrix::from_row_slice(
        3,
        3,
        &[re(g[0]), c, zero, c.conj(), re(g[2]), zero, zero, zero, re(g[1])],
    );
    DensityMatrix::new(m)
}

/// Bound ergotropy of a qutrit with levels `(0, R ε_3, ε_3)` and spectrum
/// `(r1, r2, 1 - r1 - r2)`, given `β*`. `beta_star` may be `f64::INFINITY`.
pub fn three_level_delta_ec(r1: f64, r2: f64, ratio: f64, e3: f64, beta_star: f64) -> Result<f64> {
    const TOL: f64 = 1e-12;
    let r3 = 1.0 - r1 - r2;
    if !(r1 + TOL >= r2 && r2 + TOL >= r3 && r3 >= -TOL) {
        return Err(Error::Domain(format!(
            "spectrum ({r1}, {r2}, {r3}) is not ordered and non-negative"
        )));
    }
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::Domain(format!("level ratio R = {ratio} outside [0, 1]")));
    }
    if !(e3 > 0.0 && e3.is_finite()) {
        return Err(Error::Domain(format!("top level must be positive, got {e3}")));
    }
    if beta_star.is_nan() || beta_star < 0.0 {
        return Err(Error::Domain(format!("invalid beta* {beta_star}")));
    }
    // R = 0 makes the middle level degenerate with the ground level.
    let w2 = if ratio == 0.0 { 1.0 } else { (-beta_star * ratio * e3).exp() };
    let w3 = (-beta_star * e3).exp();
    let z = 1.0 + w2 + w3;
    Ok(e3 * (r2 * (ratio - 1.0) + 1.0 - r1 - (ratio * w2 + w3) / z))
}

/// Full decomposition of the ergotropy of a state.
#[derive(Debug, Clone)]
pub struct ErgotropyReport {
    pub ergotropy: f64,
    /// `𝓔_i` by the permutation route.
    pub incoherent: f64,
    /// `𝓔_i` by the dephasing route.
    pub incoherent_dephased: f64,
    pub coherent: f64,
    pub beta_star: BetaStar,
    pub bound_ergotropy: f64,
    /// Relative-entropy identity and bounds at `bounds_beta`, when it is
    /// finite and positive.
    pub bounds: Option<BoundsCheck>,
    /// Energy-unit bounds on `𝓔_c`: `lower / β` and `upper / β`.
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub passive_state: DensityMatrix,
    pub dephased_passive: DensityMatrix,
    pub sigma_state: DensityMatrix,
    pub dephased: DensityMatrix,
    pub ergotropic_unitary: ComplexMatrix,
    /// Relative entropy of coherence, nats.
    pub coherence: f64,
    pub l1_coherence: f64,
    pub optimal_perm: PermutationUnitary,
    pub degenerate_hamiltonian: bool,
}

/// Decomposition with bounds reported at `β*`.
pub fn analyze(rho: &DensityMatrix, h: &Hamiltonian) -> Result<ErgotropyReport> {
    analyze_with_beta(rho, h, None)
}

/// Decomposition with bounds reported at an explicit `β`, or at `β*` when
/// `beta` is `None`. Bounds are omitted unless the chosen `β` is finite and
/// positive.
pub fn analyze_with_beta(rho: &DensityMatrix, h: &Hamiltonian, beta: Option<f64>) -> Result<ErgotropyReport> {
    let pieces = Pieces::new(rho, h)?;
    let mean = h.energy_of(&pieces.populations);
    let passive_energy = h.energy_of(&pieces.spectrum);
    let ergotropy = mean - passive_energy;

    let inc = incoherent_ergotropy_perm(rho, h)?;
    let incoherent_dephased = mean - h.energy_of(&pieces.sorted_populations);

    let forms = bound_forms_from_spectrum(&pieces.spectrum, &pieces.clipped, h)?;
    let bounds_beta = match beta {
        Some(b) => Some(b),
        None => forms.beta_star.finite(),
    };
    let bounds = match bounds_beta {
        Some(b) if b.is_finite() && b > 0.0 => Some(pieces.bounds(h, b)?),
        Some(b) if !(b.is_finite() && b >= 0.0) => {
            return Err(Error::Domain(format!("invalid beta {b}")))
        }
        _ => None,
    };

    Ok(ErgotropyReport {
        ergotropy,
        incoherent: inc.value,
        incoherent_dephased,
        coherent: pieces.coherent,
        beta_star: forms.beta_star,
        bound_ergotropy: forms.energy_form,
        lower_bound: bounds.map(|b| b.lower / b.beta),
        upper_bound: bounds.map(|b| b.upper / b.beta),
        bounds,
        passive_state: DensityMatrix::from_map_output(qmat::diagonal(&pieces.spectrum)),
        dephased_passive: DensityMatrix::from_map_output(qmat::diagonal(&pieces.sorted_populations)),
        sigma_state: inc.sigma,
        dephased: dephase(rho),
        ergotropic_unitary: pieces.unitary,
        coherence: pieces.coherence,
        l1_coherence: l1_coherence(rho),
        optimal_perm: inc.perm,
        degenerate_hamiltonian: h.is_degenerate(),
    })
}
