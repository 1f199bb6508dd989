//! Single bosonic mode in a truncated Fock space: displaced thermal states
//! `D(α) ρ_β D(α)†` with `H = ω a†a`.
//!
//! The displacement follows `D(α) = exp(α a - α* a†)`, the complex conjugate
//! of the more common `exp(α a† - α* a)`. The two differ by `α → -α*`, and
//! every quantity computed here depends on `|α|` only.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ergotropy::{analyze_with_beta, ErgotropyReport};
use crate::qmat::{self, ComplexMatrix};
use crate::states::{gibbs_state, DensityMatrix, GibbsSpec, Hamiltonian};

/// Threshold shared by all truncation diagnostics.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Default truncation for `|α| ≤ 3`, `n̄ ≤ 2`.
pub const DEFAULT_N_MAX: usize = 60;
/// Largest truncation the adaptive sweep will try.
pub const N_MAX_CAP: usize = 200;
/// Truncation increment used by the convergence check and adaptive growth.
pub const N_STEP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockContext {
    n_max: usize,
    omega: f64,
}

impl FockContext {
    /// Fock levels `0..n_max`, mode frequency `omega` (energy units, ħ = 1).
    pub fn new(n_max: usize, omega: f64) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::Domain(format!("truncation n_max = {n_max} < 2")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Domain(format!("mode frequency must be positive, got {omega}")));
        }
        Ok(Self { n_max, omega })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn with_n_max(&self, n_max: usize) -> Result<Self> {
        Self::new(n_max, self.omega)
    }

    /// `ε_k = ω k`, zero-point omitted.
    pub fn hamiltonian(&self) -> Hamiltonian {
        Hamiltonian::equally_spaced(self.n_max, self.omega).expect("positive spacing is ascending")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacedThermalSpec {
    pub alpha: Complex64,
    pub n_bar: f64,
}

impl DisplacedThermalSpec {
    pub fn new(alpha: Complex64, n_bar: f64) -> Result<Self> {
        if !(n_bar >= 0.0 && n_bar.is_finite()) {
            return Err(Error::Domain(format!("thermal occupation must be >= 0, got {n_bar}")));
        }
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite displacement {alpha}")));
        }
        Ok(Self { alpha, n_bar })
    }

    pub fn real(alpha: f64, n_bar: f64) -> Result<Self> {
        Self::new(Complex64::new(alpha, 0.0), n_bar)
    }

    /// `β = ln(1 + 1/n̄) / ω`; `None` for the pure coherent state `n̄ = 0`.
    pub fn beta(&self, omega: f64) -> Option<f64> {
        (self.n_bar > 0.0).then(|| (1.0 / self.n_bar).ln_1p() / omega)
    }

    /// `ω(|α|² + n̄)` in the untruncated mode.
    pub fn energy(&self, omega: f64) -> f64 {
        omega * (self.alpha.norm_sqr() + self.n_bar)
    }

    /// `ω|α|²` in the untruncated mode.
    pub fn ergotropy(&self, omega: f64) -> f64 {
        omega * self.alpha.norm_sqr()
    }
}

/// Lowering operator: `√k` on the first superdiagonal.
pub fn annihilation_matrix(ctx: &FockContext) -> ComplexMatrix {
    let n = ctx.n_max;
    let mut a = ComplexMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// `D(α) = exp(α a - α* a†)` on the truncated space.
pub fn displacement_matrix(ctx: &FockContext, alpha: Complex64) -> ComplexMatrix {
    let a = annihilation_matrix(ctx);
    let generator = a.map(|z| z * alpha) - a.adjoint().map(|z| z * alpha.conj());
    qmat::matrix_exp(&generator).expect("displacement generator is square")
}

/// Population of Fock level `n` in the untruncated displaced thermal state:
/// `n̄^n/(n̄+1)^{n+1} e^{-|α|²/(n̄+1)} L_n(-|α|²/(n̄(n̄+1)))`, Poisson for `n̄ = 0`.
pub fn displaced_thermal_population(n: usize, alpha_sq: f64, n_bar: f64) -> f64 {
    if n_bar == 0.0 {
        if alpha_sq == 0.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
        return (-alpha_sq + n as f64 * alpha_sq.ln() - ln_fact).exp();
    }
    let y = alpha_sq / (n_bar * (n_bar + 1.0));
    let ln_laguerre = ln_laguerre_negative(n, y);
    let ln_p = n as f64 * (n_bar / (n_bar + 1.0)).ln() - (n_bar + 1.0).ln()
        - alpha_sq / (n_bar + 1.0)
        + ln_laguerre;
    ln_p.exp()
}

/// `ln L_n(-y)` for `y ≥ 0`, by the forward three-term recurrence with
/// rescaling (all terms are positive for a negative argument).
fn ln_laguerre_negative(n: usize, y: f64) -> f64 {
    const RESCALE: f64 = 1e150;
    let x = -y;
    let mut prev = 1.0f64;
    if n == 0 {
        return 0.0;
    }
    let mut cur = 1.0 - x;
    let mut ln_scale = 0.0f64;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            ln_scale += RESCALE.ln();
        }
    }
    cur.ln() + ln_scale
}

/// `1 - Σ_{n<N} P(n)` for the untruncated populations.
pub fn population_deficit(n_max: usize, spec: &DisplacedThermalSpec) -> f64 {
    let alpha_sq = spec.alpha.norm_sqr();
    let kept: f64 = (0..n_max)
        .map(|n| displaced_thermal_population(n, alpha_sq, spec.n_bar))
        .sum();
    (1.0 - kept).max(0.0)
}

fn thermal_state(ctx: &FockContext, spec: &DisplacedThermalSpec) -> DensityMatrix {
    match spec.beta(ctx.omega) {
        Some(beta) => gibbs_state(&GibbsSpec {
            beta,
            hamiltonian: ctx.hamiltonian(),
        }),
        None => {
            let mut pops = vec![0.0; ctx.n_max];
            pops[0] = 1.0;
            DensityMatrix::from_diagonal(&pops).expect("vacuum is a valid state")
        }
    }
}

fn build_state(ctx: &FockContext, spec: &DisplacedThermalSpec) -> DensityMatrix {
    let thermal = thermal_state(ctx, spec);
    if spec.alpha.norm() == 0.0 {
        return thermal;
    }
    let d = displacement_matrix(ctx, spec.alpha);
    thermal.conjugate_by(&d).expect("displacement matches the Fock dimension")
}

/// Smallest multiple of [`N_STEP`] (at least `DEFAULT_N_MAX`) whose
/// population deficit is below [`CONVERGENCE_TOL`].
pub fn suggested_n_max(spec: &DisplacedThermalSpec) -> usize {
    let mut n = DEFAULT_N_MAX;
    while population_deficit(n, spec) >= CONVERGENCE_TOL && n < 10 * N_MAX_CAP {
        n += N_STEP;
    }
    n
}

/// `D(α) ρ_β D(α)†` on the truncated space. Fails when the truncation
/// discards more than [`CONVERGENCE_TOL`] of the population.
pub fn displaced_thermal_state(ctx: &FockContext, spec: &DisplacedThermalSpec) -> Result<DensityMatrix> {
    let deficit = population_deficit(ctx.n_max, spec);
    if deficit >= CONVERGENCE_TOL {
        return Err(Error::Truncation {
            n_max: ctx.n_max,
            deficit,
            suggested: suggested_n_max(spec),
        });
    }
    Ok(build_state(ctx, spec))
}

#[derive(Debug, Clone)]
pub struct GaussianReport {
    pub n_max: usize,
    pub alpha: Complex64,
    pub n_bar: f64,
    /// `Tr{Hρ}` of the truncated state.
    pub energy: f64,
    /// Inverse temperature of the undisplaced thermal state.
    pub beta: Option<f64>,
    /// `β𝓔_c - C(ρ) - D(P_δ||ρ_β)`; zero when the upper bound is saturated.
    pub saturation_residual: Option<f64>,
    pub report: ErgotropyReport,
}

impl GaussianReport {
    /// `𝓔_c / 𝓔`, undefined at zero ergotropy.
    pub fn coherent_fraction(&self) -> Option<f64> {
        (self.report.ergotropy > 0.0).then(|| self.report.coherent / self.report.ergotropy)
    }
}

fn report_unchecked(ctx: &FockContext, spec: &DisplacedThermalSpec) -> Result<GaussianReport> {
    let rho = build_state(ctx, spec);
    let h = ctx.hamiltonian();
    let beta = spec.beta(ctx.omega);
    let report = analyze_with_beta(&rho, &h, beta)?;
    let saturation_residual = report.bounds.map(|b| b.scaled_coherent - b.upper);
    Ok(GaussianReport {
        n_max: ctx.n_max,
        alpha: spec.alpha,
        n_bar: spec.n_bar,
        energy: h.mean_energy(&rho),
        beta,
        saturation_residual,
        report,
    })
}

/// Ergotropy decomposition of a displaced thermal state, with the bounds
/// evaluated at the temperature of the undisplaced thermal state.
pub fn gaussian_ergotropy_report(ctx: &FockContext, spec: &DisplacedThermalSpec) -> Result<GaussianReport> {
    displaced_thermal_state(ctx, spec)?;
    report_unchecked(ctx, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceDiagnostics {
    pub n_max: usize,
    /// Untruncated population missing from levels `0..n_max`.
    pub trace_deficit: f64,
    /// Population of the truncated state on levels `n_max - 5` and above.
    pub tail_population: f64,
    /// Change of `𝓔` when the truncation grows by [`N_STEP`].
    pub delta_ergotropy: f64,
    /// Change of `𝓔_c` when the truncation grows by [`N_STEP`].
    pub delta_coherent: f64,
    pub converged: bool,
}

fn diagnostics(
    ctx: &FockContext,
    spec: &DisplacedThermalSpec,
    at_n: &GaussianReport,
    at_next: &GaussianReport,
) -> ConvergenceDiagnostics {
    let trace_deficit = population_deficit(ctx.n_max, spec);
    let pops = at_n.report.dephased.populations();
    let tail_population: f64 = pops[ctx.n_max.saturating_sub(5)..].iter().sum();
    let delta_ergotropy = (at_next.report.ergotropy - at_n.report.ergotropy).abs();
    let delta_coherent = (at_next.report.coherent - at_n.report.coherent).abs();
    let converged = [trace_deficit, tail_population, delta_ergotropy, delta_coherent]
        .iter()
        .all(|&x| x < CONVERGENCE_TOL);
    ConvergenceDiagnostics {
        n_max: ctx.n_max,
        trace_deficit,
        tail_population,
        delta_ergotropy,
        delta_coherent,
        converged,
    }
}

/// Truncation diagnostics at `ctx.n_max`, comparing against `n_max + 20`.
pub fn convergence_check(ctx: &FockContext, spec: &DisplacedThermalSpec) -> Result<ConvergenceDiagnostics> {
    let at_n = report_unchecked(ctx, spec)?;
    let at_next = report_unchecked(&ctx.with_n_max(ctx.n_max + N_STEP)?, spec)?;
    Ok(diagnostics(ctx, spec, &at_n, &at_next))
}

/// Grows the truncation from `ctx.n_max` in steps of [`N_STEP`] until the
/// convergence check passes, without exceeding `n_cap` for the comparison
/// truncation.
pub fn adaptive_report(
    ctx: &FockContext,
    spec: &DisplacedThermalSpec,
    n_cap: usize,
) -> Result<(GaussianReport, ConvergenceDiagnostics)> {
    let mut ctx = *ctx;
    let mut current = report_unchecked(&ctx, spec)?;
    loop {
        let next_ctx = ctx.with_n_max(ctx.n_max + N_STEP)?;
        if next_ctx.n_max > n_cap {
            return Err(Error::Truncation {
                n_max: ctx.n_max,
                deficit: population_deficit(ctx.n_max, spec),
                suggested: suggested_n_max(spec).max(ctx.n_max + N_STEP),
            });
        }
        let next = report_unchecked(&next_ctx, spec)?;
        let diag = diagnostics(&ctx, spec, &current, &next);
        if diag.converged {
            return Ok((current, diag));
        }
        ctx = next_ctx;
        current = next;
    }
}
