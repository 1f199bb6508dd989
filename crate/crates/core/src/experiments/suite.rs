//! Seeded property checks over random states, reported per invariant.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use super::io::state_file_json;
use crate::channels::{check_incoherent_operation, generalized_amplitude_damping, IncoherenceWitness};
use crate::coherence::{apply_permutation, dephase, rel_entropy_coherence, PermutationUnitary};
use crate::error::Result;
use crate::ergotropy::{
    analyze, beta_star, bound_ergotropy, bound_ergotropy_forms, ec_identity_and_bounds,
    qubit_coherent_ergotropy, work_extracted,
};
use crate::qmat::random_unitary;
use crate::states::{gibbs_state, purity, random_density_matrix_with, DensityMatrix, GibbsSpec, Hamiltonian};

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Random states per dimension for each invariant.
    pub count: usize,
    /// Replace the decomposition-identity tolerance by a negative value so the
    /// check must fail; exercises the counterexample path.
    pub inject_bad_tolerance: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            count: 200,
            inject_bad_tolerance: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub sample: usize,
    pub detail: String,
    /// The offending state in state-file layout.
    pub state: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantResult {
    pub invariant: &'static str,
    pub passed: bool,
    pub samples: usize,
    pub tolerance: f64,
    /// Largest violation measure seen; the check passes when it is at most
    /// `tolerance`.
    pub worst: f64,
    pub counterexample: Option<Counterexample>,
}

struct Sample {
    rho: DensityMatrix,
    h: Hamiltonian,
    /// Extra per-sample parameter (β, q, ...), drawn with the state.
    param: f64,
}

fn random_hamiltonian(rng: &mut ChaCha8Rng, d: usize) -> Hamiltonian {
    let mut levels: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..2.0)).collect();
    levels.sort_by(f64::total_cmp);
    let ground = levels[0];
    Hamiltonian::new(levels.into_iter().map(|e| e - ground).collect()).expect("sorted finite levels")
}

fn random_samples(seed: u64, dims: &[usize], count: usize, full_rank: bool) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(dims.len() * count);
    for &d in dims {
        for _ in 0..count {
            let rank = if full_rank { d } else { rng.gen_range(1..=d) };
            let rho = random_density_matrix_with(&mut rng, d, rank).expect("valid dimensions");
            let h = random_hamiltonian(&mut rng, d);
            out.push(Sample { rho, h, param: rng.gen() });
        }
    }
    out
}

fn check(
    invariant: &'static str,
    tolerance: f64,
    samples: &[Sample],
    measure: impl Fn(&Sample) -> Result<f64> + Sync,
) -> InvariantResult {
    let values: Vec<(f64, String)> = samples
        .par_iter()
        .map(|s| match measure(s) {
            Ok(v) if v.is_nan() => (f64::INFINITY, "measure is NaN".to_string()),
            Ok(v) => (v, String::new()),
            Err(e) => (f64::INFINITY, e.to_string()),
        })
        .collect();
    let (worst_idx, worst) = values
        .iter()
        .enumerate()
        .map(|(i, (v, _))| (i, *v))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, 0.0));
    let passed = !samples.is_empty() && worst <= tolerance;
    let counterexample = (!passed && !samples.is_empty()).then(|| {
        let s = &samples[worst_idx];
        let detail = match values[worst_idx].1.as_str() {
            "" => format!("violation {worst:e} exceeds tolerance {tolerance:e} (param {})", s.param),
            msg => msg.to_string(),
        };
        Counterexample {
            sample: worst_idx,
            detail,
            state: serde_json::from_str(&state_file_json(s.h.energies(), s.rho.matrix()))
                .expect("state file writer emits valid JSON"),
        }
    });
    InvariantResult {
        invariant,
        passed,
        samples: samples.len(),
        tolerance,
        worst,
        counterexample,
    }
}

const BETAS: [f64; 3] = [0.1, 1.0, 10.0];

fn brute_force_incoherent(populations: &[f64], h: &Hamiltonian) -> f64 {
    let e = h.energies();
    let mean = h.energy_of(populations);
    (0..populations.len())
        .permutations(populations.len())
        .map(|p| mean - p.iter().zip(e).map(|(&k, &ek)| ek * populations[k]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn run_property_suite(cfg: &SuiteConfig) -> Vec<InvariantResult> {
    let n = cfg.count.max(1);
    let s = cfg.seed;
    let general = random_samples(s, &[2, 3, 4, 6], n, false);
    let qutrits = random_samples(s.wrapping_add(1), &[3], n, true);
    let qubits = random_samples(s.wrapping_add(2), &[2], n, false);
    let small = random_samples(s.wrapping_add(3), &[2, 3, 4, 5, 6], (n / 4).max(1), false);
    let unitary_states = random_samples(s.wrapping_add(4), &[2, 3, 4], (n / 20).max(1), false);
    let gibbs: Vec<Sample> = {
        let mut rng = ChaCha8Rng::seed_from_u64(s.wrapping_add(5));
        [2usize, 5, 20]
            .iter()
            .flat_map(|&d| (0..n.div_ceil(10)).map(move |_| d))
            .map(|d| {
                let beta = 10f64.powf(rng.gen_range(-2.0..2.0));
                let h = random_hamiltonian(&mut rng, d);
                let rho = gibbs_state(&GibbsSpec { beta, hamiltonian: h.clone() });
                Sample { rho, h, param: beta }
            })
            .collect()
    };

    let identity_tol = if cfg.inject_bad_tolerance { -1.0 } else { 1e-9 };
    vec![
        check("decomposition_identity", identity_tol, &general, |x| {
            let r = analyze(&x.rho, &x.h)?;
            Ok((r.ergotropy - r.incoherent - r.coherent).abs())
        }),
        check("nonnegativity", 1e-10, &general, |x| {
            let r = analyze(&x.rho, &x.h)?;
            Ok(-r.ergotropy.min(r.incoherent).min(r.coherent))
        }),
        check("route_equivalence", 1e-10, &general, |x| {
            let r = analyze(&x.rho, &x.h)?;
            Ok((r.incoherent - r.incoherent_dephased).abs())
        }),
        check("coherent_identity", 1e-9, &qutrits, |x| {
            BETAS.iter().try_fold(0.0f64, |m, &b| {
                Ok(m.max(ec_identity_and_bounds(&x.rho, &x.h, b)?.identity_residual))
            })
        }),
        check("coherent_bounds", 1e-9, &qutrits, |x| {
            BETAS.iter().try_fold(f64::NEG_INFINITY, |m, &b| {
                let (lo, hi) = ec_identity_and_bounds(&x.rho, &x.h, b)?.slack();
                Ok(m.max(-lo).max(-hi))
            })
        }),
        check("qubit_closed_form", 1e-10, &qubits, |x| {
            let r = analyze(&x.rho, &x.h)?;
            let gap = x.h.energies()[1] - x.h.energies()[0];
            Ok((qubit_coherent_ergotropy(purity(&x.rho), r.l1_coherence, gap)? - r.coherent).abs())
        }),
        check("qubit_bound_saturation", 1e-9, &qubits, |x| bound_ergotropy(&x.rho, &x.h).map(f64::abs)),
        check("bound_ergotropy_forms", 1e-9, &general, |x| {
            let f = bound_ergotropy_forms(&x.rho, &x.h)?;
            Ok(f.relative_entropy_form.map_or(0.0, |r| (r - f.energy_form).abs()))
        }),
        check("permutation_optimality", 1e-10, &small, |x| {
            let r = analyze(&x.rho, &x.h)?;
            Ok((brute_force_incoherent(&x.rho.populations(), &x.h) - r.incoherent).abs())
        }),
        check("unitary_sampling", 1e-9, &unitary_states, |x| {
            let e = analyze(&x.rho, &x.h)?.ergotropy;
            let mut rng = ChaCha8Rng::seed_from_u64(x.param.to_bits());
            (0..1000).try_fold(f64::NEG_INFINITY, |m, _| {
                let u = random_unitary(x.rho.dim(), &mut rng);
                Ok(m.max(work_extracted(&x.rho, &x.h, &u)? - e))
            })
        }),
        check("beta_star_round_trip", 1e-8, &gibbs, |x| {
            let b = beta_star(&x.rho, &x.h)?.value();
            Ok(((b - x.param) / x.param).abs())
        }),
        check("coherence_permutation_invariance", 1e-10, &general, |x| {
            let mut rng = ChaCha8Rng::seed_from_u64(x.param.to_bits());
            let d = x.rho.dim();
            let mut perm: Vec<usize> = (0..d).collect();
            for i in (1..d).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let phases = (0..d).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
            let v = PermutationUnitary::new(perm, phases)?;
            Ok((rel_entropy_coherence(&apply_permutation(&x.rho, &v)?) - rel_entropy_coherence(&x.rho)).abs())
        }),
        check("dephasing_purity", 1e-12, &general, |x| Ok(purity(&dephase(&x.rho)) - purity(&x.rho))),
        check("gad_incoherent", 1e-10, &qubits, |x| {
            let gamma = (x.param * 7.0).fract();
            let channel = generalized_amplitude_damping(x.param, gamma)?;
            Ok(match check_incoherent_operation(&channel) {
                IncoherenceWitness::Incoherent => 0.0,
                IncoherenceWitness::Violation { off_diagonal_mass, .. } => off_diagonal_mass,
            })
        }),
    ]
}
