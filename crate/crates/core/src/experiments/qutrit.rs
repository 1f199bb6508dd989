//! Zero level set of the three-level bound-ergotropy gap `ΔE_c(r1, r2)`.
//!
//! Levels are `(0, R ε3, ε3)` with `ε3 = 1`. `ΔE_c ≥ 0`, so its zeros are
//! minima and sign-change bisection on `ΔE_c` itself cannot find them.
//! Along each line of fixed `r1` we bisect the sign of the derivative
//! `∂ΔE_c/∂r2 ∝ ln(r2/r3) - β*(ε3 - ε2)` instead, keep the stationary points
//! where `ΔE_c` vanishes, and test the segment end points separately.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::ergotropy::{beta_star_for_entropy, bound_ergotropy, three_level_delta_ec, BetaStar};
use crate::states::{entropy_of_spectrum, DensityMatrix, Hamiltonian};

pub const DEFAULT_R_LIST: [f64; 6] = [0.0, 0.1, 0.3, 0.5, 0.7, 1.0];
pub const DEFAULT_GRID: usize = 400;
/// Largest `|ΔE_c|` accepted on the curve.
pub const LOCUS_TOL: f64 = 1e-8;
/// Roots closer than this along `r2` are always one root.
const CLUSTER_TOL: f64 = 1e-12;
const SAMPLES: usize = 64;
const BISECTION_ITER: usize = 100;

fn hamiltonian(ratio: f64) -> Hamiltonian {
    Hamiltonian::new(vec![0.0, ratio, 1.0]).expect("ratio in [0, 1] gives ascending levels")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocusPoint {
    pub ratio: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub beta_star: BetaStar,
    /// `ΔE_c` from the general pipeline at this spectrum.
    pub delta_ec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Anomaly {
    pub ratio: f64,
    pub r1: f64,
    pub roots: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SaturationCurve {
    pub ratio: f64,
    pub points: Vec<LocusPoint>,
    /// Grid values of `r1` with more than one root.
    pub anomalies: Vec<Anomaly>,
    /// Grid values of `r1` with no root.
    pub missing: Vec<f64>,
}

impl SaturationCurve {
    /// One root for every grid value and all points within [`LOCUS_TOL`].
    pub fn is_single_valued(&self) -> bool {
        self.anomalies.is_empty()
            && self.missing.is_empty()
            && self.points.iter().all(|p| p.delta_ec.abs() < LOCUS_TOL)
    }
}

/// `β*` and `ΔE_c` from the closed form at spectrum `(r1, r2, 1 - r1 - r2)`.
pub fn delta_ec_at(r1: f64, r2: f64, ratio: f64) -> Result<(f64, BetaStar)> {
    let r3 = (1.0 - r1 - r2).max(0.0);
    let h = hamiltonian(ratio);
    let beta = beta_star_for_entropy(&h, entropy_of_spectrum(&[r1, r2, r3]))?;
    Ok((three_level_delta_ec(r1, r2, ratio, 1.0, beta.value())?, beta))
}

/// `ΔE_c` recomputed through the state-level pipeline.
pub fn pipeline_delta_ec(r1: f64, r2: f64, ratio: f64) -> Result<f64> {
    let r3 = (1.0 - r1 - r2).max(0.0);
    let rho = DensityMatrix::from_diagonal(&[r1, r2, r3])?;
    bound_ergotropy(&rho, &hamiltonian(ratio))
}

fn stationarity(r1: f64, r2: f64, ratio: f64) -> Result<f64> {
    let r3 = 1.0 - r1 - r2;
    if r3 <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let log_ratio = (r2 / r3).ln();
    if ratio == 1.0 {
        return Ok(log_ratio);
    }
    let (_, beta) = delta_ec_at(r1, r2, ratio)?;
    Ok(match beta {
        BetaStar::Finite(b) => log_ratio - b * (1.0 - ratio),
        BetaStar::Infinite => f64::NEG_INFINITY,
    })
}

/// Allowed `r2` for a given `r1`: `r2 ≥ r3` and `r2 ≤ min(r1, 1 - r1)`.
pub fn r2_interval(r1: f64) -> (f64, f64) {
    let lo = 0.5 * (1.0 - r1);
    (lo, r1.min(1.0 - r1).max(lo))
}

/// Every `r2` with `ΔE_c(r1, r2) = 0` to [`LOCUS_TOL`], ascending.
pub fn saturation_roots(ratio: f64, r1: f64) -> Result<Vec<f64>> {
    let (lo, hi) = r2_interval(r1);
    let mut roots = Vec::new();
    let consider = |r2: f64, roots: &mut Vec<f64>| -> Result<()> {
        if delta_ec_at(r1, r2, ratio)?.0.abs() < LOCUS_TOL {
            roots.push(r2);
        }
        Ok(())
    };
    consider(lo, &mut roots)?;
    if hi - lo > 1e-14 {
        consider(hi, &mut roots)?;
        let nodes: Vec<f64> = (0..=SAMPLES)
            .map(|k| lo + (hi - lo) * k as f64 / SAMPLES as f64)
            .collect();
        let signs = nodes
            .iter()
            .map(|&r2| stationarity(r1, r2, ratio))
            .collect::<Result<Vec<_>>>()?;
        for k in 0..SAMPLES {
            if !(signs[k] < 0.0 && signs[k + 1] >= 0.0) {
                continue;
            }
            let (mut a, mut b) = (nodes[k], nodes[k + 1]);
            for _ in 0..BISECTION_ITER {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if stationarity(r1, m, ratio)? < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            consider(0.5 * (a + b), &mut roots)?;
        }
    }
    roots.sort_by(f64::total_cmp);
    merge_connected(r1, ratio, roots)
}

/// Adjacent roots joined by a segment on which `ΔE_c` stays below
/// [`LOCUS_TOL`] belong to one zero; the one with the smallest `|ΔE_c|` is kept.
fn merge_connected(r1: f64, ratio: f64, roots: Vec<f64>) -> Result<Vec<f64>> {
    let delta = |r2: f64| delta_ec_at(r1, r2, ratio).map(|d| d.0.abs());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for r2 in roots {
        let d = delta(r2)?;
        if let Some(last) = merged.last_mut() {
            let a = last.0;
            let connected = (r2 - a).abs() < CLUSTER_TOL
                || (1..8).try_fold(true, |ok, k| {
                    Ok::<_, crate::Error>(ok && delta(a + (r2 - a) * k as f64 / 8.0)? < LOCUS_TOL)
                })?;
            if connected {
                if d < last.1 {
                    *last = (r2, d);
                }
                continue;
            }
        }
        merged.push((r2, d));
    }
    Ok(merged.into_iter().map(|(r2, _)| r2).collect())
}

/// `n` points covering `r1 ∈ [1/3, 1]`.
pub fn r1_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0 / 3.0],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    1.0
                } else {
                    1.0 / 3.0 + (2.0 / 3.0) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

pub fn saturation_curve(ratio: f64, grid: &[f64]) -> Result<SaturationCurve> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(crate::Error::Domain(format!("level ratio R = {ratio} outside [0, 1]")));
    }
    let per_r1 = grid
        .par_iter()
        .map(|&r1| {
            let roots = saturation_roots(ratio, r1)?;
            let points = roots
                .iter()
                .map(|&r2| {
                    let (_, beta_star) = delta_ec_at(r1, r2, ratio)?;
                    Ok(LocusPoint {
                        ratio,
                        r1,
                        r2,
                        r3: (1.0 - r1 - r2).max(0.0),
                        beta_star,
                        delta_ec: pipeline_delta_ec(r1, r2, ratio)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((r1, points))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut curve = SaturationCurve {
        ratio,
        points: Vec::new(),
        anomalies: Vec::new(),
        missing: Vec::new(),
    };
    for (r1, points) in per_r1 {
        match points.len() {
            0 => curve.missing.push(r1),
            1 => {}
            _ => curve.anomalies.push(Anomaly {
                ratio,
                r1,
                roots: points.iter().map(|p| p.r2).collect(),
            }),
        }
        curve.points.extend(points);
    }
    Ok(curve)
}

/// Writes `R,r1,r2,r3,beta_star,delta_ec`.
pub fn write_csv<W: std::io::Write>(curves: &[SaturationCurve], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["R", "r1", "r2", "r3", "beta_star", "delta_ec"])
        .map_err(crate::channels::csv_err)?;
    for p in curves.iter().flat_map(|c| &c.points) {
        w.write_record([
            p.ratio.to_string(),
            p.r1.to_string(),
            p.r2.to_string(),
            p.r3.to_string(),
            p.beta_star.to_string(),
            p.delta_ec.to_string(),
        ])
        .map_err(crate::channels::csv_err)?;
    }
    w.flush()?;
    Ok(())
}
