//! Dense complex matrix kernel.
//!
//! Everything upstream works with [`ComplexMatrix`], a square `DMatrix` of
//! `Complex<f64>`. The decompositions here are thin wrappers over nalgebra
//! that add the conventions the rest of the crate relies on: ascending
//! eigenvalues with a stable tie-break, an exact fast path for diagonal
//! inputs, and spectral evaluation of matrix functions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Elementwise tolerance on `M - M†` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues with magnitude at or below this are treated as exact zeros.
pub const CLIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors, in the order of `values`.
    pub vectors: ComplexMatrix,
    /// Set when the input was exactly diagonal, so the values are the diagonal
    /// entries themselves rather than the output of an iterative solver.
    pub exact: bool,
}

impl EigenDecomposition {
    /// Rebuilds `V diag(f(λ)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let fv = f(v);
            for i in 0..d {
                scaled[(i, j)] *= fv;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// Eigenvalues in descending order.
    pub fn descending_values(&self) -> Vec<f64> {
        self.values.iter().rev().copied().collect()
    }
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::Empty);
    }
    Ok(m.nrows())
}

/// Largest elementwise modulus of `M - M†`.
pub fn hermitian_asymmetry(m: &ComplexMatrix) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M†) / 2`.
pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_diagonal(m: &ComplexMatrix) -> bool {
    let d = m.nrows();
    (0..d).all(|i| (0..d).all(|j| i == j || m[(i, j)] == Complex64::new(0.0, 0.0)))
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn diagonal(values: &[f64]) -> ComplexMatrix {
    let d = values.len();
    let mut m = ComplexMatrix::zeros(d, d);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = Complex64::new(v, 0.0);
    }
    m
}

/// Builds a matrix from row-major real and imaginary parts.
pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<ComplexMatrix> {
    let rows = re.len();
    if im.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: im.len(),
        });
    }
    let mut m = ComplexMatrix::zeros(rows, rows);
    for (i, (r, c)) in re.iter().zip(im).enumerate() {
        if r.len() != rows || c.len() != rows {
            return Err(Error::NotSquare {
                rows,
                cols: r.len().max(c.len()),
            });
        }
        for j in 0..rows {
            m[(i, j)] = Complex64::new(r[j], c[j]);
        }
    }
    Ok(m)
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Degenerate eigenvalues keep the order of a stable sort on
/// `(value, solver index)`. Exactly diagonal inputs bypass the iterative
/// solver and return their diagonal with an identity basis.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let d = ensure_square(m)?;
    let asym = hermitian_asymmetry(m);
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            max_asymmetry: asym,
        });
    }

    let (raw_values, raw_vectors, exact) = if is_diagonal(m) {
        let values: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
        (values, identity(d), true)
    } else {
        let eig = hermitize(m).symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors, false)
    };

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
    let values = order.iter().map(|&k| raw_values[k]).collect();
    let vectors = ComplexMatrix::from_fn(d, d, |i, j| raw_vectors[(i, order[j])]);
    Ok(EigenDecomposition {
        values,
        vectors,
        exact,
    })
}

/// Applies a real function to the spectrum of a Hermitian matrix.
///
/// Eigenvalues inside `[-CLIP_TOL, CLIP_TOL]` are passed to `f` as exactly
/// zero. A non-finite `f(λ)` is a domain error.
pub fn spectral_apply(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    for &v in &eig.values {
        let x = clip(v);
        if !f(x).is_finite() {
            return Err(Error::Domain(format!(
                "function undefined at eigenvalue {v:e}"
            )));
        }
    }
    Ok(eig.reconstruct_with(|v| f(clip(v))))
}

fn clip(v: f64) -> f64 {
    if v.abs() <= CLIP_TOL {
        0.0
    } else {
        v
    }
}

/// `x ln x` with the `0 ln 0 = 0` convention.
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Matrix exponential.
///
/// Hermitian and anti-Hermitian arguments go through the spectral route,
/// which keeps `exp(A)` unitary for anti-Hermitian `A` to working precision.
/// Everything else falls back to Padé scaling-and-squaring.
pub fn matrix_exp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(m)?;
    let scale = max_abs(m).max(1.0);
    if hermitian_asymmetry(m) <= HERMITIAN_TOL * scale {
        let eig = hermitian_eig(&hermitize(m))?;
        return Ok(eig.reconstruct_with(f64::exp));
    }
    let generator = m.map(|z| Complex64::new(z.im, -z.re)); // -i M
    if hermitian_asymmetry(&generator) <= HERMITIAN_TOL * scale {
        // M = i K with K Hermitian, exp(M) = V e^{iλ} V†.
        let eig = hermitian_eig(&hermitize(&generator))?;
        let d = eig.values.len();
        let mut scaled = eig.vectors.clone();
        for (j, &v) in eig.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, v);
            for i in 0..d {
                scaled[(i, j)] *= phase;
            }
        }
        return Ok(&scaled * eig.vectors.adjoint());
    }
    Ok(matrix_exp_pade(m))
}

/// Padé scaling-and-squaring exponential for an arbitrary square matrix.
pub fn matrix_exp_pade(m: &ComplexMatrix) -> ComplexMatrix {
    m.clone().exp()
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // Fix the column phases so the distribution is Haar.
    let mut u = q;
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// `max |U†U - I|`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let d = u.nrows();
    max_abs(&(u.adjoint() * u - identity(d)))
}
