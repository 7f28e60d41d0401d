//! Dense complex Hermitian linear algebra and matrix-function kernels.
//!
//! Everything downstream (state classes, variational solvers, channels)
//! is built on the operations here: spectral decompositions with a
//! deterministic ordering/phase convention, matrix functions `exp`,
//! `log`, `pow(r)` evaluated through the eigensystem, first divided
//! difference (Daleckii-Krein) kernels for Frechet derivatives, the
//! operator norm, Kronecker products and partial traces.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Relative Hermiticity tolerance: deviation allowed is `1e-9 * ||m||`.
pub const TOL_HERM_REL: f64 = 1e-9;
/// Reconstruction tolerance scale: `1e-10 * (1 + ||m||)`.
pub const TOL_RECON_REL: f64 = 1e-10;
/// Unitarity tolerance for eigenvector matrices.
pub const TOL_UNITARY: f64 = 1e-10;
/// Divided-difference switchover: below `1e-7 * max|w|` eigenvalue gaps
/// are treated as degenerate and the kernel uses the derivative limit.
pub const TOL_DD_REL: f64 = 1e-7;

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(d: usize) -> CMatrix {
    CMatrix::zeros(d, d)
}

/// Build a complex matrix from a row-major table of real values.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let c = rows[0].len();
    CMatrix::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
}

/// Diagonal matrix with the given real entries.
pub fn diag_real(entries: &[f64]) -> CMatrix {
    let d = entries.len();
    CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(entries[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Real part of `Tr[a b]`.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    // Tr[ab] = sum_ij a_ij b_ji
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc.re
}

/// Hermitian part `(m + m^dag)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    for i in 0..m.nrows() {
        for j in 0..=i {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted descending; each eigenvector column is
/// phase-fixed so that its first component of non-negligible magnitude
/// is real positive, which makes repeated decompositions of identical
/// inputs bit-for-bit reproducible.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: CMatrix,
}

impl HermitianEig {
    /// Reassemble `U f(Lambda) U^dag` for a scalar map on the spectrum.
    pub fn apply_spectral<F: Fn(f64) -> f64>(&self, f: F) -> CMatrix {
        let d = self.values.len();
        let fd = DVector::from_iterator(d, self.values.iter().map(|&w| C64::new(f(w), 0.0)));
        let scaled = {
            let mut m = self.vectors.clone();
            for j in 0..d {
                let s = fd[j];
                for i in 0..d {
                    m[(i, j)] *= s;
                }
            }
            m
        };
        &scaled * self.vectors.adjoint()
    }

    /// Rank-one projector onto the i-th eigenvector.
    pub fn projector(&self, i: usize) -> CMatrix {
        let v = self.vectors.column(i);
        let d = self.values.len();
        CMatrix::from_fn(d, d, |r, c| v[r] * v[c].conj())
    }
}

fn eig_raw(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let se = nalgebra::linalg::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::NoConvergence {
            iterations: 100_000,
            residual: f64::NAN,
        })?;
    let vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
    Ok((vals, se.eigenvectors))
}

/// Spectral decomposition of `m`, which must be Hermitian within
/// `1e-9 * ||m||`. The input is symmetrized before factorization.
pub fn herm_eig(m: &CMatrix) -> Result<HermitianEig> {
    let d = m.nrows();
    if d != m.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "herm_eig needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let sym = hermitian_part(m);
    let anti = (m - m.adjoint()).scale(0.5);

    let (vals, vecs) = eig_raw(&sym)?;
    let scale = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));

    // Hermiticity check against the operator norm of the skew part.
    let anti_norm = {
        // i * anti is Hermitian; its extreme eigenvalues give the norm.
        let ih = anti.map(|z| C64::new(-z.im, z.re));
        let (av, _) = eig_raw(&hermitian_part(&ih))?;
        av.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    };
    let tol = TOL_HERM_REL * scale.max(anti_norm);
    if anti_norm > tol {
        return Err(Error::NotHermitian {
            deviation: anti_norm,
            tol,
        });
    }

    // Sort descending; stable so degenerate clusters keep solver order.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
    let mut values = Vec::with_capacity(d);
    let mut vectors = CMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        values.push(vals[src]);
        let col = vecs.column(src);
        // Phase-fix: first component with non-negligible magnitude made
        // real positive.
        let mut phase = C64::new(1.0, 0.0);
        for r in 0..d {
            if col[r].norm() > 1e-12 {
                phase = col[r].conj() / col[r].norm();
                break;
            }
        }
        for r in 0..d {
            vectors[(r, dst)] = col[r] * phase;
        }
    }
    Ok(HermitianEig { values, vectors })
}

/// Scalar maps liftable to Hermitian matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFn {
    Exp,
    Log,
    Pow(f64),
}

fn is_integer(r: f64) -> bool {
    (r - r.round()).abs() < 1e-12
}

/// `U f(Lambda) U^dag` for `f` in `{exp, log, pow(r)}`.
///
/// `log` and `pow` with non-integer exponent require a strictly
/// positive spectrum.
pub fn matrix_fn(m: &CMatrix, f: MatrixFn) -> Result<CMatrix> {
    let eig = herm_eig(m)?;
    let min = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
    match f {
        MatrixFn::Exp => Ok(eig.apply_spectral(f64::exp)),
        MatrixFn::Log => {
            if min <= 0.0 {
                return Err(Error::DomainError(format!(
                    "log of a matrix with non-positive eigenvalue {min:.3e}"
                )));
            }
            Ok(eig.apply_spectral(f64::ln))
        }
        MatrixFn::Pow(r) => {
            if min <= 0.0 && !is_integer(r) {
                return Err(Error::DomainError(format!(
                    "pow({r}) of a matrix with non-positive eigenvalue {min:.3e}"
                )));
            }
            if is_integer(r) {
                let k = r.round() as i32;
                Ok(eig.apply_spectral(|w| w.powi(k)))
            } else {
                Ok(eig.apply_spectral(|w| w.powf(r)))
            }
        }
    }
}

/// Scalar maps for which Frechet-derivative kernels are provided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivFn {
    Log,
    Pow(f64),
}

/// First divided difference of `f` with degenerate-gap fallback to the
/// derivative at the midpoint.
fn divided_difference<F, G>(f: &F, fp: &G, a: f64, b: f64, tol_gap: f64) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if (a - b).abs() < tol_gap {
        fp(0.5 * (a + b))
    } else {
        (f(a) - f(b)) / (a - b)
    }
}

/// Apply the divided-difference kernel of `f` at the eigensystem `eig`
/// to the operator `a`: in the eigenbasis the (i,j) entry of `a` is
/// multiplied by `f[w_i, w_j]`. For the functions used here this equals
/// the Frechet derivative `Df(m)[a]` and, because the kernel is
/// symmetric, also the gradient matrix of `omega -> Tr[a f(omega)]`.
pub(crate) fn dd_kernel_apply<F, G>(eig: &HermitianEig, a: &CMatrix, f: F, fp: G) -> CMatrix
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let d = eig.values.len();
    let scale = eig.values.iter().fold(0.0f64, |m, &w| m.max(w.abs()));
    let tol_gap = TOL_DD_REL * scale.max(f64::MIN_POSITIVE);
    let b = eig.vectors.adjoint() * a * &eig.vectors;
    let mut c = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let k = divided_difference(&f, &fp, eig.values[i], eig.values[j], tol_gap);
            c[(i, j)] = b[(i, j)] * C64::new(k, 0.0);
        }
    }
    &eig.vectors * c * eig.vectors.adjoint()
}

/// Frechet derivative `Df(omega)[a]` for `f` in `{log, pow(r)}`,
/// evaluated as the closed-form divided-difference kernel in omega's
/// eigenbasis. Requires `omega > 0`.
pub fn frechet_derivative(f: DerivFn, omega: &CMatrix, a: &CMatrix) -> Result<CMatrix> {
    if omega.nrows() != a.nrows() || omega.ncols() != a.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "omega is {}x{}, a is {}x{}",
            omega.nrows(),
            omega.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    let eig = herm_eig(omega)?;
    let min = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::DomainError(format!(
            "frechet_derivative needs omega > 0, min eigenvalue {min:.3e}"
        )));
    }
    Ok(match f {
        DerivFn::Log => dd_kernel_apply(&eig, a, f64::ln, |w| 1.0 / w),
        DerivFn::Pow(r) => dd_kernel_apply(&eig, a, |w| w.powf(r), move |w| r * w.powf(r - 1.0)),
    })
}

/// Largest singular value. Hermitian inputs take the eigenvalue path;
/// general inputs go through `m^dag m`.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.nrows() == m.ncols() {
        let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if is_hermitian(m, 1e-12 * (1.0 + scale)) {
            if let Ok(eig) = herm_eig(m) {
                return eig.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            }
        }
    }
    let gram = m.adjoint() * m;
    match herm_eig(&gram) {
        Ok(eig) => eig.values.iter().fold(0.0f64, |a, &v| a.max(v)).max(0.0).sqrt(),
        Err(_) => m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
    }
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Partial trace of an operator on a tensor product of factors with the
/// given dimensions, keeping the factors listed (ascending) in `keep`.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::ShapeMismatch(format!(
            "factor dims {:?} multiply to {total}, matrix is {}x{}",
            dims,
            m.nrows(),
            m.ncols()
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::ShapeMismatch(format!(
            "keep list {:?} invalid for {} factors",
            keep,
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let keep_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let trace_dim: usize = traced.iter().map(|&k| dims[k]).product();

    // Expand a (kept, traced) index pair into a full row-major index.
    let full_index = |ki: usize, ti: usize| -> usize {
        let mut digits = vec![0usize; dims.len()];
        let mut rem = ki;
        for &k in keep.iter().rev() {
            digits[k] = rem % dims[k];
            rem /= dims[k];
        }
        let mut rem = ti;
        for &t in traced.iter().rev() {
            digits[t] = rem % dims[t];
            rem /= dims[t];
        }
        digits.iter().zip(dims).fold(0, |acc, (&dg, &dd)| acc * dd + dg)
    };

    let mut out = CMatrix::zeros(keep_dim, keep_dim);
    for r in 0..keep_dim {
        for c in 0..keep_dim {
            let mut s = C64::new(0.0, 0.0);
            for t in 0..trace_dim {
                s += m[(full_index(r, t), full_index(c, t))];
            }
            out[(r, c)] = s;
        }
    }
    Ok(out)
}
