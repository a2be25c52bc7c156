//! Dense complex matrix kernel.
//!
//! Everything here works on `nalgebra` dense matrices of [`Complex64`]. Composite
//! spaces use the system-major index convention throughout: the basis vector
//! `|i> (x) |j>` of `H (x) K` sits at index `i * probe_dim + j`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest composite dimension accepted anywhere in the toolkit.
pub const MAX_DIM: usize = 4096;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c64(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Absolute and relative tolerances used by every validation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            atol: 1e-9,
            rtol: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(atol: f64, rtol: f64) -> Result<Self> {
        if !(atol.is_finite() && rtol.is_finite()) {
            return Err(Error::NonFinite);
        }
        if atol < 0.0 || rtol < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be nonnegative (atol = {atol}, rtol = {rtol})"
            )));
        }
        Ok(Self { atol, rtol })
    }

    /// `atol * max(1, scale)`.
    pub fn scaled(&self, scale: f64) -> f64 {
        self.atol * scale.max(1.0)
    }
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Rebuilds `V diag(values) V^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(lambda);
        }
        let mut out = &scaled * self.vectors.adjoint();
        debug_assert_eq!(out.nrows(), d);
        hermitize_mut(&mut out);
        out
    }

    /// Groups (numerically) equal eigenvalues. Consecutive eigenvalues closer
    /// than `gap` are merged; the group label is the mean of its members.
    pub fn groups(&self, gap: f64) -> Vec<EigenGroup> {
        let mut groups: Vec<EigenGroup> = Vec::new();
        for (k, &lambda) in self.values.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if lambda - g.last <= gap => {
                    g.indices.push(k);
                    g.last = lambda;
                }
                _ => groups.push(EigenGroup {
                    value: lambda,
                    last: lambda,
                    indices: vec![k],
                }),
            }
        }
        for g in &mut groups {
            let sum: f64 = g.indices.iter().map(|&k| self.values[k]).sum();
            g.value = sum / g.indices.len() as f64;
        }
        groups
    }

    /// Orthogonal projection onto the span of the given eigenvector columns.
    pub fn projection(&self, indices: &[usize]) -> CMatrix {
        let d = self.vectors.nrows();
        let mut p = CMatrix::zeros(d, d);
        for &k in indices {
            let v = self.vectors.column(k);
            p += &v * v.adjoint();
        }
        hermitize_mut(&mut p);
        p
    }
}

#[derive(Debug, Clone)]
pub struct EigenGroup {
    pub value: f64,
    last: f64,
    pub indices: Vec<usize>,
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if m.nrows() > MAX_DIM {
        return Err(Error::DimensionLimit {
            dim: m.nrows(),
            limit: MAX_DIM,
        });
    }
    Ok(m.nrows())
}

pub fn check_dim(m: &CMatrix, expected: usize) -> Result<()> {
    if m.nrows() != expected || m.ncols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: if m.nrows() != expected {
                m.nrows()
            } else {
                m.ncols()
            },
        });
    }
    Ok(())
}

/// Rejects composite spaces larger than [`MAX_DIM`].
pub fn check_composite(system_dim: usize, probe_dim: usize) -> Result<usize> {
    if system_dim == 0 || probe_dim == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let dim = system_dim
        .checked_mul(probe_dim)
        .filter(|&d| d <= MAX_DIM)
        .ok_or(Error::DimensionLimit {
            dim: system_dim.saturating_mul(probe_dim),
            limit: MAX_DIM,
        })?;
    Ok(dim)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |m - m^H|` entrywise.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Replaces `m` by `(m + m^H) / 2`.
pub fn hermitize_mut(m: &mut CMatrix) {
    let adj = m.adjoint();
    *m += adj;
    m.scale_mut(0.5);
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    hermitize_mut(&mut out);
    out
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn diagonal(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&x| Complex64::new(x, 0.0)),
    ))
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Spectral (largest singular value) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Smallest singular value; zero iff `m` has a nontrivial kernel.
pub fn min_singular_value(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().min()
}

/// `<psi|m psi>`.
pub fn expectation(m: &CMatrix, psi: &CVector) -> Complex64 {
    psi.dotc(&(m * psi))
}

/// Real part of `<psi|m psi>`; exact for Hermitian `m` up to round-off.
pub fn real_expectation(m: &CMatrix, psi: &CVector) -> f64 {
    expectation(m, psi).re
}

pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// The input must be square, finite and Hermitian within `tol.atol`; it is
/// symmetrized before decomposition. Eigenvalues are returned ascending.
pub fn eig_hermitian(m: &CMatrix, tol: Tolerance) -> Result<HermitianEigen> {
    check_square(m)?;
    check_finite(m)?;
    let residual = hermitian_residual(m);
    if residual > tol.atol {
        return Err(Error::NotHermitian { residual });
    }
    Ok(eig_symmetrized(m))
}

/// Decomposes `(m + m^H)/2` without checks. Callers guarantee finiteness.
pub(crate) fn eig_symmetrized(m: &CMatrix) -> HermitianEigen {
    let sym = hermitize(m);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let d = m.nrows();
    let vectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// `exp(i t H)` for Hermitian `h`, through its eigen-decomposition.
pub fn exp_i_hermitian(h: &CMatrix, t: f64, tol: Tolerance) -> Result<CMatrix> {
    let eig = eig_hermitian(h, tol)?;
    let mut scaled = eig.vectors.clone();
    for (k, &lambda) in eig.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, t * lambda);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    Ok(&scaled * eig.vectors.adjoint())
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).last().copied().unwrap_or(0.0)
}

/// Tensor product in the system-major convention:
/// `(a (x) b)[(i,j),(k,l)] = a[i,k] b[j,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_finite(a)?;
    check_finite(b)?;
    let rows = a.nrows() * b.nrows();
    let cols = a.ncols() * b.ncols();
    if rows > MAX_DIM * MAX_DIM || cols > MAX_DIM * MAX_DIM {
        return Err(Error::DimensionLimit {
            dim: rows.max(cols),
            limit: MAX_DIM,
        });
    }
    Ok(a.kronecker(b))
}

/// Traces out the probe factor of a `(system_dim * probe_dim)`-square matrix.
pub fn partial_trace_probe(m: &CMatrix, system_dim: usize, probe_dim: usize) -> Result<CMatrix> {
    let dim = check_composite(system_dim, probe_dim)?;
    check_dim(m, dim)?;
    Ok(CMatrix::from_fn(system_dim, system_dim, |i, k| {
        (0..probe_dim)
            .map(|j| m[(i * probe_dim + j, k * probe_dim + j)])
            .sum()
    }))
}

/// `S^{-1/2}` for a positive definite `s`.
pub fn inverse_sqrt_psd(s: &CMatrix, tol: Tolerance) -> Result<CMatrix> {
    let eig = eig_hermitian(s, tol)?;
    if eig.values.first().is_none_or(|&v| v <= tol.atol) {
        return Err(Error::InvalidArgument(
            "matrix is not positive definite".into(),
        ));
    }
    let d = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for k in 0..d {
        scaled.column_mut(k).scale_mut(eig.values[k].powf(-0.5));
    }
    let mut out = scaled * eig.vectors.adjoint();
    hermitize_mut(&mut out);
    Ok(out)
}

/// Matrix power with a nonnegative integer exponent.
pub fn matrix_power(m: &CMatrix, k: u32) -> CMatrix {
    let mut out = identity(m.nrows());
    for _ in 0..k {
        out = &out * m;
    }
    out
}
