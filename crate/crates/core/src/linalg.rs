//! Small dense linear-algebra helpers shared by the physics modules.
//!
//! Everything here is deterministic: eigenvalues come back sorted ascending
//! and eigenvector signs are fixed by a stable rule, so repeated runs (and
//! runs across thread counts) produce bit-identical results.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Eigendecomposition of a real symmetric matrix with a deterministic layout.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthogonal matrix whose i-th column is the eigenvector of `values[i]`.
    pub vectors: DMatrix<f64>,
}

/// Diagonalizes a symmetric matrix, sorting eigenvalues ascending and fixing
/// each eigenvector's sign so that its largest-magnitude entry is positive
/// (first such entry wins on ties). The input is symmetrized as (M + Mᵀ)/2
/// to absorb roundoff asymmetry.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> Result<SortedEigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::Numerical(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col = eig.eigenvectors.column(src).clone_owned();
        let mut pivot = 0;
        for r in 1..n {
            if col[r].abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    Ok(SortedEigen { values, vectors })
}

/// Symplectic form Ω for `n_modes` modes in (q₁…q_n, p₁…p_n) ordering:
/// Ω = [[0, I], [−I, 0]].
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let n = n_modes;
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    omega
}

/// Symmetric positive-semidefinite square root. Eigenvalues below
/// `1e-12 * λ_max` in magnitude are clamped to zero; an eigenvalue more
/// negative than that tolerance is an error.
pub fn sqrt_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = sorted_symmetric_eigen(m)?;
    let lam_max = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let tol = 1e-12 * lam_max.max(1.0);
    let n = m.nrows();
    let mut d = DMatrix::zeros(n, n);
    for (i, &lam) in eig.values.iter().enumerate() {
        if lam < -tol {
            return Err(Error::Numerical(format!(
                "matrix square root of an indefinite matrix (eigenvalue {lam:.3e})"
            )));
        }
        d[(i, i)] = lam.max(0.0).sqrt();
    }
    Ok(&eig.vectors * d * eig.vectors.transpose())
}

/// Symplectic eigenvalues of a 2n×2n covariance matrix in (q…,p…) ordering,
/// sorted ascending. Uses the symmetric reduction: with K = σ^{1/2} and
/// W = K Ω K, the eigenvalues of WᵀW = −W² are the ν_i², each twice.
pub fn symplectic_eigenvalues(sigma: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = sigma.nrows();
    if dim % 2 != 0 || sigma.ncols() != dim {
        return Err(Error::Numerical(format!(
            "covariance matrix must be square with even dimension, got {}x{}",
            dim,
            sigma.ncols()
        )));
    }
    let n = dim / 2;
    let k = sqrt_psd(sigma)?;
    let w = &k * symplectic_form(n) * &k;
    let m = w.transpose() * &w;
    let eig = sorted_symmetric_eigen(&m)?;
    // Eigenvalues of M come in degenerate pairs (ν², ν²); keep one per pair.
    let mut nus = Vec::with_capacity(n);
    for i in 0..n {
        let pair_avg = 0.5 * (eig.values[2 * i] + eig.values[2 * i + 1]);
        nus.push(pair_avg.max(0.0).sqrt());
    }
    Ok(nus)
}
