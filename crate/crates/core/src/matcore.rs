//! Dense real-matrix kernels shared by the other modules.
//!
//! Matrices are `nalgebra::DMatrix<f64>`. Every public entry point rejects
//! non-finite input. "Within tol" checks use the max-abs-entry norm.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

/// Default absolute tolerance for symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Truncation order of the Taylor series inside [`matrix_exponential`].
const EXP_TAYLOR_ORDER: usize = 18;

/// Scaled matrices satisfy `‖M / 2^s‖₁ ≤ EXP_SCALED_NORM`.
const EXP_SCALED_NORM: f64 = 0.5;

pub(crate) fn ensure_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Argument(format!("{what} has non-finite entries")))
    }
}

pub(crate) fn ensure_square(m: &DMatrix<f64>, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Argument(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Mode count `N` of a `2N x 2N` matrix.
pub(crate) fn ensure_phase_space(m: &DMatrix<f64>, what: &str) -> Result<usize> {
    let n = ensure_square(m, what)?;
    if n == 0 || n % 2 != 0 {
        return Err(Error::Argument(format!(
            "{what} must have even nonzero dimension, got {n}"
        )));
    }
    Ok(n / 2)
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `max |M - Mᵀ|`.
pub fn symmetry_error(m: &DMatrix<f64>) -> f64 {
    max_abs(&(m - m.transpose()))
}

/// `(M + Mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Block-diagonal reordering helper: `diag(d, d)` for a mode vector `d`.
pub fn duplicated_diagonal(d: &[f64]) -> DMatrix<f64> {
    let n = d.len();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| if i == j { d[i % n] } else { 0.0 })
}

/// The canonical symplectic form `J = [[0, I], [-I, 0]]` for `modes` modes.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let n = modes;
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if j == i + n {
            1.0
        } else if i == j + n {
            -1.0
        } else {
            0.0
        }
    })
}

/// Visits every `r`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        // advance to the next combination
        let mut i = r;
        while i > 0 && idx[i - 1] == n - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for k in i..r {
            idx[k] = idx[k - 1] + 1;
        }
    }
}

fn principal_minor(m: &DMatrix<f64>, idx: &[usize]) -> f64 {
    match idx.len() {
        1 => m[(idx[0], idx[0])],
        2 => {
            let (a, b) = (idx[0], idx[1]);
            m[(a, a)] * m[(b, b)] - m[(a, b)] * m[(b, a)]
        }
        k => DMatrix::from_fn(k, k, |i, j| m[(idx[i], idx[j])]).determinant(),
    }
}

/// Sum of all `r x r` principal minors of `m`.
///
/// `C_1` is the trace and `C_n` the determinant. Computed by explicit
/// enumeration of the `n choose r` index subsets.
pub fn characteristic_coefficient(m: &DMatrix<f64>, r: usize) -> Result<f64> {
    let n = ensure_square(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    if r == 0 || r > n {
        return Err(Error::Argument(format!(
            "characteristic order {r} outside 1..={n}"
        )));
    }
    if r == n {
        return Ok(m.determinant());
    }
    let mut sum = 0.0;
    for_each_subset(n, r, |idx| sum += principal_minor(m, idx));
    Ok(sum)
}

/// All characteristic coefficients `C_1 ..= C_n`.
pub fn characteristic_coefficients(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = ensure_square(m, "matrix")?;
    (1..=n).map(|r| characteristic_coefficient(m, r)).collect()
}

/// Matrix exponential by scaling and squaring over a truncated Taylor series.
pub fn matrix_exponential(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = ensure_square(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    let norm1 = m
        .column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);

    let mut squarings = 0u32;
    if norm1 > EXP_SCALED_NORM {
        squarings = (norm1 / EXP_SCALED_NORM).log2().ceil() as u32;
    }
    let scaled = m / 2f64.powi(squarings as i32);

    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=EXP_TAYLOR_ORDER {
        term = &term * &scaled / k as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// `max |L J Lᵀ - J|`.
pub fn symplectic_defect(l: &DMatrix<f64>) -> Result<f64> {
    let modes = ensure_phase_space(l, "symplectic candidate")?;
    let j = symplectic_form(modes);
    Ok(max_abs(&(l * &j * l.transpose() - j)))
}

/// One step of the averaging projection `L ↦ (L + J L⁻ᵀ J⁻¹) / 2`.
///
/// Symplectic matrices are fixed points; near the group the defect drops
/// to second order in the input defect.
pub fn resymplectify(l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let modes = ensure_phase_space(l, "symplectic candidate")?;
    ensure_finite(l, "symplectic candidate")?;
    let j = symplectic_form(modes);
    let inv_t = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Numeric("cannot resymplectify a singular matrix".into()))?;
    // J⁻¹ = -J
    let mirrored = -(&j * inv_t * &j);
    Ok((l + mirrored) * 0.5)
}

/// Symmetric eigendecomposition after a symmetry check at `tol`.
pub(crate) fn symmetric_eigen(m: &DMatrix<f64>, tol: f64) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    ensure_square(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    let asym = symmetry_error(m);
    if asym > tol {
        return Err(Error::Argument(format!(
            "matrix is not symmetric (max |M - Mᵀ| = {asym:e} > {tol:e})"
        )));
    }
    Ok(SymmetricEigen::new(symmetrize(m)))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>, tol: f64) -> Result<f64> {
    let eig = symmetric_eigen(m, tol)?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// True iff the smallest eigenvalue of the symmetric matrix `m` exceeds `tol`.
pub fn check_positive_definite(m: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(m, tol.max(SYMMETRY_TOL))? > tol)
}

/// `(M^{1/2}, M^{-1/2})` of a symmetric positive-definite matrix.
pub(crate) fn spd_sqrt_pair(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = symmetric_eigen(m, SYMMETRY_TOL)?;
    if eig.eigenvalues.iter().any(|&x| x <= 0.0) {
        return Err(Error::Argument("matrix is not positive definite".into()));
    }
    let v = &eig.eigenvectors;
    let root = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inv_root = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()));
    Ok((
        symmetrize(&(v * root * v.transpose())),
        symmetrize(&(v * inv_root * v.transpose())),
    ))
}
