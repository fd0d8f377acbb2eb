//! Gaussian states described by first and second moments.
//!
//! The mean vector and the covariance matrix `σ` use the `(p_1..p_N,
//! q_1..q_N)` ordering with `ħ = 1`, so the vacuum has `σ = I/2`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Uniform};

use crate::canonical::SymplecticMatrix;
use crate::matcore::{self, matrix_exponential, symmetrize, symplectic_form, SYMMETRY_TOL};
use crate::{Error, Result};

/// Floor on eigenvalues in the positivity and Robertson-matrix checks.
pub const EIGEN_FLOOR: f64 = 1e-9;

/// Transport through a matrix with a larger defect is refused.
pub const TRANSPORT_DEFECT_LIMIT: f64 = 1e-6;

/// Half-width of the uniform entries of the random symmetric generator.
const GENERATOR_SCALE: f64 = 0.5;

/// Mean vector and covariance matrix of an `N`-mode state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validated constructor; failures become [`Error::Validation`].
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        validate_state(mean, cov).map_err(|r| Error::Validation(r.to_string()))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn block(&self, row: usize, col: usize) -> DMatrix<f64> {
        let n = self.modes;
        self.cov.view((row * n, col * n), (n, n)).into_owned()
    }

    pub fn sigma_pp(&self) -> DMatrix<f64> {
        self.block(0, 0)
    }

    pub fn sigma_pq(&self) -> DMatrix<f64> {
        self.block(0, 1)
    }

    pub fn sigma_qp(&self) -> DMatrix<f64> {
        self.block(1, 0)
    }

    pub fn sigma_qq(&self) -> DMatrix<f64> {
        self.block(1, 1)
    }

    /// `(Δp_k)²`
    pub fn var_p(&self, k: usize) -> f64 {
        self.cov[(k, k)]
    }

    /// `(Δq_k)²`
    pub fn var_q(&self, k: usize) -> f64 {
        self.cov[(self.modes + k, self.modes + k)]
    }

    /// `Δ(p_k q_k)`
    pub fn cov_pq(&self, k: usize) -> f64 {
        self.cov[(k, self.modes + k)]
    }

    pub fn det_sigma(&self) -> f64 {
        self.cov.determinant()
    }

    /// Moments after the canonical transformation: `mean' = L mean`,
    /// `σ' = L σ Lᵀ`.
    pub fn apply_ct(&self, l: &SymplecticMatrix) -> Result<GaussianState> {
        apply_ct(self, l)
    }
}

/// `σ = I/2` with the given mean.
pub fn coherent_state(modes: usize, mean: &[f64]) -> Result<GaussianState> {
    if modes == 0 {
        return Err(Error::Argument("mode count must be positive".into()));
    }
    if mean.len() != 2 * modes {
        return Err(Error::Argument(format!(
            "mean needs {} entries for {modes} modes, got {}",
            2 * modes,
            mean.len()
        )));
    }
    if mean.iter().any(|x| !x.is_finite()) {
        return Err(Error::Argument("mean must be finite".into()));
    }
    Ok(GaussianState {
        modes,
        mean: DVector::from_column_slice(mean),
        cov: DMatrix::identity(2 * modes, 2 * modes) * 0.5,
    })
}

/// Second moments of the number state `|n_1, …, n_N⟩`:
/// `(Δp_k)² = (Δq_k)² = 1/2 + n_k`, zero mean.
pub fn fock_state(occupations: &[i64]) -> Result<GaussianState> {
    if occupations.is_empty() {
        return Err(Error::Argument("need at least one mode".into()));
    }
    if let Some(n) = occupations.iter().find(|&&n| n < 0) {
        return Err(Error::Argument(format!("occupation numbers must be nonnegative, got {n}")));
    }
    let modes = occupations.len();
    let d: Vec<f64> = occupations.iter().map(|&n| 0.5 + n as f64).collect();
    Ok(GaussianState {
        modes,
        mean: DVector::zeros(2 * modes),
        cov: matcore::duplicated_diagonal(&d),
    })
}

/// See [`GaussianState::apply_ct`].
pub fn apply_ct(state: &GaussianState, l: &SymplecticMatrix) -> Result<GaussianState> {
    if l.modes() != state.modes {
        return Err(Error::Argument(format!(
            "transformation has {} modes, state {}",
            l.modes(),
            state.modes
        )));
    }
    if !(l.defect() <= TRANSPORT_DEFECT_LIMIT) {
        return Err(Error::Argument(format!(
            "refusing transport through a non-symplectic matrix (defect {:e})",
            l.defect()
        )));
    }
    let m = l.matrix();
    Ok(GaussianState {
        modes: state.modes,
        mean: m * &state.mean,
        cov: symmetrize(&(m * &state.cov * m.transpose())),
    })
}

/// Whether a random state sits on the minimum-uncertainty class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purity {
    /// All symplectic eigenvalues `1/2`.
    Pure,
    /// Symplectic eigenvalues `1/2 + Exp(1)` draws.
    Mixed,
}

/// Deterministic RNG stream `index` of `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `exp(J K)` with `K` symmetric, entries uniform in `[-1/2, 1/2]`.
pub fn random_symplectic<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Result<SymplecticMatrix> {
    let dim = 2 * modes;
    let uniform = Uniform::new_inclusive(-GENERATOR_SCALE, GENERATOR_SCALE)
        .map_err(|e| Error::Numeric(e.to_string()))?;
    let mut k = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x = uniform.sample(rng);
            k[(i, j)] = x;
            k[(j, i)] = x;
        }
    }
    SymplecticMatrix::new(matrix_exponential(&(symplectic_form(modes) * k))?)
}

/// Random state `σ = S diag(ν, ν) Sᵀ` drawn from `rng`, zero mean.
pub fn random_state_with<R: Rng + ?Sized>(modes: usize, purity: Purity, rng: &mut R) -> Result<GaussianState> {
    if modes == 0 {
        return Err(Error::Argument("mode count must be positive".into()));
    }
    let s = random_symplectic(modes, rng)?;
    let nu: Vec<f64> = (0..modes)
        .map(|_| match purity {
            Purity::Pure => 0.5,
            Purity::Mixed => {
                let extra: f64 = Exp1.sample(rng);
                0.5 + extra
            }
        })
        .collect();
    let diag = matcore::duplicated_diagonal(&nu);
    let m = s.matrix();
    Ok(GaussianState {
        modes,
        mean: DVector::zeros(2 * modes),
        cov: symmetrize(&(m * diag * m.transpose())),
    })
}

/// Seeded form of [`random_state_with`]; identical seeds give identical states.
pub fn random_valid_state(modes: usize, seed: u64, purity: Purity) -> Result<GaussianState> {
    random_state_with(modes, purity, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// One violated state invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationFailure {
    Dimension(String),
    NonFinite,
    Asymmetric { max_deviation: f64 },
    NotPositiveDefinite { min_eigenvalue: f64 },
    RobertsonMatrix { min_eigenvalue: f64 },
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationFailure::Dimension(msg) => write!(f, "dimension: {msg}"),
            ValidationFailure::NonFinite => write!(f, "non-finite entries"),
            ValidationFailure::Asymmetric { max_deviation } => {
                write!(f, "covariance not symmetric (max |σ - σᵀ| = {max_deviation:e})")
            }
            ValidationFailure::NotPositiveDefinite { min_eigenvalue } => {
                write!(f, "covariance not positive definite (min eigenvalue {min_eigenvalue:e})")
            }
            ValidationFailure::RobertsonMatrix { min_eigenvalue } => {
                write!(f, "Robertson matrix σ + iC not positive semidefinite (min eigenvalue {min_eigenvalue:e})")
            }
        }
    }
}

/// Every invariant a candidate `(mean, σ)` failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub failures: Vec<ValidationFailure>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid state:")?;
        for failure in &self.failures {
            write!(f, " [{failure}]")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Real symmetric embedding `[[σ, -C], [C, σ]]` of `σ + iC`, `C = -J/2`.
pub fn robertson_embedding(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = cov.nrows();
    let c = symplectic_form(dim / 2) * -0.5;
    let mut m = DMatrix::zeros(2 * dim, 2 * dim);
    m.view_mut((0, 0), (dim, dim)).copy_from(cov);
    m.view_mut((dim, dim), (dim, dim)).copy_from(cov);
    m.view_mut((0, dim), (dim, dim)).copy_from(&(-&c));
    m.view_mut((dim, 0), (dim, dim)).copy_from(&c);
    symmetrize(&m)
}

/// Accepts `(mean, cov)` iff `σ` is symmetric, positive definite and its
/// Robertson matrix is positive semidefinite.
pub fn validate_state(mean: DVector<f64>, cov: DMatrix<f64>) -> std::result::Result<GaussianState, ValidationReport> {
    let fail = |f: ValidationFailure| ValidationReport { failures: vec![f] };
    let dim = cov.nrows();
    if cov.ncols() != dim || dim == 0 || !dim.is_multiple_of(2) {
        return Err(fail(ValidationFailure::Dimension(format!(
            "covariance must be 2N x 2N, got {}x{}",
            cov.nrows(),
            cov.ncols()
        ))));
    }
    if mean.len() != dim {
        return Err(fail(ValidationFailure::Dimension(format!(
            "mean has {} entries, covariance is {dim}x{dim}",
            mean.len()
        ))));
    }
    if mean.iter().chain(cov.iter()).any(|x| !x.is_finite()) {
        return Err(fail(ValidationFailure::NonFinite));
    }

    let mut failures = Vec::new();
    let asym = matcore::symmetry_error(&cov);
    if asym > SYMMETRY_TOL {
        failures.push(ValidationFailure::Asymmetric { max_deviation: asym });
    }
    let cov = symmetrize(&cov);
    let min_eig = matcore::min_eigenvalue(&cov, f64::INFINITY).unwrap_or(f64::NAN);
    if !(min_eig > EIGEN_FLOOR) {
        failures.push(ValidationFailure::NotPositiveDefinite { min_eigenvalue: min_eig });
    }
    let min_rob = matcore::min_eigenvalue(&robertson_embedding(&cov), f64::INFINITY).unwrap_or(f64::NAN);
    if !(min_rob >= -EIGEN_FLOOR) {
        failures.push(ValidationFailure::RobertsonMatrix { min_eigenvalue: min_rob });
    }
    if failures.is_empty() {
        Ok(GaussianState { modes: dim / 2, mean, cov })
    } else {
        Err(ValidationReport { failures })
    }
}
