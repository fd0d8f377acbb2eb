//! Uncertainty relations for canonical observables.
//!
//! The commutator matrix of `Q = (p, q)` is `C = -J/2`, so the Robertson
//! relation reads `det σ ≥ (1/4)^N` and the characteristic relations
//! `C_r(σ) ≥ C_r(-J/2)` for every order `r`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::canonical::SymplecticMatrix;
use crate::matcore::{
    self, characteristic_coefficients, max_abs, spd_sqrt_pair, symplectic_defect, symplectic_form,
};
use crate::states::GaussianState;
use crate::{Error, Result};

/// `|ν_k - 1/2|` below this puts a state in the Robertson-minimal class.
pub const MINIMALITY_TOL: f64 = 1e-8;

/// `|1 - 4 σ_pp σ_qq|` below this makes a mode Heisenberg-minimal.
pub const HEISENBERG_TOL: f64 = 1e-8;

fn quarter_power(modes: usize) -> f64 {
    0.25f64.powi(modes as i32)
}

/// Halved mean commutators `C_{μν} = -i⟨[Q_μ, Q_ν]⟩/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorMatrix {
    modes: usize,
    matrix: DMatrix<f64>,
}

impl CommutatorMatrix {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `(1/4)^N`
    pub fn determinant(&self) -> f64 {
        quarter_power(self.modes)
    }
}

/// `C = -J/2` for `N` canonical pairs.
pub fn commutator_matrix(modes: usize) -> Result<CommutatorMatrix> {
    if modes == 0 {
        return Err(Error::Argument("mode count must be positive".into()));
    }
    Ok(CommutatorMatrix { modes, matrix: symplectic_form(modes) * -0.5 })
}

/// `det σ - (1/4)^N`.
pub fn robertson_margin(state: &GaussianState) -> f64 {
    state.det_sigma() - quarter_power(state.modes())
}

/// `(Δp)²(Δq)² - (Δpq)² - 1/4` of a one-mode state.
pub fn schrodinger_margin(state: &GaussianState) -> Result<f64> {
    if state.modes() != 1 {
        return Err(Error::Argument(format!(
            "Schrödinger relation is for one mode, state has {}",
            state.modes()
        )));
    }
    let s = state.cov();
    Ok(s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(0, 1)] - 0.25)
}

/// `C_r(σ) - C_r(C)` for `r = 1 ..= 2N`.
pub fn characteristic_margins(state: &GaussianState) -> Result<Vec<f64>> {
    let c = commutator_matrix(state.modes())?;
    let lhs = characteristic_coefficients(state.cov())?;
    let rhs = characteristic_coefficients(c.matrix())?;
    Ok(lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect())
}

/// Symplectic `S` with `S σ Sᵀ = diag(ν, ν)`, `ν` ascending.
#[derive(Debug, Clone)]
pub struct WilliamsonDecomposition {
    pub s: SymplecticMatrix,
    pub nu: Vec<f64>,
}

impl WilliamsonDecomposition {
    /// `diag(ν_1..ν_N, ν_1..ν_N)`
    pub fn normal_form(&self) -> DMatrix<f64> {
        matcore::duplicated_diagonal(&self.nu)
    }

    /// `max |S σ Sᵀ - diag(ν, ν)|`
    pub fn residual(&self, sigma: &DMatrix<f64>) -> f64 {
        let m = self.s.matrix();
        max_abs(&(m * sigma * m.transpose() - self.normal_form()))
    }
}

/// Williamson normal form of a symmetric positive-definite matrix.
///
/// With `K = σ^{1/2} J σ^{1/2}` antisymmetric, an orthogonal `O` brings `K`
/// to `[[0, D], [-D, 0]]`; then `S = diag(ν,ν)^{1/2} Oᵀ σ^{-1/2}`. The
/// columns of `O` come in pairs `(u, -Ku/ν)` with `u` taken from the
/// eigenvectors of `KᵀK`, greedily orthogonalised so that degenerate `ν`
/// are handled inside their common eigenspace.
pub fn williamson(sigma: &DMatrix<f64>) -> Result<WilliamsonDecomposition> {
    let modes = matcore::ensure_phase_space(sigma, "covariance")?;
    let dim = 2 * modes;
    if !matcore::check_positive_definite(sigma, 0.0)? {
        return Err(Error::Argument("Williamson form needs a positive-definite matrix".into()));
    }
    let (root, inv_root) = spd_sqrt_pair(sigma)?;
    let j = symplectic_form(modes);
    let k = &root * &j * &root;
    let k = (&k - k.transpose()) * 0.5;

    let gram = matcore::symmetrize(&(k.transpose() * &k));
    let eig = SymmetricEigen::new(gram);
    let candidates: Vec<_> = eig.eigenvectors.column_iter().map(|c| c.into_owned()).collect();

    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(dim);
    let mut pairs: Vec<(f64, nalgebra::DVector<f64>, nalgebra::DVector<f64>)> = Vec::with_capacity(modes);
    let mut used = vec![false; dim];
    let project_out = |v: &nalgebra::DVector<f64>, basis: &[nalgebra::DVector<f64>]| {
        let mut r = v.clone();
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for b in basis {
                r -= b * b.dot(&r);
            }
        }
        r
    };
    for _ in 0..modes {
        let (best, residual) = candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, c)| (i, project_out(c, &basis)))
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .ok_or_else(|| Error::Numeric("Williamson pairing ran out of candidates".into()))?;
        used[best] = true;
        let norm = residual.norm();
        if !(norm > 1e-3) {
            return Err(Error::Numeric(format!("Williamson pairing lost rank ({norm:e})")));
        }
        let u = residual / norm;
        let ku = &k * &u;
        let v = project_out(&(-ku), &basis);
        let v = project_out(&v, std::slice::from_ref(&u));
        let vn = v.norm();
        if !(vn > 0.0) {
            return Err(Error::Numeric("degenerate antisymmetric block".into()));
        }
        let v = v / vn;
        let nu = u.dot(&(&k * &v));
        basis.push(u.clone());
        basis.push(v.clone());
        pairs.push((nu, u, v));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut o = DMatrix::zeros(dim, dim);
    for (idx, (_, u, v)) in pairs.iter().enumerate() {
        o.set_column(idx, u);
        o.set_column(modes + idx, v);
    }
    let nu: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    if nu.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Numeric(format!("non-positive symplectic eigenvalue in {nu:?}")));
    }
    let half = matcore::duplicated_diagonal(&nu.iter().map(|x| x.sqrt()).collect::<Vec<_>>());
    let s = half * o.transpose() * inv_root;
    Ok(WilliamsonDecomposition { s: SymplecticMatrix::measured(s)?, nu })
}

/// `σ̃ = σ / (det σ)^{1/2N}`, so that `det σ̃ = 1`.
pub fn normalized_sigma(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let modes = matcore::ensure_phase_space(sigma, "covariance")?;
    if !matcore::check_positive_definite(sigma, 0.0)? {
        return Err(Error::Argument("normalization needs a positive-definite matrix".into()));
    }
    let det = sigma.determinant();
    if !(det > 0.0) {
        return Err(Error::Argument(format!("determinant {det:e} is not positive")));
    }
    Ok(sigma / det.powf(1.0 / (2 * modes) as f64))
}

/// Whether the normalized covariance is itself symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSigmaTest {
    /// `max |σ̃ J σ̃ᵀ - J|`
    pub defect: f64,
    /// Per-mode `s_k s_{N+k} = ν_k²` in the Williamson frame.
    pub products: Vec<f64>,
    /// `(det σ)^{1/N}`, the common value the products must share.
    pub target: f64,
}

impl SymplecticSigmaTest {
    /// Largest `|s_k s_{N+k} - (det σ)^{1/N}|`.
    pub fn product_spread(&self) -> f64 {
        self.products.iter().map(|p| (p - self.target).abs()).fold(0.0, f64::max)
    }
}

pub fn symplectic_sigma_test(state: &GaussianState) -> Result<SymplecticSigmaTest> {
    let normalized = normalized_sigma(state.cov())?;
    let defect = symplectic_defect(&normalized)?;
    let w = williamson(state.cov())?;
    let products = w.nu.iter().map(|x| x * x).collect();
    let target = state.det_sigma().powf(1.0 / state.modes() as f64);
    Ok(SymplecticSigmaTest { defect, products, target })
}

/// Max-abs residuals of the blockwise symplecticity conditions on `σ̃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockConditions {
    /// `σ_pp σ_qq - σ_pq² - (det σ)^{1/N} I`
    pub variance_product: f64,
    /// `σ_pp σ_qp - σ_pq σ_pp` and `σ_qp σ_qq - σ_qq σ_pq`
    pub commutation: f64,
}

pub fn block_conditions(state: &GaussianState) -> BlockConditions {
    let n = state.modes();
    let (pp, pq, qp, qq) = (state.sigma_pp(), state.sigma_pq(), state.sigma_qp(), state.sigma_qq());
    let scale = state.det_sigma().powf(1.0 / n as f64);
    let product = &pp * &qq - &pq * &pq - DMatrix::<f64>::identity(n, n) * scale;
    let first = &pp * &qp - &pq * &pp;
    let second = &qp * &qq - &qq * &pq;
    BlockConditions {
        variance_product: max_abs(&product),
        commutation: max_abs(&first).max(max_abs(&second)),
    }
}

/// `max |σ_pp σ_qq - σ_pq² - value · I|` for a prescribed right-hand side.
pub fn variance_product_residual(state: &GaussianState, value: f64) -> f64 {
    let n = state.modes();
    let (pp, pq, qq) = (state.sigma_pp(), state.sigma_pq(), state.sigma_qq());
    max_abs(&(&pp * &qq - &pq * &pq - DMatrix::<f64>::identity(n, n) * value))
}

/// `det[σ_pp σ_qq - σ_pp σ_qp σ_pp⁻¹ σ_pq]`, equal to `det σ`.
pub fn block_robertson_determinant(state: &GaussianState) -> Result<f64> {
    let (pp, pq, qp, qq) = (state.sigma_pp(), state.sigma_pq(), state.sigma_qp(), state.sigma_qq());
    let inv = pp
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numeric("σ_pp is singular".into()))?;
    Ok((&pp * &qq - &pp * &qp * inv * &pq).determinant())
}

/// [`block_robertson_determinant`] minus `(1/4)^N`.
pub fn block_robertson_margin(state: &GaussianState) -> Result<f64> {
    Ok(block_robertson_determinant(state)? - quarter_power(state.modes()))
}

/// `det[σ_pp σ_qq - σ_pq²]`, the Robertson determinant when `σ̃` is symplectic.
pub fn simplified_block_determinant(state: &GaussianState) -> f64 {
    let (pp, pq, qq) = (state.sigma_pp(), state.sigma_pq(), state.sigma_qq());
    (&pp * &qq - &pq * &pq).determinant()
}

/// Per-mode quadratic `λ²(Δq)² - λ + (Δp)² ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergForm {
    /// `((Δq)², -1, (Δp)²)`, highest power first.
    pub coefficients: [f64; 3],
    /// `1 - 4 (Δp)²(Δq)²`, never positive for a physical state.
    pub discriminant: f64,
    /// Double root `1 / (2 (Δq)²)` when the discriminant vanishes.
    pub minimizer: Option<f64>,
}

/// Heisenberg quadratic for mode `k` (zero-based).
pub fn heisenberg_lambda_form(state: &GaussianState, k: usize) -> Result<HeisenbergForm> {
    heisenberg_lambda_form_with_tol(state, k, HEISENBERG_TOL)
}

pub fn heisenberg_lambda_form_with_tol(state: &GaussianState, k: usize, tol: f64) -> Result<HeisenbergForm> {
    if k >= state.modes() {
        return Err(Error::Argument(format!(
            "mode {k} out of range for a {}-mode state",
            state.modes()
        )));
    }
    let (vp, vq) = (state.var_p(k), state.var_q(k));
    let discriminant = 1.0 - 4.0 * vp * vq;
    let minimizer = (discriminant.abs() <= tol).then(|| 1.0 / (2.0 * vq));
    Ok(HeisenbergForm { coefficients: [vq, -1.0, vp], discriminant, minimizer })
}

/// Membership in the Robertson-minimal class with its Williamson certificate.
#[derive(Debug, Clone)]
pub struct Minimality {
    pub minimal: bool,
    pub certificate: WilliamsonDecomposition,
}

/// Minimal iff every symplectic eigenvalue equals `1/2` within `tol`.
pub fn robertson_minimality(state: &GaussianState) -> Result<Minimality> {
    robertson_minimality_with_tol(state, MINIMALITY_TOL)
}

pub fn robertson_minimality_with_tol(state: &GaussianState, tol: f64) -> Result<Minimality> {
    let certificate = williamson(state.cov())?;
    let minimal = certificate.nu.iter().all(|nu| (nu - 0.5).abs() <= tol);
    Ok(Minimality { minimal, certificate })
}

/// Defect of `R̃ J R̃ᵀ - J` for `R̃ = σ̃ + iC̃`, `C̃ = C/(det C)^{1/2N}`.
///
/// Report-only diagnostic: the complex product is evaluated through its
/// real and imaginary parts and the largest entry modulus is returned.
pub fn robertson_matrix_defect(state: &GaussianState) -> Result<f64> {
    let modes = state.modes();
    let re = normalized_sigma(state.cov())?;
    let im = symplectic_form(modes) * -1.0;
    let j = symplectic_form(modes);
    let real = &re * &j * re.transpose() - &im * &j * im.transpose() - &j;
    let imag = &re * &j * im.transpose() + &im * &j * re.transpose();
    Ok(real
        .iter()
        .zip(imag.iter())
        .map(|(a, b)| a.hypot(*b))
        .fold(0.0, f64::max))
}

/// Everything the audit computes for one state.
#[derive(Debug, Clone)]
pub struct UncertaintyReport {
    pub det_sigma: f64,
    pub robertson_margin: f64,
    /// `C_r(σ) - C_r(C)` for `r = 1 ..= 2N`.
    pub char_margins: Vec<f64>,
    /// Only for one-mode states.
    pub schrodinger_margin: Option<f64>,
    pub nu: Vec<f64>,
    /// `ν_k²`, the Williamson-frame factors of `det σ`.
    pub mode_products: Vec<f64>,
    pub sympl_defect_normalized: f64,
    pub block_residuals: BlockConditions,
    pub heisenberg: Vec<HeisenbergForm>,
    pub robertson_matrix_defect: f64,
    pub is_robertson_minimal: bool,
}

pub fn analyze(state: &GaussianState) -> Result<UncertaintyReport> {
    analyze_with_tol(state, MINIMALITY_TOL)
}

/// [`analyze`] with a custom minimality tolerance.
pub fn analyze_with_tol(state: &GaussianState, tol: f64) -> Result<UncertaintyReport> {
    let minimality = robertson_minimality_with_tol(state, tol)?;
    let nu = minimality.certificate.nu.clone();
    let heisenberg = (0..state.modes())
        .map(|k| heisenberg_lambda_form(state, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(UncertaintyReport {
        det_sigma: state.det_sigma(),
        robertson_margin: robertson_margin(state),
        char_margins: characteristic_margins(state)?,
        schrodinger_margin: (state.modes() == 1).then(|| schrodinger_margin(state)).transpose()?,
        mode_products: nu.iter().map(|x| x * x).collect(),
        nu,
        sympl_defect_normalized: symplectic_defect(&normalized_sigma(state.cov())?)?,
        block_residuals: block_conditions(state),
        heisenberg,
        robertson_matrix_defect: robertson_matrix_defect(state)?,
        is_robertson_minimal: minimality.minimal,
    })
}
