//! Linear canonical transformations `Q' = Λ Q` and their time evolution.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::hamiltonian::{self, GrandMatrix, HamiltonianSpec};
use crate::matcore::{self, matrix_exponential, max_abs, symplectic_defect, symplectic_form};
use crate::{Error, Result};

/// Default construction tolerance on the symplectic defect.
pub const SYMPLECTIC_TOL: f64 = 1e-8;

/// Propagated matrices are re-projected when their defect exceeds this.
pub const RESYMPLECTIFY_THRESHOLD: f64 = 1e-10;

/// Steps between re-projection checks.
pub const RESYMPLECTIFY_EVERY: usize = 100;

/// A raw defect above this aborts propagation.
pub const DIVERGENCE_DEFECT: f64 = 1e-4;

/// Default number of RK4 steps when no step is given.
pub const DEFAULT_STEPS: usize = 10_000;

/// A `2N x 2N` real matrix with `Λ J Λᵀ ≈ J`, carrying its measured defect.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    modes: usize,
    matrix: DMatrix<f64>,
    defect: f64,
}

impl SymplecticMatrix {
    /// Accepts `matrix` if its defect is at most [`SYMPLECTIC_TOL`].
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, SYMPLECTIC_TOL)
    }

    pub fn with_tolerance(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let s = Self::measured(matrix)?;
        if !(s.defect <= tol) {
            return Err(Error::Argument(format!(
                "matrix is not symplectic: defect {:e} exceeds {tol:e}",
                s.defect
            )));
        }
        Ok(s)
    }

    /// Wraps without enforcing a tolerance; the defect is still recorded.
    pub(crate) fn measured(matrix: DMatrix<f64>) -> Result<Self> {
        let modes = matcore::ensure_phase_space(&matrix, "symplectic matrix")?;
        matcore::ensure_finite(&matrix, "symplectic matrix")?;
        let defect = symplectic_defect(&matrix)?;
        Ok(SymplecticMatrix { modes, matrix, defect })
    }

    pub fn identity(modes: usize) -> Self {
        SymplecticMatrix {
            modes,
            matrix: DMatrix::identity(2 * modes, 2 * modes),
            defect: 0.0,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    /// `Λ⁻¹ = -J Λᵀ J`, exact on the group.
    pub fn symplectic_inverse(&self) -> Self {
        let j = symplectic_form(self.modes);
        let matrix = -(&j * self.matrix.transpose() * &j);
        let defect = symplectic_defect(&matrix).unwrap_or(f64::INFINITY);
        SymplecticMatrix { modes: self.modes, matrix, defect }
    }

    fn block(&self, row: usize, col: usize) -> DMatrix<f64> {
        let n = self.modes;
        self.matrix.view((row * n, col * n), (n, n)).into_owned()
    }

    pub fn lambda_pp(&self) -> DMatrix<f64> {
        self.block(0, 0)
    }

    pub fn lambda_pq(&self) -> DMatrix<f64> {
        self.block(0, 1)
    }

    pub fn lambda_qp(&self) -> DMatrix<f64> {
        self.block(1, 0)
    }

    pub fn lambda_qq(&self) -> DMatrix<f64> {
        self.block(1, 1)
    }

    /// Blockwise form of the symplectic condition.
    pub fn block_residuals(&self) -> BlockResiduals {
        let (pp, pq, qp, qq) = (self.lambda_pp(), self.lambda_pq(), self.lambda_qp(), self.lambda_qq());
        let n = self.modes;
        let unit = &pp * qq.transpose() - &pq * qp.transpose() - DMatrix::<f64>::identity(n, n);
        let qq_qp = &qq * qp.transpose();
        let pq_pp = &pq * pp.transpose();
        BlockResiduals {
            unit: max_abs(&unit),
            qq_qp_asymmetry: matcore::symmetry_error(&qq_qp),
            pq_pp_asymmetry: matcore::symmetry_error(&pq_pp),
        }
    }
}

/// Max-abs residuals of `λpp λqqᵀ - λpq λqpᵀ = I` and of the symmetry of
/// `λqq λqpᵀ` and `λpq λppᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockResiduals {
    pub unit: f64,
    pub qq_qp_asymmetry: f64,
    pub pq_pp_asymmetry: f64,
}

impl BlockResiduals {
    pub fn max(&self) -> f64 {
        self.unit.max(self.qq_qp_asymmetry).max(self.pq_pp_asymmetry)
    }
}

/// Free rotation of uncoupled oscillators over time `t`:
/// `q' = q cos ωt + p sin ωt / (mω)`, `p' = -mω q sin ωt + p cos ωt`.
pub fn rotation_ct(masses: &[f64], frequencies: &[f64], t: f64) -> Result<SymplecticMatrix> {
    hamiltonian::check_oscillator_params(masses, frequencies)?;
    if !t.is_finite() {
        return Err(Error::Argument(format!("time must be finite, got {t}")));
    }
    let n = masses.len();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let (mass, w) = (masses[k], frequencies[k]);
        let (s, c) = (w * t).sin_cos();
        m[(k, k)] = c;
        m[(k, n + k)] = -mass * w * s;
        m[(n + k, k)] = s / (mass * w);
        m[(n + k, n + k)] = c;
    }
    SymplecticMatrix::measured(m)
}

/// Single-mode squeezes: `p_k ↦ e^{-r_k} p_k`, `q_k ↦ e^{r_k} q_k`.
///
/// This is the moment action of `exp[r (a†² - a²)/2]` per mode.
pub fn squeeze_ct(r: &[f64]) -> Result<SymplecticMatrix> {
    if r.is_empty() || r.iter().any(|x| !x.is_finite()) {
        return Err(Error::Argument("squeeze parameters must be finite and nonempty".into()));
    }
    let n = r.len();
    let diag: Vec<f64> = (0..2 * n)
        .map(|i| if i < n { (-r[i]).exp() } else { r[i - n].exp() })
        .collect();
    SymplecticMatrix::measured(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

/// `Λ = Λ₂ Λ₁`: first `l1`, then `l2`.
pub fn compose(l2: &SymplecticMatrix, l1: &SymplecticMatrix) -> Result<SymplecticMatrix> {
    if l1.modes != l2.modes {
        return Err(Error::Argument(format!(
            "cannot compose {}-mode and {}-mode transformations",
            l2.modes, l1.modes
        )));
    }
    SymplecticMatrix::measured(&l2.matrix * &l1.matrix)
}

/// `exp(2Jℋ' t) exp(-2Jℋ t)` for constant grand matrices.
pub fn stationary_total_lambda(h: &GrandMatrix, target: &GrandMatrix, t: f64) -> Result<SymplecticMatrix> {
    if h.modes() != target.modes() {
        return Err(Error::Argument(format!(
            "mode mismatch: Hamiltonian has {} modes, target {}",
            h.modes(),
            target.modes()
        )));
    }
    let first = matrix_exponential(&(h.flow_generator() * t))?;
    let second = matrix_exponential(&(target.flow_generator() * -t))?;
    SymplecticMatrix::measured(second * first)
}

/// Step size, output sampling and initial value of a propagation.
#[derive(Debug, Clone)]
pub struct PropagationOptions {
    /// Maximum RK4 step; defaults to `(t1 - t0) / 10⁴`.
    pub step: Option<f64>,
    /// Number of output samples including both ends.
    pub samples: usize,
    /// Initial matrix `Λ(t0)`; identity when `None`.
    pub initial: Option<SymplecticMatrix>,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions { step: None, samples: 2, initial: None }
    }
}

impl PropagationOptions {
    pub fn with_step(step: f64) -> Self {
        PropagationOptions { step: Some(step), ..Self::default() }
    }

    pub fn samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn initial(mut self, initial: SymplecticMatrix) -> Self {
        self.initial = Some(initial);
        self
    }
}

/// Sampled trajectory of a propagated transformation matrix.
#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub times: Vec<f64>,
    pub lambdas: Vec<SymplecticMatrix>,
    /// Worst raw defect seen before any correction.
    pub max_defect: f64,
    /// Whether a re-projection onto the group was applied.
    pub corrected: bool,
    /// Number of RK4 steps taken.
    pub steps: usize,
}

impl PropagationResult {
    pub fn last(&self) -> &SymplecticMatrix {
        self.lambdas.last().expect("propagation has at least two samples")
    }
}

#[derive(Clone, Copy)]
enum Side {
    /// `dΛ/dt = Λ F(t)`
    Right,
    /// `dΛ/dt = F(t) Λ`
    Left,
}

/// `Λ⁽¹⁾` with `dΛ/dt = Λ F(t)`, `F = -2Jℋ(t)`.
pub fn propagate_lambda1(
    spec: &HamiltonianSpec,
    t0: f64,
    t1: f64,
    opts: &PropagationOptions,
) -> Result<PropagationResult> {
    propagate(spec, t0, t1, opts, 1.0, Side::Right)
}

/// `Λ⁽²⁾` with `dΛ/dt = F(t) Λ`, `F = 2Jℋ'(t)` for the target Hamiltonian.
pub fn propagate_lambda2(
    target: &HamiltonianSpec,
    t0: f64,
    t1: f64,
    opts: &PropagationOptions,
) -> Result<PropagationResult> {
    propagate(target, t0, t1, opts, -1.0, Side::Left)
}

/// Heisenberg-picture propagator `Φ` with `dΦ/dt = -2Jℋ(t) Φ`, so that
/// `Q(t) = Φ(t) Q(t0)` and moments transport as `σ(t) = Φ σ(t0) Φᵀ`.
pub fn propagate_heisenberg(
    spec: &HamiltonianSpec,
    t0: f64,
    t1: f64,
    opts: &PropagationOptions,
) -> Result<PropagationResult> {
    propagate(spec, t0, t1, opts, 1.0, Side::Left)
}

/// `sign` multiplies the Heisenberg generator `-2Jℋ`.
fn propagate(
    spec: &HamiltonianSpec,
    t0: f64,
    t1: f64,
    opts: &PropagationOptions,
    sign: f64,
    side: Side,
) -> Result<PropagationResult> {
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::Argument(format!("need finite t1 > t0, got [{t0}, {t1}]")));
    }
    if opts.samples < 2 {
        return Err(Error::Argument(format!("need at least 2 samples, got {}", opts.samples)));
    }
    let span = t1 - t0;
    let max_step = opts.step.unwrap_or(span / DEFAULT_STEPS as f64);
    if !(max_step > 0.0 && max_step.is_finite()) {
        return Err(Error::Argument(format!("step must be positive, got {max_step}")));
    }
    spec.check_window(t0, t1)?;
    let modes = spec.modes();
    let mut lambda = match &opts.initial {
        Some(init) if init.modes() != modes => {
            return Err(Error::Argument(format!(
                "initial matrix has {} modes, Hamiltonian {}",
                init.modes(),
                modes
            )))
        }
        Some(init) => init.matrix().clone(),
        None => DMatrix::identity(2 * modes, 2 * modes),
    };

    let intervals = opts.samples - 1;
    // tiny slack so that span / h landing on an integer does not add a step
    let per_interval = ((span / intervals as f64) / max_step * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let total = per_interval * intervals;
    let h = span / total as f64;

    let generator = |t: f64| -> Result<DMatrix<f64>> { Ok(spec.assemble(t)?.flow_generator() * sign) };
    let mul = |lam: &DMatrix<f64>, f: &DMatrix<f64>| match side {
        Side::Right => lam * f,
        Side::Left => f * lam,
    };

    let mut times = Vec::with_capacity(opts.samples);
    let mut lambdas = Vec::with_capacity(opts.samples);
    times.push(t0);
    lambdas.push(SymplecticMatrix::measured(lambda.clone())?);
    let mut max_defect = lambdas[0].defect();
    let mut corrected = false;

    let mut f_start = generator(t0)?;
    for step in 1..=total {
        let t = t0 + (step - 1) as f64 * h;
        let t_end = if step == total { t1 } else { t0 + step as f64 * h };
        let f_mid = generator(t + 0.5 * h)?;
        let f_end = generator(t_end)?;

        let k1 = mul(&lambda, &f_start);
        let k2 = mul(&(&lambda + &k1 * (0.5 * h)), &f_mid);
        let k3 = mul(&(&lambda + &k2 * (0.5 * h)), &f_mid);
        let k4 = mul(&(&lambda + &k3 * h), &f_end);
        lambda += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        f_start = f_end;

        let defect = symplectic_defect(&lambda)?;
        if !(defect <= DIVERGENCE_DEFECT) {
            return Err(Error::Divergence { time: t_end, defect, limit: DIVERGENCE_DEFECT });
        }
        max_defect = max_defect.max(defect);
        if step % RESYMPLECTIFY_EVERY == 0 && defect > RESYMPLECTIFY_THRESHOLD {
            lambda = matcore::resymplectify(&lambda)?;
            corrected = true;
        }
        if step % per_interval == 0 {
            times.push(t_end);
            lambdas.push(SymplecticMatrix::measured(lambda.clone())?);
        }
    }

    Ok(PropagationResult { times, lambdas, max_defect, corrected, steps: total })
}

/// Solution of `z̈ + Ω²(t) z = 0` on a uniform grid.
#[derive(Debug, Clone)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub z: Vec<Complex64>,
    pub zdot: Vec<Complex64>,
}

impl ClassicalTrajectory {
    /// `W = ż z* - z ż*`, purely imaginary and conserved.
    pub fn wronskian(&self, i: usize) -> Complex64 {
        self.zdot[i] * self.z[i].conj() - self.z[i] * self.zdot[i].conj()
    }

    /// `max |W(t) - W(t0)|`, relative to `|W(t0)|` when that is nonzero.
    pub fn wronskian_drift(&self) -> f64 {
        let w0 = self.wronskian(0);
        let scale = if w0.norm() > 0.0 { w0.norm() } else { 1.0 };
        (0..self.times.len())
            .map(|i| (self.wronskian(i) - w0).norm() / scale)
            .fold(0.0, f64::max)
    }
}

/// RK4 for the classical auxiliary oscillator, rewritten as a first-order
/// system in `(z, ż)`. Every step is recorded.
pub fn solve_classical_z<F>(
    omega2: F,
    z0: Complex64,
    zdot0: Complex64,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<ClassicalTrajectory>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::Argument(format!("need finite t1 > t0, got [{t0}, {t1}]")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Argument(format!("step must be positive, got {step}")));
    }
    if z0.norm() == 0.0 && zdot0.norm() == 0.0 {
        return Err(Error::Argument("initial z and ż are both zero".into()));
    }
    let n = ((t1 - t0) / step * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = (t1 - t0) / n as f64;
    let mut times = Vec::with_capacity(n + 1);
    let mut zs = Vec::with_capacity(n + 1);
    let mut dzs = Vec::with_capacity(n + 1);
    let (mut z, mut dz) = (z0, zdot0);
    times.push(t0);
    zs.push(z);
    dzs.push(dz);
    let mut w_start = omega2(t0)?;
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let t_end = if i + 1 == n { t1 } else { t0 + (i + 1) as f64 * h };
        let w_mid = omega2(t + 0.5 * h)?;
        let w_end = omega2(t_end)?;
        let (k1z, k1v) = (dz, -z * w_start);
        let (k2z, k2v) = (dz + k1v * (0.5 * h), -(z + k1z * (0.5 * h)) * w_mid);
        let (k3z, k3v) = (dz + k2v * (0.5 * h), -(z + k2z * (0.5 * h)) * w_mid);
        let (k4z, k4v) = (dz + k3v * h, -(z + k3z * h) * w_end);
        z += (k1z + k2z * 2.0 + k3z * 2.0 + k4z) * (h / 6.0);
        dz += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        w_start = w_end;
        times.push(t_end);
        zs.push(z);
        dzs.push(dz);
    }
    Ok(ClassicalTrajectory { times, z: zs, zdot: dzs })
}
