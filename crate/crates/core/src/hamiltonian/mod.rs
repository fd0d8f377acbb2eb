//! Quadratic Hamiltonians `H = Q·ℋ(t)·Q` in grand-matrix form.
//!
//! With `Q = (p, q)` the grand matrix is `ℋ = [[A, B], [Bᵀ, C]]`, where `A`
//! multiplies `p·p`, `B` the `p·q` cross terms and `C` the `q·q` terms.
//! There is no factor `1/2` in front: a unit oscillator has `A = C = 1/2`.

mod schedule;

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::matcore::{self, symmetrize, symplectic_form, SYMMETRY_TOL};
use crate::{Error, Result};

pub use schedule::{Schedule, ScheduleSample, TableSchedule, MIN_TABLE_SAMPLES};

/// `|a(t)|` below this is treated as the singular point of the `Ω²` formula.
const OMEGA_A_FLOOR: f64 = 1e-12;

/// Time-dependent `A`, `B`, `C` blocks of an `N`-mode quadratic Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    modes: usize,
    a: Schedule,
    b: Schedule,
    c: Schedule,
}

impl HamiltonianSpec {
    pub fn new(a: Schedule, b: Schedule, c: Schedule) -> Result<Self> {
        let (n, m) = a.shape();
        if n == 0 || n != m {
            return Err(Error::Argument(format!("block A must be square and nonempty, got {n}x{m}")));
        }
        for (name, s) in [("B", &b), ("C", &c)] {
            if s.shape() != (n, n) {
                let (r, k) = s.shape();
                return Err(Error::Argument(format!("block {name} is {r}x{k}, expected {n}x{n}")));
            }
        }
        let spec = HamiltonianSpec { modes: n, a, b, c };
        if spec.is_constant() {
            // catch asymmetric constant blocks at construction time
            spec.assemble(0.0)?;
        }
        Ok(spec)
    }

    /// Time-independent Hamiltonian from constant blocks.
    pub fn constant(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        Self::new(Schedule::constant(a)?, Schedule::constant(b)?, Schedule::constant(c)?)
    }

    /// Constant Hamiltonian from a full `2N x 2N` grand matrix.
    pub fn from_grand(grand: &GrandMatrix) -> Result<Self> {
        let n = grand.modes;
        let m = &grand.matrix;
        Self::constant(
            m.view((0, 0), (n, n)).into_owned(),
            m.view((0, n), (n, n)).into_owned(),
            m.view((n, n), (n, n)).into_owned(),
        )
    }

    pub fn zero(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Argument("mode count must be positive".into()));
        }
        Self::new(Schedule::zeros(modes), Schedule::zeros(modes), Schedule::zeros(modes))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn a(&self) -> &Schedule {
        &self.a
    }

    pub fn b(&self) -> &Schedule {
        &self.b
    }

    pub fn c(&self) -> &Schedule {
        &self.c
    }

    pub fn is_constant(&self) -> bool {
        self.a.is_constant() && self.b.is_constant() && self.c.is_constant()
    }

    /// Intersection of the blocks' time windows, `None` when unbounded.
    pub fn domain(&self) -> Option<(f64, f64)> {
        [&self.a, &self.b, &self.c]
            .iter()
            .filter_map(|s| s.domain())
            .reduce(|(lo, hi), (l, h)| (lo.max(l), hi.min(h)))
    }

    /// Errors unless `[t0, t1]` is inside [`domain`](Self::domain).
    pub fn check_window(&self, t0: f64, t1: f64) -> Result<()> {
        if let Some((lo, hi)) = self.domain() {
            let slack = 1e-12 * (hi - lo).abs().max(1.0);
            if t0 < lo - slack || t1 > hi + slack || lo > hi {
                return Err(Error::Argument(format!(
                    "window [{t0}, {t1}] exceeds schedule domain [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Grand matrix `[[A, B], [Bᵀ, C]]` at time `t`, exactly symmetric.
    pub fn assemble(&self, t: f64) -> Result<GrandMatrix> {
        let n = self.modes;
        let a = self.a.value(t)?;
        let b = self.b.value(t)?;
        let c = self.c.value(t)?;
        for (name, blk) in [("A", &a), ("C", &c)] {
            let asym = matcore::symmetry_error(blk);
            if asym > SYMMETRY_TOL {
                return Err(Error::Validation(format!(
                    "block {name} is not symmetric at t = {t} (max |M - Mᵀ| = {asym:e})"
                )));
            }
        }
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&a);
        m.view_mut((0, n), (n, n)).copy_from(&b);
        m.view_mut((n, 0), (n, n)).copy_from(&b.transpose());
        m.view_mut((n, n), (n, n)).copy_from(&c);
        Ok(GrandMatrix { modes: n, matrix: symmetrize(&m) })
    }

    /// `Ω²(t)` of a one-mode Hamiltonian, see [`omega_squared`].
    pub fn omega_squared(&self, t: f64) -> Result<f64> {
        if self.modes != 1 {
            return Err(Error::Argument(format!(
                "Ω² reduction needs a one-mode Hamiltonian, got {} modes",
                self.modes
            )));
        }
        omega_squared(&self.a, &self.b, &self.c, t)
    }
}

/// Free function form of [`HamiltonianSpec::assemble`].
pub fn assemble_grand_matrix(spec: &HamiltonianSpec, t: f64) -> Result<GrandMatrix> {
    spec.assemble(t)
}

/// Symmetric `2N x 2N` grand matrix of a quadratic Hamiltonian at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct GrandMatrix {
    modes: usize,
    matrix: DMatrix<f64>,
}

impl GrandMatrix {
    /// Wraps a symmetric `2N x 2N` matrix, symmetrizing away rounding noise.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let modes = matcore::ensure_phase_space(&matrix, "grand matrix")?;
        matcore::ensure_finite(&matrix, "grand matrix")?;
        let asym = matcore::symmetry_error(&matrix);
        if asym > SYMMETRY_TOL {
            return Err(Error::Validation(format!("grand matrix is not symmetric ({asym:e})")));
        }
        Ok(GrandMatrix { modes, matrix: symmetrize(&matrix) })
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

    /// `-2Jℋ`: the Heisenberg equations read `dQ/dt = -2Jℋ Q`.
    pub fn flow_generator(&self) -> DMatrix<f64> {
        symplectic_form(self.modes) * &self.matrix * -2.0
    }
}

/// `N` uncoupled stationary oscillators: `A = diag(1/2m)`, `B = 0`,
/// `C = diag(mω²/2)`.
pub fn target_oscillator(masses: &[f64], frequencies: &[f64]) -> Result<HamiltonianSpec> {
    check_oscillator_params(masses, frequencies)?;
    let n = masses.len();
    let a = DMatrix::from_fn(n, n, |i, j| if i == j { 0.5 / masses[i] } else { 0.0 });
    let c = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.5 * masses[i] * frequencies[i] * frequencies[i]
        } else {
            0.0
        }
    });
    HamiltonianSpec::constant(a, DMatrix::zeros(n, n), c)
}

pub(crate) fn check_oscillator_params(masses: &[f64], frequencies: &[f64]) -> Result<()> {
    if masses.is_empty() || masses.len() != frequencies.len() {
        return Err(Error::Argument(format!(
            "need equal nonzero numbers of masses and frequencies, got {} and {}",
            masses.len(),
            frequencies.len()
        )));
    }
    for (&m, &w) in masses.iter().zip(frequencies) {
        if !(m > 0.0 && m.is_finite() && w > 0.0 && w.is_finite()) {
            return Err(Error::Argument(format!(
                "oscillator parameters must be positive, got m = {m}, ω = {w}"
            )));
        }
    }
    Ok(())
}

/// Frequency of the classical auxiliary equation `z̈ + Ω²(t) z = 0` for a
/// one-mode Hamiltonian `a p² + 2b pq + c q²`:
///
/// `Ω² = 4ac + 2bȧ/a + ä/(2a) - 3ȧ²/(4a²) - 4b² - 2ḃ`.
pub fn omega_squared(a: &Schedule, b: &Schedule, c: &Schedule, t: f64) -> Result<f64> {
    for (name, s) in [("a", a), ("b", b), ("c", c)] {
        if s.shape() != (1, 1) {
            return Err(Error::Argument(format!("Ω² needs scalar schedules, {name} is not 1x1")));
        }
    }
    let sa = a.sample(t)?;
    let sb = b.sample(t)?;
    let sc = c.sample(t)?;
    let (a, da, dda) = (sa.value[(0, 0)], sa.first[(0, 0)], sa.second[(0, 0)]);
    let (b, db) = (sb.value[(0, 0)], sb.first[(0, 0)]);
    let c = sc.value[(0, 0)];
    if !(a.abs() > OMEGA_A_FLOOR) || !a.is_finite() {
        return Err(Error::Singularity(format!("a(t) = {a} vanishes at t = {t}")));
    }
    Ok(4.0 * a * c + 2.0 * b * da / a + dda / (2.0 * a) - 3.0 * da * da / (4.0 * a * a) - 4.0 * b * b - 2.0 * db)
}

/// Named one-mode Hamiltonian families.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// `H = p²/2m + mω²q²/2`.
    Stationary { m: f64, omega: f64 },
    /// Mass `m(t) = m0 exp(-2 b t)` at fixed bare frequency `omega0`.
    VaryingMass { m0: f64, b: f64, omega0: f64 },
    /// Fixed mass, `ω²(t) = alpha + beta cos(gamma t + phi)`.
    VaryingFrequency { m: f64, alpha: f64, beta: f64, gamma: f64, phi: f64 },
    /// Mass `m(t) = m0 cos²(b t)` at fixed bare frequency `omega0`.
    CosineMass { m0: f64, b: f64, omega0: f64 },
}

impl Preset {
    pub const NAMES: [&'static str; 4] = ["stationary", "varying_mass", "varying_frequency", "cosine_mass"];

    /// Builds a preset from its name and a parameter table.
    pub fn from_params(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str| {
            params
                .get(key)
                .copied()
                .ok_or_else(|| Error::Argument(format!("preset {name} needs parameter {key:?}")))
        };
        let opt = |key: &str| params.get(key).copied().unwrap_or(0.0);
        let allowed: &[&str] = match name {
            "stationary" => &["m", "omega"],
            "varying_mass" | "cosine_mass" => &["m0", "b", "omega0"],
            "varying_frequency" => &["m", "alpha", "beta", "gamma", "phi"],
            other => {
                return Err(Error::Argument(format!(
                    "unknown preset {other:?}, expected one of {:?}",
                    Self::NAMES
                )))
            }
        };
        if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Argument(format!("preset {name} has no parameter {extra:?}")));
        }
        let preset = match name {
            "stationary" => Preset::Stationary { m: get("m")?, omega: get("omega")? },
            "varying_mass" => Preset::VaryingMass { m0: get("m0")?, b: get("b")?, omega0: get("omega0")? },
            "cosine_mass" => Preset::CosineMass { m0: get("m0")?, b: get("b")?, omega0: get("omega0")? },
            _ => Preset::VaryingFrequency {
                m: get("m")?,
                alpha: get("alpha")?,
                beta: opt("beta"),
                gamma: opt("gamma"),
                phi: opt("phi"),
            },
        };
        preset.validate()?;
        Ok(preset)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Stationary { .. } => "stationary",
            Preset::VaryingMass { .. } => "varying_mass",
            Preset::VaryingFrequency { .. } => "varying_frequency",
            Preset::CosineMass { .. } => "cosine_mass",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Argument(format!("preset {}: {msg}", self.name())));
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            Preset::Stationary { m, omega } => {
                if !finite(&[m, omega]) || m <= 0.0 || omega < 0.0 {
                    return bad(format!("need m > 0 and ω ≥ 0, got m = {m}, ω = {omega}"));
                }
            }
            Preset::VaryingMass { m0, b, omega0 } | Preset::CosineMass { m0, b, omega0 } => {
                if !finite(&[m0, b, omega0]) || m0 <= 0.0 || omega0 < 0.0 {
                    return bad(format!("need m0 > 0 and ω0 ≥ 0, got m0 = {m0}, ω0 = {omega0}"));
                }
            }
            Preset::VaryingFrequency { m, alpha, beta, gamma, phi } => {
                if !finite(&[m, alpha, beta, gamma, phi]) || m <= 0.0 {
                    return bad(format!("need finite parameters and m > 0, got m = {m}"));
                }
                if alpha < beta.abs() {
                    return bad(format!("ω²(t) = {alpha} + {beta} cos(..) goes negative"));
                }
            }
        }
        Ok(())
    }

    /// The one-mode Hamiltonian of this family.
    pub fn build(&self) -> Result<HamiltonianSpec> {
        self.validate()?;
        let s = |x: f64| DMatrix::from_element(1, 1, x);
        match *self {
            Preset::Stationary { m, omega } => {
                HamiltonianSpec::constant(s(0.5 / m), s(0.0), s(0.5 * m * omega * omega))
            }
            Preset::VaryingMass { m0, b, omega0 } => HamiltonianSpec::new(
                Schedule::exponential(s(0.5 / m0), 2.0 * b)?,
                Schedule::zeros(1),
                Schedule::exponential(s(0.5 * m0 * omega0 * omega0), -2.0 * b)?,
            ),
            Preset::VaryingFrequency { m, alpha, beta, gamma, phi } => HamiltonianSpec::new(
                Schedule::constant(s(0.5 / m))?,
                Schedule::zeros(1),
                Schedule::harmonic(s(0.5 * m * alpha), s(0.5 * m * beta), gamma, phi)?,
            ),
            Preset::CosineMass { m0, b, omega0 } => {
                // c(t) = m0 ω0² cos²(bt) / 2 = m0 ω0² (1 + cos 2bt) / 4
                let k = 0.25 * m0 * omega0 * omega0;
                HamiltonianSpec::new(
                    Schedule::secant_squared(s(0.5 / m0), b)?,
                    Schedule::zeros(1),
                    Schedule::harmonic(s(k), s(k), 2.0 * b, 0.0)?,
                )
            }
        }
    }
}

/// Builds a named preset; see [`Preset::from_params`].
pub fn preset(name: &str, params: &BTreeMap<String, f64>) -> Result<HamiltonianSpec> {
    Preset::from_params(name, params)?.build()
}

/// Largest symmetric-block violation over a set of sample times.
pub fn max_block_asymmetry(spec: &HamiltonianSpec, times: &[f64]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &t in times {
        worst = worst.max(matcore::symmetry_error(&spec.a.value(t)?));
        worst = worst.max(matcore::symmetry_error(&spec.c.value(t)?));
    }
    Ok(worst)
}
