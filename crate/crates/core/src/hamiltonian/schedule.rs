//! Time-dependent matrix coefficients.

use nalgebra::DMatrix;

use crate::matcore::{ensure_finite, max_abs};
use crate::{Error, Result};

/// Minimum number of knots a table schedule needs for a cubic spline.
pub const MIN_TABLE_SAMPLES: usize = 4;

/// `|cos(ωt)|` below this makes a secant-squared schedule singular.
const SECANT_POLE_TOL: f64 = 1e-8;

/// Relative slack when testing whether `t` lies inside a table's window.
const DOMAIN_SLACK: f64 = 1e-12;

/// A matrix-valued function of time with first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Constant(DMatrix<f64>),
    /// `alpha · exp(beta t)`, entrywise.
    Exponential { alpha: DMatrix<f64>, beta: f64 },
    /// `alpha + beta · cos(gamma t + phi)`, entrywise.
    Harmonic {
        alpha: DMatrix<f64>,
        beta: DMatrix<f64>,
        gamma: f64,
        phi: f64,
    },
    /// `alpha · sec²(rate t)`; singular where `cos(rate t) = 0`.
    SecantSquared { alpha: DMatrix<f64>, rate: f64 },
    /// Natural cubic spline through sampled matrices.
    Table(TableSchedule),
}

/// Value and derivatives of a schedule at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSample {
    pub value: DMatrix<f64>,
    pub first: DMatrix<f64>,
    pub second: DMatrix<f64>,
}

impl Schedule {
    pub fn constant(value: DMatrix<f64>) -> Result<Self> {
        ensure_finite(&value, "constant schedule")?;
        Ok(Schedule::Constant(value))
    }

    pub fn exponential(alpha: DMatrix<f64>, beta: f64) -> Result<Self> {
        ensure_finite(&alpha, "exponential alpha")?;
        finite_scalar(beta, "exponential beta")?;
        Ok(Schedule::Exponential { alpha, beta })
    }

    pub fn harmonic(alpha: DMatrix<f64>, beta: DMatrix<f64>, gamma: f64, phi: f64) -> Result<Self> {
        ensure_finite(&alpha, "harmonic alpha")?;
        ensure_finite(&beta, "harmonic beta")?;
        finite_scalar(gamma, "harmonic gamma")?;
        finite_scalar(phi, "harmonic phi")?;
        if alpha.shape() != beta.shape() {
            return Err(Error::Argument("harmonic alpha and beta differ in shape".into()));
        }
        Ok(Schedule::Harmonic { alpha, beta, gamma, phi })
    }

    pub fn secant_squared(alpha: DMatrix<f64>, rate: f64) -> Result<Self> {
        ensure_finite(&alpha, "secant alpha")?;
        finite_scalar(rate, "secant rate")?;
        Ok(Schedule::SecantSquared { alpha, rate })
    }

    pub fn table(times: Vec<f64>, values: Vec<DMatrix<f64>>) -> Result<Self> {
        TableSchedule::new(times, values).map(Schedule::Table)
    }

    pub fn zeros(n: usize) -> Self {
        Schedule::Constant(DMatrix::zeros(n, n))
    }

    /// `(rows, cols)` of every value.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Schedule::Constant(v) => v.shape(),
            Schedule::Exponential { alpha, .. }
            | Schedule::Harmonic { alpha, .. }
            | Schedule::SecantSquared { alpha, .. } => alpha.shape(),
            Schedule::Table(t) => t.values[0].shape(),
        }
    }

    /// Closed time window on which the schedule is defined, `None` if unbounded.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            Schedule::Table(t) => Some(t.domain()),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Schedule::Constant(_))
    }

    pub fn value(&self, t: f64) -> Result<DMatrix<f64>> {
        Ok(self.sample(t)?.value)
    }

    /// Value with analytic (or spline) first and second derivatives.
    pub fn sample(&self, t: f64) -> Result<ScheduleSample> {
        finite_scalar(t, "time")?;
        match self {
            Schedule::Constant(v) => {
                let z = DMatrix::zeros(v.nrows(), v.ncols());
                Ok(ScheduleSample { value: v.clone(), first: z.clone(), second: z })
            }
            Schedule::Exponential { alpha, beta } => {
                let e = (beta * t).exp();
                Ok(ScheduleSample {
                    value: alpha * e,
                    first: alpha * (beta * e),
                    second: alpha * (beta * beta * e),
                })
            }
            Schedule::Harmonic { alpha, beta, gamma, phi } => {
                let arg = gamma * t + phi;
                let (s, c) = arg.sin_cos();
                Ok(ScheduleSample {
                    value: alpha + beta * c,
                    first: beta * (-gamma * s),
                    second: beta * (-gamma * gamma * c),
                })
            }
            Schedule::SecantSquared { alpha, rate } => {
                let (s, c) = (rate * t).sin_cos();
                if c.abs() < SECANT_POLE_TOL {
                    return Err(Error::Singularity(format!(
                        "secant-squared schedule has a pole at t = {t}"
                    )));
                }
                let sec2 = 1.0 / (c * c);
                let tan = s / c;
                // d/dt sec² = 2ω sec² tan, d²/dt² = 2ω² sec² (sec² + 2 tan²)
                Ok(ScheduleSample {
                    value: alpha * sec2,
                    first: alpha * (2.0 * rate * sec2 * tan),
                    second: alpha * (2.0 * rate * rate * sec2 * (sec2 + 2.0 * tan * tan)),
                })
            }
            Schedule::Table(table) => table.sample(t),
        }
    }
}

fn finite_scalar(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("{what} must be finite, got {x}")))
    }
}

/// Sampled matrices joined by an entrywise natural cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSchedule {
    times: Vec<f64>,
    values: Vec<DMatrix<f64>>,
    /// Spline second derivatives at each knot.
    curvature: Vec<DMatrix<f64>>,
}

impl TableSchedule {
    pub fn new(times: Vec<f64>, values: Vec<DMatrix<f64>>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Argument(format!(
                "table has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < MIN_TABLE_SAMPLES {
            return Err(Error::Argument(format!(
                "cubic table needs at least {MIN_TABLE_SAMPLES} samples, got {}",
                times.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Argument("table times must be finite".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("table times must be strictly increasing".into()));
        }
        let shape = values[0].shape();
        for v in &values {
            if v.shape() != shape {
                return Err(Error::Argument("table values differ in shape".into()));
            }
            ensure_finite(v, "table value")?;
        }
        let curvature = natural_spline_curvature(&times, &values);
        Ok(TableSchedule { times, values, curvature })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[DMatrix<f64>] {
        &self.values
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    fn sample(&self, t: f64) -> Result<ScheduleSample> {
        let (lo, hi) = self.domain();
        let slack = DOMAIN_SLACK * (hi - lo).max(1.0);
        if t < lo - slack || t > hi + slack {
            return Err(Error::Argument(format!(
                "t = {t} outside table window [{lo}, {hi}]"
            )));
        }
        let t = t.clamp(lo, hi);
        // last knot index not exceeding t, capped so that i + 1 is valid
        let i = match self.times.partition_point(|&x| x <= t) {
            0 => 0,
            k => (k - 1).min(self.times.len() - 2),
        };
        let h = self.times[i + 1] - self.times[i];
        let a = (self.times[i + 1] - t) / h;
        let b = (t - self.times[i]) / h;
        let (y0, y1) = (&self.values[i], &self.values[i + 1]);
        let (m0, m1) = (&self.curvature[i], &self.curvature[i + 1]);
        let value = y0 * a + y1 * b + (m0 * (a * a * a - a) + m1 * (b * b * b - b)) * (h * h / 6.0);
        let first = (y1 - y0) / h + m0 * (-(3.0 * a * a - 1.0) * h / 6.0) + m1 * ((3.0 * b * b - 1.0) * h / 6.0);
        let second = m0 * a + m1 * b;
        Ok(ScheduleSample { value, first, second })
    }
}

/// Second derivatives of the natural cubic spline (zero at both ends),
/// solved entrywise with the Thomas algorithm.
fn natural_spline_curvature(times: &[f64], values: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    let n = times.len();
    let (rows, cols) = values[0].shape();
    let zero = DMatrix::<f64>::zeros(rows, cols);
    let mut curvature = vec![zero.clone(); n];
    let interior = n - 2;
    let h: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();

    // forward sweep over unknowns M_1..M_{n-2}
    let mut diag = Vec::with_capacity(interior);
    let mut rhs = Vec::with_capacity(interior);
    for k in 0..interior {
        let i = k + 1;
        let mut d = 2.0 * (h[i - 1] + h[i]);
        let mut r = ((&values[i + 1] - &values[i]) / h[i] - (&values[i] - &values[i - 1]) / h[i - 1]) * 6.0;
        if k > 0 {
            let w = h[i - 1] / diag[k - 1];
            d -= w * h[i - 1];
            r -= &rhs[k - 1] * w;
        }
        diag.push(d);
        rhs.push(r);
    }
    for k in (0..interior).rev() {
        let i = k + 1;
        let mut r = rhs[k].clone();
        if k + 1 < interior {
            r -= &curvature[i + 1] * h[i];
        }
        curvature[i] = r / diag[k];
    }
    debug_assert!(curvature.iter().all(|m| max_abs(m).is_finite()));
    curvature
}
