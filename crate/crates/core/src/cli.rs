//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input, parse or argument error, 2 validation
//! or singularity, 3 numerical divergence.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::canonical::{propagate_heisenberg, propagate_lambda1, PropagationOptions};
use crate::io;
use crate::states::{random_state_with, stream_rng, validate_state, GaussianState, Purity};
use crate::uncertainty::{self, analyze_with_tol, williamson, MINIMALITY_TOL};
use crate::{Error, Result};

/// Inequality margins below `-AUDIT_TOL` count as violations.
pub const AUDIT_TOL: f64 = 1e-9;

const DEFAULT_SAMPLES: usize = 101;
const DEFAULT_AUDIT_SAMPLES: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "quadsym", version, about = "Symplectic dynamics and uncertainty audits for quadratic Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Window {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t0: f64,
    #[arg(long, allow_negative_numbers = true)]
    t1: f64,
    /// Output rows, both ends included.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the effective frequency Ω²(t) of a one-mode Hamiltonian.
    Omega {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        window: Window,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the transformation matrix Λ(t) and write its trajectory.
    Propagate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        window: Window,
        /// Maximum RK4 step, default (t1 - t0)/10⁴.
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve a state's moments and track its invariants.
    EvolveState {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[command(flatten)]
        window: Window,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Williamson normal form of a state's covariance.
    Williamson {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full uncertainty report of one state.
    Analyze {
        #[arg(long)]
        state: PathBuf,
        /// Tolerance on |ν - 1/2| for the minimal class.
        #[arg(long, default_value_t = MINIMALITY_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit the inequalities over random valid states.
    RandomAudit {
        #[arg(long)]
        modes: usize,
        #[arg(long, default_value_t = DEFAULT_AUDIT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = MINIMALITY_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) | Error::Parse(_) | Error::Io(_) => 1,
        Error::Validation(_) | Error::Singularity(_) => 2,
        Error::Divergence { .. } | Error::Numeric(_) => 3,
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn check_window(w: &Window) -> Result<()> {
    if !(w.t0.is_finite() && w.t1.is_finite() && w.t1 > w.t0) {
        return Err(Error::Argument(format!("need t1 > t0, got t0 = {}, t1 = {}", w.t0, w.t1)));
    }
    if w.samples < 2 {
        return Err(Error::Argument(format!("need at least 2 samples, got {}", w.samples)));
    }
    Ok(())
}

fn load_state(path: &Path) -> Result<GaussianState> {
    let (mean, cov) = io::read_state(path)?;
    validate_state(mean, cov).map_err(|r| Error::Validation(r.to_string()))
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Omega { config, window, out } => {
            check_window(&window)?;
            let spec = io::read_hamiltonian(&config)?;
            spec.check_window(window.t0, window.t1)?;
            let mut text = String::from("t,omega2\n");
            let n = window.samples - 1;
            for i in 0..=n {
                let t = window.t0 + (window.t1 - window.t0) * i as f64 / n as f64;
                text.push_str(&io::csv_row(&[t, spec.omega_squared(t)?]));
            }
            emit(out.as_deref(), &text)
        }
        Command::Propagate { config, window, step, out } => {
            check_window(&window)?;
            let spec = io::read_hamiltonian(&config)?;
            let opts = PropagationOptions { step, samples: window.samples, initial: None };
            let result = propagate_lambda1(&spec, window.t0, window.t1, &opts)?;
            let mut text = io::lambda_header(spec.modes());
            for (t, l) in result.times.iter().zip(&result.lambdas) {
                text.push_str(&io::lambda_row(*t, l));
            }
            emit(out.as_deref(), &text)?;
            eprintln!("final symplectic defect: {}", io::fmt_num(result.last().defect()));
            Ok(())
        }
        Command::EvolveState { config, state, window, step, out } => {
            check_window(&window)?;
            let spec = io::read_hamiltonian(&config)?;
            let state = load_state(&state)?;
            if state.modes() != spec.modes() {
                return Err(Error::Argument(format!(
                    "state has {} modes, Hamiltonian {}",
                    state.modes(),
                    spec.modes()
                )));
            }
            let opts = PropagationOptions { step, samples: window.samples, initial: None };
            let result = propagate_heisenberg(&spec, window.t0, window.t1, &opts)?;
            emit(out.as_deref(), &evolve_csv(&state, &result.times, &result.lambdas)?)
        }
        Command::Williamson { state, out } => {
            let state = load_state(&state)?;
            let w = williamson(state.cov())?;
            let residual = w.residual(state.cov());
            emit(out.as_deref(), &io::to_json_string(&io::williamson_json(&w, residual))?)
        }
        Command::Analyze { state, tol, out } => {
            let state = load_state(&state)?;
            let report = analyze_with_tol(&state, tol)?;
            emit(out.as_deref(), &io::to_json_string(&io::report_json(&report))?)
        }
        Command::RandomAudit { modes, samples, seed, tol, out } => {
            let summary = random_audit(modes, samples, seed, tol)?;
            emit(out.as_deref(), &io::to_json_string(&summary.to_json())?)
        }
    }
}

fn evolve_csv(
    state: &GaussianState,
    times: &[f64],
    propagators: &[crate::canonical::SymplecticMatrix],
) -> Result<String> {
    let n = state.modes();
    let mut text = String::from("t");
    for k in 1..=2 * n {
        let _ = write!(text, ",s_{k}");
    }
    text.push_str(",det_sigma,robertson_margin");
    for k in 1..=n {
        let _ = write!(text, ",nu_{k}");
    }
    text.push_str(",defect\n");
    for (t, phi) in times.iter().zip(propagators) {
        let evolved = state.apply_ct(phi)?;
        let mut row = vec![*t];
        row.extend(evolved.cov().diagonal().iter());
        row.push(evolved.det_sigma());
        row.push(uncertainty::robertson_margin(&evolved));
        row.extend(williamson(evolved.cov())?.nu);
        row.push(phi.defect());
        text.push_str(&io::csv_row(&row));
    }
    Ok(text)
}

/// Aggregate of a random-state audit.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditSummary {
    pub samples: usize,
    /// Smallest `C_r(σ) - C_r(C)` per order `r`.
    pub min_margin_per_order: Vec<f64>,
    /// States breaking an inequality or landing in the wrong minimality class.
    pub violations: usize,
    pub worst_sympl_defect_pure: f64,
}

impl AuditSummary {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "samples": self.samples,
            "min_margin_per_order": self.min_margin_per_order,
            "violations": self.violations,
            "worst_sympl_defect_pure": self.worst_sympl_defect_pure,
        })
    }
}

struct SampleAudit {
    margins: Vec<f64>,
    violated: bool,
    pure_defect: Option<f64>,
}

fn audit_one(modes: usize, seed: u64, index: usize, tol: f64) -> Result<SampleAudit> {
    // even indices draw minimum-uncertainty states, odd ones mixed states
    let purity = if index.is_multiple_of(2) { Purity::Pure } else { Purity::Mixed };
    let state = random_state_with(modes, purity, &mut stream_rng(seed, index as u64))?;
    let report = analyze_with_tol(&state, tol)?;
    let broken = report.robertson_margin < -AUDIT_TOL
        || report.char_margins.iter().any(|m| *m < -AUDIT_TOL)
        || report.heisenberg.iter().any(|h| h.discriminant > AUDIT_TOL)
        || report.is_robertson_minimal != (purity == Purity::Pure);
    Ok(SampleAudit {
        margins: report.char_margins,
        violated: broken,
        pure_defect: (purity == Purity::Pure).then_some(report.sympl_defect_normalized),
    })
}

/// Audits `samples` random states; the result does not depend on thread count.
pub fn random_audit(modes: usize, samples: usize, seed: u64, tol: f64) -> Result<AuditSummary> {
    if modes == 0 {
        return Err(Error::Argument("modes must be positive".into()));
    }
    if samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    let audits = (0..samples)
        .into_par_iter()
        .map(|i| audit_one(modes, seed, i, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut min_margin = vec![f64::INFINITY; 2 * modes];
    let mut violations = 0;
    let mut worst = 0.0f64;
    for a in &audits {
        for (m, x) in min_margin.iter_mut().zip(&a.margins) {
            *m = m.min(*x);
        }
        violations += usize::from(a.violated);
        if let Some(d) = a.pure_defect {
            worst = worst.max(d);
        }
    }
    Ok(AuditSummary { samples, min_margin_per_order: min_margin, violations, worst_sympl_defect_pure: worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 1);
        assert_eq!(exit_code(&Error::Argument("x".into())), 1);
        assert_eq!(exit_code(&Error::Validation("x".into())), 2);
        assert_eq!(exit_code(&Error::Singularity("x".into())), 2);
        assert_eq!(exit_code(&Error::Divergence { time: 0.0, defect: 1.0, limit: 1e-4 }), 3);
    }

    #[test]
    fn bad_flags_exit_one() {
        assert_eq!(run(["quadsym", "omega"]), 1);
        assert_eq!(run(["quadsym", "frobnicate"]), 1);
        assert_eq!(run(["quadsym", "random-audit", "--modes", "1"]), 1);
    }

    #[test]
    fn audit_is_deterministic() {
        let a = random_audit(2, 40, 3, MINIMALITY_TOL).unwrap();
        let b = random_audit(2, 40, 3, MINIMALITY_TOL).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations, 0);
        assert_eq!(a.min_margin_per_order.len(), 4);
    }
}
