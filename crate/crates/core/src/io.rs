//! JSON and CSV formats used by the command-line front end.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::canonical::SymplecticMatrix;
use crate::hamiltonian::{preset, HamiltonianSpec, Schedule};
use crate::states::GaussianState;
use crate::uncertainty::{UncertaintyReport, WilliamsonDecomposition};
use crate::{Error, Result};

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ScheduleJson {
    Constant { value: Rows },
    Exponential { alpha: Rows, beta: f64 },
    Harmonic { alpha: Rows, beta: Rows, gamma: f64, phi: f64 },
    SecantSquared { alpha: Rows, rate: f64 },
    Table { times: Vec<f64>, values: Vec<Rows>, #[serde(default)] interp: Option<String> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlocksJson {
    modes: usize,
    #[serde(rename = "A")]
    a: ScheduleJson,
    #[serde(rename = "B", default)]
    b: Option<ScheduleJson>,
    #[serde(rename = "C")]
    c: ScheduleJson,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    modes: usize,
    mean: Vec<f64>,
    cov: Rows,
}

/// Row-major nested arrays to a matrix; rows must be non-empty and equal length.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::Parse("matrix must have at least one entry".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::Parse(format!("ragged matrix: row of length {} in a {ncols}-column matrix", bad.len())));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn square_block(rows: &[Vec<f64>], modes: usize, what: &str) -> Result<DMatrix<f64>> {
    let m = matrix_from_rows(rows)?;
    if m.shape() != (modes, modes) {
        return Err(Error::Argument(format!(
            "{what} is {}x{}, expected {modes}x{modes}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

fn build_schedule(s: ScheduleJson, modes: usize, name: &str) -> Result<Schedule> {
    match s {
        ScheduleJson::Constant { value } => Schedule::constant(square_block(&value, modes, name)?),
        ScheduleJson::Exponential { alpha, beta } => Schedule::exponential(square_block(&alpha, modes, name)?, beta),
        ScheduleJson::Harmonic { alpha, beta, gamma, phi } => Schedule::harmonic(
            square_block(&alpha, modes, name)?,
            square_block(&beta, modes, name)?,
            gamma,
            phi,
        ),
        ScheduleJson::SecantSquared { alpha, rate } => {
            Schedule::secant_squared(square_block(&alpha, modes, name)?, rate)
        }
        ScheduleJson::Table { times, values, interp } => {
            if let Some(kind) = interp.filter(|k| k != "cubic") {
                return Err(Error::Argument(format!("unsupported interpolation {kind:?}, only \"cubic\"")));
            }
            let values = values
                .iter()
                .map(|v| square_block(v, modes, name))
                .collect::<Result<Vec<_>>>()?;
            Schedule::table(times, values)
        }
    }
}

/// Parses either `{"modes", "A", "B", "C"}` or `{"preset": name, ...params}`.
pub fn parse_hamiltonian(text: &str) -> Result<HamiltonianSpec> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Parse("Hamiltonian must be a JSON object".into()))?;
    for key in ["d", "e", "D", "E"] {
        if obj.contains_key(key) {
            return Err(Error::Argument(format!(
                "linear term {key:?} is not supported; displace the state mean instead"
            )));
        }
    }
    if let Some(name) = obj.get("preset") {
        let name = name
            .as_str()
            .ok_or_else(|| Error::Parse("\"preset\" must be a string".into()))?;
        let mut params = BTreeMap::new();
        for (k, v) in obj.iter().filter(|(k, _)| k.as_str() != "preset") {
            let x = v
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("preset parameter {k:?} must be a number")))?;
            params.insert(k.clone(), x);
        }
        return preset(name, &params);
    }
    let blocks: BlocksJson = serde_json::from_value(value)?;
    if blocks.modes == 0 {
        return Err(Error::Argument("modes must be positive".into()));
    }
    let a = build_schedule(blocks.a, blocks.modes, "A")?;
    let b = match blocks.b {
        Some(b) => build_schedule(b, blocks.modes, "B")?,
        None => Schedule::zeros(blocks.modes),
    };
    let c = build_schedule(blocks.c, blocks.modes, "C")?;
    HamiltonianSpec::new(a, b, c)
}

pub fn read_hamiltonian(path: &Path) -> Result<HamiltonianSpec> {
    parse_hamiltonian(&std::fs::read_to_string(path)?)
}

/// Raw moments of `{"modes", "mean", "cov"}`; validation is left to the caller.
pub fn parse_state(text: &str) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let s: StateJson = serde_json::from_str(text)?;
    if s.modes == 0 {
        return Err(Error::Argument("modes must be positive".into()));
    }
    let dim = 2 * s.modes;
    if s.mean.len() != dim {
        return Err(Error::Argument(format!("mean has {} entries, expected {dim}", s.mean.len())));
    }
    let cov = matrix_from_rows(&s.cov)?;
    if cov.shape() != (dim, dim) {
        return Err(Error::Argument(format!(
            "cov is {}x{}, expected {dim}x{dim}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    Ok((DVector::from_vec(s.mean), cov))
}

pub fn read_state(path: &Path) -> Result<(DVector<f64>, DMatrix<f64>)> {
    parse_state(&std::fs::read_to_string(path)?)
}

pub fn state_json(state: &GaussianState) -> Value {
    json!({
        "modes": state.modes(),
        "mean": state.mean().iter().copied().collect::<Vec<_>>(),
        "cov": matrix_to_rows(state.cov()),
    })
}

/// Report in the fixed audit schema.
pub fn report_json(r: &UncertaintyReport) -> Value {
    json!({
        "det_sigma": r.det_sigma,
        "robertson_margin": r.robertson_margin,
        "char_margins": r.char_margins,
        "nu": r.nu,
        "sympl_defect": r.sympl_defect_normalized,
        "block_residuals": {
            "o42a": r.block_residuals.variance_product,
            "o42b": r.block_residuals.commutation,
        },
        "minimal": r.is_robertson_minimal,
    })
}

pub fn williamson_json(w: &WilliamsonDecomposition, residual: f64) -> Value {
    let mut m = Map::new();
    m.insert("nu".into(), json!(w.nu));
    m.insert("S".into(), json!(matrix_to_rows(w.s.matrix())));
    m.insert("sympl_defect".into(), json!(w.s.defect()));
    m.insert("residual".into(), json!(residual));
    Value::Object(m)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Scientific notation with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_row(values: &[f64]) -> String {
    let mut line = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&fmt_num(*v));
    }
    line.push('\n');
    line
}

/// Header of a transformation-matrix trajectory: `t`, row-major entries, `defect`.
pub fn lambda_header(modes: usize) -> String {
    let dim = 2 * modes;
    let mut h = String::from("t");
    for i in 0..dim {
        for j in 0..dim {
            let _ = write!(h, ",L[{i}][{j}]");
        }
    }
    h.push_str(",defect\n");
    h
}

pub fn lambda_row(t: f64, l: &SymplecticMatrix) -> String {
    let m = l.matrix();
    let mut values = Vec::with_capacity(m.len() + 2);
    values.push(t);
    for row in m.row_iter() {
        values.extend(row.iter().copied());
    }
    values.push(l.defect());
    csv_row(&values)
}

/// Parses a CSV produced by this module back into a header and numeric rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?
        .split(',')
        .map(str::to_owned)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let row = line
            .split(',')
            .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", n + 1))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != header.len() {
            return Err(Error::Parse(format!("row {} has {} fields, header {}", n + 1, row.len(), header.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}
