//! Line-oriented model file: header, dimension, one weight per line, bias,
//! sigmoid slope and offset. Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;

use super::{CalibratedModel, Diagnostics, LinearSVMModel, SvmError};

pub const MODEL_HEADER: &str = "veracity-linear-svm 1";

pub fn write_model(model: &CalibratedModel) -> String {
    let mut out = String::new();
    writeln!(out, "{MODEL_HEADER}").unwrap();
    writeln!(out, "{}", model.base.weights.len()).unwrap();
    for w in &model.base.weights {
        writeln!(out, "{w:?}").unwrap();
    }
    for v in [model.base.bias, model.platt_a, model.platt_b] {
        writeln!(out, "{v:?}").unwrap();
    }
    out
}

pub fn read_model(text: &str) -> Result<CalibratedModel, SvmError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| SvmError::MalformedModel { line: 0, reason: format!("missing {what}") })
    };
    let (line, header) = next("header")?;
    if header != MODEL_HEADER {
        return Err(SvmError::MalformedModel { line, reason: format!("unsupported header `{header}`") });
    }
    let (line, d) = next("dimension")?;
    let d: usize = d.parse().map_err(|_| SvmError::MalformedModel { line, reason: format!("bad dimension `{d}`") })?;
    let mut number = |what: &str| -> Result<f64, SvmError> {
        let (line, s) = next(what)?;
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| SvmError::MalformedModel { line, reason: format!("bad {what} `{s}`") })
    };
    let weights = (0..d).map(|_| number("weight")).collect::<Result<Vec<_>, _>>()?;
    let bias = number("bias")?;
    let platt_a = number("platt_a")?;
    let platt_b = number("platt_b")?;
    Ok(CalibratedModel {
        base: LinearSVMModel {
            weights,
            bias,
            alphas: Vec::new(),
            diagnostics: Diagnostics { dual_objective: f64::NAN, kkt_violation_max: f64::NAN, epochs_run: 0 },
        },
        platt_a,
        platt_b,
    })
}

pub fn save_model(model: &CalibratedModel, path: &Path) -> Result<(), SvmError> {
    std::fs::write(path, write_model(model)).map_err(|source| SvmError::Io { path: path.to_path_buf(), source })
}

pub fn load_model(path: &Path) -> Result<CalibratedModel, SvmError> {
    let text = std::fs::read_to_string(path).map_err(|source| SvmError::Io { path: path.to_path_buf(), source })?;
    read_model(&text)
}
