//! Soft-margin linear SVM trained in the dual, plus feature standardization
//! and Platt calibration of margins.
//!
//! The solver maximizes
//!
//! ```text
//! D(a) = sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j <x_i, x_j>
//! subject to 0 <= a_i <= C and sum_i a_i y_i = 0
//! ```
//!
//! by pairwise coordinate ascent. Each epoch visits the coordinates in a
//! seeded random order; a coordinate that violates the optimality conditions
//! is updated jointly with the most violating partner on the other side, which
//! keeps the equality constraint satisfied exactly.

mod persist;
mod platt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::Label;

pub use persist::{load_model, read_model, save_model, write_model, MODEL_HEADER};
pub use platt::{fit_platt, platt_probability, PlattConfig};

const STD_FLOOR: f64 = 1e-8;
const MIN_CURVATURE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("no training rows")]
    EmptyInput,
    #[error("training labels contain a single class")]
    SingleClassInput,
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("model file line {line}: {reason}")]
    MalformedModel { line: usize, reason: String },
    #[error("cannot access {}: {source}", path.display())]
    Io { path: std::path::PathBuf, source: std::io::Error },
}

/// Per-dimension affine map to zero mean and unit (population) deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, SvmError> {
        let first = rows.first().ok_or(SvmError::EmptyInput)?;
        let d = first.len();
        check_dims(rows, d)?;
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for row in rows {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in rows {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var.into_iter().map(|v| (v / n).sqrt().max(STD_FLOOR)).collect();
        Ok(Standardizer { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>, SvmError> {
        if x.len() != self.dim() {
            return Err(SvmError::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(x.iter().zip(&self.mean).zip(&self.std).map(|((x, m), s)| (x - m) / s).collect())
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, SvmError> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub c_penalty: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { c_penalty: 1.0, tolerance: 1e-4, max_epochs: 1000, seed: 0 }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), SvmError> {
        if !(self.c_penalty > 0.0 && self.c_penalty.is_finite()) {
            return Err(SvmError::InvalidConfig(format!("C must be positive, got {}", self.c_penalty)));
        }
        if !(self.tolerance > 0.0) {
            return Err(SvmError::InvalidConfig(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_epochs == 0 {
            return Err(SvmError::InvalidConfig("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub dual_objective: f64,
    /// Largest optimality gap between the two index sets at exit.
    pub kkt_violation_max: f64,
    pub epochs_run: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSVMModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub alphas: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl LinearSVMModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn predict_margin(&self, x: &[f64]) -> Result<f64, SvmError> {
        if x.len() != self.dim() {
            return Err(SvmError::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(dot(&self.weights, x) + self.bias)
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<Label, SvmError> {
        self.predict_margin(x).map(Label::from_sign)
    }

    /// `1/2 |w|^2 + C sum_i max(0, 1 - y_i (w.x_i + b))`.
    pub fn primal_objective(&self, rows: &[Vec<f64>], labels: &[Label], c_penalty: f64) -> f64 {
        let hinge: f64 = rows
            .iter()
            .zip(labels)
            .map(|(x, y)| (1.0 - y.sign() * (dot(&self.weights, x) + self.bias)).max(0.0))
            .sum();
        0.5 * dot(&self.weights, &self.weights) + c_penalty * hinge
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(rows: &[Vec<f64>], d: usize) -> Result<(), SvmError> {
    match rows.iter().find(|r| r.len() != d) {
        Some(r) => Err(SvmError::DimensionMismatch { expected: d, found: r.len() }),
        None => Ok(()),
    }
}

pub fn train_svm(rows: &[Vec<f64>], labels: &[Label], cfg: &TrainConfig) -> Result<LinearSVMModel, SvmError> {
    train_svm_observed(rows, labels, cfg, |_, _| {})
}

/// Same as [`train_svm`], calling `on_epoch(epoch, alphas)` after every epoch.
pub fn train_svm_observed<F>(rows: &[Vec<f64>], labels: &[Label], cfg: &TrainConfig, mut on_epoch: F) -> Result<LinearSVMModel, SvmError>
where
    F: FnMut(usize, &[f64]),
{
    cfg.validate()?;
    let first = rows.first().ok_or(SvmError::EmptyInput)?;
    let d = first.len();
    check_dims(rows, d)?;
    if labels.len() != rows.len() {
        return Err(SvmError::DimensionMismatch { expected: rows.len(), found: labels.len() });
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(SvmError::SingleClassInput);
    }

    let n = rows.len();
    let c = cfg.c_penalty;
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    // q[i][j] = y_i y_j <x_i, x_j>
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * dot(&rows[i], &rows[j])).collect())
        .collect();

    let mut solver = Solver { q: &q, y: &y, c, alpha: vec![0.0; n], grad: vec![-1.0; n] };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut epochs_run = 0;
    let mut gap = solver.gap();
    while epochs_run < cfg.max_epochs && gap >= cfg.tolerance {
        order.shuffle(&mut rng);
        for &i in &order {
            solver.visit(i, cfg.tolerance);
        }
        epochs_run += 1;
        on_epoch(epochs_run, &solver.alpha);
        gap = solver.gap();
    }

    let bias = solver.bias();
    let mut weights = vec![0.0; d];
    for (i, row) in rows.iter().enumerate() {
        let coef = solver.alpha[i] * y[i];
        if coef != 0.0 {
            for (w, x) in weights.iter_mut().zip(row) {
                *w += coef * x;
            }
        }
    }
    let dual_objective = solver.alpha.iter().sum::<f64>() - 0.5 * dot(&weights, &weights);
    Ok(LinearSVMModel {
        weights,
        bias,
        alphas: solver.alpha,
        diagnostics: Diagnostics { dual_objective, kkt_violation_max: gap, epochs_run },
    })
}

/// Working state in the minimization form `f(a) = 1/2 a'Qa - sum a`, with
/// `grad = Qa - 1`.
struct Solver<'a> {
    q: &'a [Vec<f64>],
    y: &'a [f64],
    c: f64,
    alpha: Vec<f64>,
    grad: Vec<f64>,
}

impl Solver<'_> {
    /// Coordinates whose `y_t a_t` can still grow.
    fn in_up(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.c
        }
    }

    fn score(&self, t: usize) -> f64 {
        -self.y[t] * self.grad[t]
    }

    fn argmax_up(&self) -> Option<(usize, f64)> {
        (0..self.alpha.len())
            .filter(|&t| self.in_up(t))
            .map(|t| (t, self.score(t)))
            .fold(None, |best, cur| match best {
                Some((_, s)) if s >= cur.1 => best,
                _ => Some(cur),
            })
    }

    fn argmin_low(&self) -> Option<(usize, f64)> {
        (0..self.alpha.len())
            .filter(|&t| self.in_low(t))
            .map(|t| (t, self.score(t)))
            .fold(None, |best, cur| match best {
                Some((_, s)) if s <= cur.1 => best,
                _ => Some(cur),
            })
    }

    fn gap(&self) -> f64 {
        match (self.argmax_up(), self.argmin_low()) {
            (Some((_, m)), Some((_, big_m))) => (m - big_m).max(0.0),
            _ => 0.0,
        }
    }

    fn visit(&mut self, t: usize, tol: f64) {
        let s = self.score(t);
        if self.in_up(t) {
            if let Some((j, low)) = self.argmin_low() {
                if s - low > tol && j != t {
                    self.update(t, j);
                    return;
                }
            }
        }
        if self.in_low(t) {
            if let Some((i, up)) = self.argmax_up() {
                if up - s > tol && i != t {
                    self.update(i, t);
                }
            }
        }
    }

    /// Analytic two-variable step for a violating pair, `i` from the up set
    /// and `j` from the low set, clipped back into the box.
    fn update(&mut self, i: usize, j: usize) {
        let (c, q) = (self.c, self.q);
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if self.y[i] != self.y[j] {
            let quad = (q[i][i] + q[j][j] + 2.0 * q[i][j]).max(MIN_CURVATURE);
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (q[i][i] + q[j][j] - 2.0 * q[i][j]).max(MIN_CURVATURE);
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for (k, g) in self.grad.iter_mut().enumerate() {
            *g += q[k][i] * di + q[k][j] * dj;
        }
    }

    /// Mean of `y_t - f(x_t)` over free support vectors; midpoint of the
    /// feasible interval when every alpha sits at a bound.
    fn bias(&self) -> f64 {
        let free: Vec<f64> = (0..self.alpha.len())
            .filter(|&t| self.alpha[t] > 0.0 && self.alpha[t] < self.c)
            .map(|t| self.score(t))
            .collect();
        if !free.is_empty() {
            return free.iter().sum::<f64>() / free.len() as f64;
        }
        match (self.argmax_up(), self.argmin_low()) {
            (Some((_, m)), Some((_, big_m))) => 0.5 * (m + big_m),
            (Some((_, m)), None) => m,
            (None, Some((_, big_m))) => big_m,
            (None, None) => 0.0,
        }
    }
}

/// Base model plus the sigmoid mapping its margin to P(deceptive).
#[derive(Clone, Debug, PartialEq)]
pub struct CalibratedModel {
    pub base: LinearSVMModel,
    pub platt_a: f64,
    pub platt_b: f64,
}

impl CalibratedModel {
    pub fn probability_deceptive(&self, x: &[f64]) -> Result<f64, SvmError> {
        self.base.predict_margin(x).map(|m| platt_probability(m, self.platt_a, self.platt_b))
    }

    /// `(p_truthful, p_deceptive)`.
    pub fn probabilities(&self, x: &[f64]) -> Result<(f64, f64), SvmError> {
        self.probability_deceptive(x).map(|p| (1.0 - p, p))
    }
}

pub const CALIBRATION_FOLDS: usize = 5;

/// Trains on all rows, then fits the sigmoid on out-of-fold margins from an
/// inner stratified split so the calibration data was not seen by the model
/// that scored it. Falls back to in-sample margins when a class is too small
/// to split.
pub fn train_calibrated(rows: &[Vec<f64>], labels: &[Label], cfg: &TrainConfig) -> Result<CalibratedModel, SvmError> {
    let base = train_svm(rows, labels, cfg)?;
    let margins = match out_of_fold_margins(rows, labels, cfg, CALIBRATION_FOLDS)? {
        Some(m) => m,
        None => rows.iter().map(|x| base.predict_margin(x)).collect::<Result<_, _>>()?,
    };
    let (platt_a, platt_b) = fit_platt(&margins, labels, &PlattConfig::default())?;
    Ok(CalibratedModel { base, platt_a, platt_b })
}

/// Margins of each row under a model trained without its inner fold, or
/// `None` if some class has fewer rows than folds.
pub fn out_of_fold_margins(rows: &[Vec<f64>], labels: &[Label], cfg: &TrainConfig, folds: usize) -> Result<Option<Vec<f64>>, SvmError> {
    if Label::ALL.iter().any(|&c| labels.iter().filter(|&&l| l == c).count() < folds) {
        return Ok(None);
    }
    let assignment = crate::fusion::stratified_folds(labels, folds, cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut margins = vec![0.0; rows.len()];
    for fold in 0..folds {
        let (train_x, train_y): (Vec<Vec<f64>>, Vec<Label>) = rows
            .iter()
            .zip(labels)
            .zip(&assignment)
            .filter(|(_, &f)| f != fold)
            .map(|((x, &y), _)| (x.clone(), y))
            .unzip();
        let model = train_svm(&train_x, &train_y, cfg)?;
        for (i, _) in assignment.iter().enumerate().filter(|(_, &f)| f == fold) {
            margins[i] = model.predict_margin(&rows[i])?;
        }
    }
    Ok(Some(margins))
}
