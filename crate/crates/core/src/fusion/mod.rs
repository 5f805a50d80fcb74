//! Early, decision-level and utterance-level fusion of the three modalities,
//! cross-validated evaluation and report rendering.

mod cv;
mod evaluate;
mod features;
mod report;
mod segment;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::acoustic::{AcousticError, AcousticVector};
use crate::corpus::Label;
use crate::lexical::{LexicalError, LexicalVector};
use crate::svm::{Standardizer, SvmError};
use crate::visual::AUVector;

pub use cv::{assign_folds, stratified_folds, CVConfig};
pub use evaluate::{EvalConfig, Evaluator, FoldModels, RowResult};
pub use features::{prepare_corpus, prepare_record, FeatureConfig, RecordFeatures, UtteranceFeatures};
pub use report::{parse_report_csv, reference_rows, render_csv, render_text, with_reference_rows, ReportRow, RowSource, NOT_REPRODUCED};
pub use segment::{allocate_frames, largest_remainder, UtteranceSlice, WordLengthUnit};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("transcript has no utterances")]
    EmptyTranscript,
    #[error("probability pair ({0}, {1}) does not sum to 1")]
    MalformedProbability(f64, f64),
    #[error("fusion weights must be non-negative with a positive sum")]
    InvalidWeights,
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{class} has {found} records, fewer than the {needed} folds")]
    TooFewRecords { class: Label, found: usize, needed: usize },
    #[error("no modality is enabled for {0}")]
    NoModality(String),
    #[error("record {0} has neither an acoustic vector nor audio")]
    MissingAcoustic(String),
    #[error("record {id}: {source}")]
    Acoustic { id: String, source: AcousticError },
    #[error(transparent)]
    Lexical(#[from] LexicalError),
    #[error(transparent)]
    Svm(#[from] SvmError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    Visual,
    Lexical,
    Acoustic,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Visual, Modality::Lexical, Modality::Acoustic];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Visual => "visual",
            Modality::Lexical => "lexical",
            Modality::Acoustic => "acoustic",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FusionStrategy {
    EarlyFusion,
    /// Weights for [visual, lexical, acoustic].
    DecisionFusion { weights: [f64; 3] },
    UtteranceFusion,
}

impl FusionStrategy {
    pub fn decision_uniform() -> Self {
        FusionStrategy::DecisionFusion { weights: [1.0 / 3.0; 3] }
    }
}

/// One evaluated row: a single modality or a fusion strategy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Single(Modality),
    Fusion(FusionStrategy),
}

impl Method {
    /// The six rows in report order.
    pub fn standard() -> [Method; 6] {
        [
            Method::Single(Modality::Lexical),
            Method::Single(Modality::Acoustic),
            Method::Single(Modality::Visual),
            Method::Fusion(FusionStrategy::EarlyFusion),
            Method::Fusion(FusionStrategy::decision_uniform()),
            Method::Fusion(FusionStrategy::UtteranceFusion),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Single(m) => m.as_str(),
            Method::Fusion(FusionStrategy::EarlyFusion) => "early_fusion",
            Method::Fusion(FusionStrategy::DecisionFusion { .. }) => "decision_fusion",
            Method::Fusion(FusionStrategy::UtteranceFusion) => "utterance_fusion",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::standard()
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown row `{s}` (expected one of lexical, acoustic, visual, early_fusion, decision_fusion, utterance_fusion)"))
    }
}

/// Per-modality standardizers, fitted on training rows only.
#[derive(Clone, Debug, PartialEq)]
pub struct ModalityStandardizers {
    pub visual: Standardizer,
    pub lexical: Standardizer,
    pub acoustic: Standardizer,
}

/// `[standardized(v) | standardized(l) | standardized(a)]`.
pub fn early_fuse(v: &AUVector, l: &LexicalVector, a: &AcousticVector, s: &ModalityStandardizers) -> Result<Vec<f64>, FusionError> {
    let mut out = s.visual.transform(&v.as_f64())?;
    out.extend(s.lexical.transform(&l.0)?);
    out.extend(s.acoustic.transform(a.as_slice())?);
    Ok(out)
}

/// Normalizes non-negative weights to sum to one.
pub fn normalize_weights(weights: &[f64]) -> Result<Vec<f64>, FusionError> {
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) || !(sum > 0.0) {
        return Err(FusionError::InvalidWeights);
    }
    Ok(weights.iter().map(|w| w / sum).collect())
}

/// Weighted sum of `(p_truthful, p_deceptive)` pairs; the larger class score
/// wins and a tie goes to Deceptive.
pub fn decision_fuse(probs: &[(f64, f64)], weights: &[f64]) -> Result<Label, FusionError> {
    if probs.len() != weights.len() {
        return Err(FusionError::DimensionMismatch { expected: weights.len(), found: probs.len() });
    }
    let weights = normalize_weights(weights)?;
    let (mut truthful, mut deceptive) = (0.0, 0.0);
    for (&(pt, pd), w) in probs.iter().zip(&weights) {
        if !((pt + pd - 1.0).abs() <= 1e-6) || pt < 0.0 || pd < 0.0 {
            return Err(FusionError::MalformedProbability(pt, pd));
        }
        truthful += w * pt;
        deceptive += w * pd;
    }
    Ok(if deceptive >= truthful { Label::Deceptive } else { Label::Truthful })
}

/// Video label from utterance decisions; a tie goes to Deceptive.
pub fn majority_vote(votes: &[Label]) -> Label {
    let deceptive = votes.iter().filter(|&&l| l == Label::Deceptive).count();
    if 2 * deceptive >= votes.len() {
        Label::Deceptive
    } else {
        Label::Truthful
    }
}
