//! Corpus domain types and the on-disk formats they are read from.
//!
//! A corpus is a list of trial clips. Each clip carries its ground-truth label,
//! a transcript (words, fillers, and pause markers split into utterances), the
//! per-frame action-unit intensities produced by a face tracker, and either a
//! WAV file or a precomputed 28-value acoustic summary.

mod manifest;
mod openface;
pub mod synth;
mod transcript;
mod validate;

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use manifest::{load_manifest, load_manifest_with, parse_acoustic_file, parse_annotation_file, LoadedCorpus};
pub use openface::{parse_openface_csv, parse_openface_str};
pub use synth::{generate_synthetic_corpus, SynthConfig};
pub use transcript::{parse_transcript, parse_transcript_str, FILLERS, PAUSE_TOKEN};
pub use validate::{validate_record, Exclusion, ValidationConfig, Verdict, RejectReason};

use thiserror::Error;

/// Number of action units in the canonical visual layout.
pub const AU_COUNT: usize = 18;

/// Canonical action-unit order used by every frame and per-video vector.
pub const CANONICAL_AUS: [u8; AU_COUNT] = [1, 2, 4, 5, 6, 7, 9, 10, 12, 14, 15, 17, 20, 23, 25, 26, 28, 45];

/// Length of the fixed acoustic summary layout.
pub const ACOUSTIC_DIM: usize = 28;

/// Column stem used by OpenFace for an action unit, e.g. `AU04`.
pub fn au_name(au: u8) -> String {
    format!("AU{au:02}")
}

/// Position of an action unit in [`CANONICAL_AUS`].
pub fn au_index(au: u8) -> Option<usize> {
    CANONICAL_AUS.iter().position(|&a| a == au)
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("malformed manifest {}:{line}: {reason}", path.display())]
    MalformedManifest { path: PathBuf, line: usize, reason: String },
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("empty transcript: {}", .0.display())]
    EmptyTranscript(PathBuf),
    #[error("{}: missing column {column}", path.display())]
    MissingColumn { path: PathBuf, column: String },
    #[error("{}:{line}: malformed row: {reason}", path.display())]
    MalformedRow { path: PathBuf, line: usize, reason: String },
    #[error("{}: {reason}", path.display())]
    MalformedAcoustic { path: PathBuf, reason: String },
    #[error("n_videos must be a positive even number, got {0}")]
    InvalidVideoCount(usize),
    #[error("signal strength must lie in [0, 1], got {0}")]
    InvalidStrength(f64),
    #[error("i/o failure on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CorpusError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            CorpusError::MissingFile(path)
        } else {
            CorpusError::Io { path, source }
        }
    }
}

/// Ground truth for a clip. Deceptive is the positive class everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Truthful,
    Deceptive,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Truthful, Label::Deceptive];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Truthful => "truthful",
            Label::Deceptive => "deceptive",
        }
    }

    /// Signed class coding: Deceptive = +1, Truthful = -1.
    pub fn sign(self) -> f64 {
        match self {
            Label::Truthful => -1.0,
            Label::Deceptive => 1.0,
        }
    }

    /// Inverse of [`Label::sign`]; zero maps to Deceptive.
    pub fn from_sign(value: f64) -> Label {
        if value >= 0.0 {
            Label::Deceptive
        } else {
            Label::Truthful
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "truthful" => Ok(Label::Truthful),
            "deceptive" => Ok(Label::Deceptive),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Word,
    Filler,
    Pause,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptToken {
    pub kind: TokenKind,
    pub text: String,
    pub utterance_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub tokens: Vec<TranscriptToken>,
    pub utterance_count: usize,
}

impl Transcript {
    /// Tokens belonging to one utterance.
    pub fn utterance(&self, index: usize) -> &[TranscriptToken] {
        let start = self.tokens.partition_point(|t| t.utterance_index < index);
        let end = self.tokens.partition_point(|t| t.utterance_index <= index);
        &self.tokens[start..end]
    }

    /// Token count of every utterance, in order.
    pub fn utterance_lengths(&self) -> Vec<usize> {
        let mut lengths = vec![0; self.utterance_count];
        for token in &self.tokens {
            lengths[token.utterance_index] += 1;
        }
        lengths
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AUFrame {
    pub frame_index: u64,
    pub timestamp_s: f64,
    pub intensities: [f64; AU_COUNT],
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VideoRecord {
    pub id: String,
    pub label: Label,
    pub transcript: Transcript,
    pub au_frames: Vec<AUFrame>,
    pub audio_path: Option<PathBuf>,
    pub precomputed_acoustic: Option<[f64; ACOUSTIC_DIM]>,
    pub manual_annotation: Option<BTreeSet<String>>,
}

impl VideoRecord {
    /// Seconds covered by the AU frame series.
    pub fn au_span_s(&self) -> f64 {
        match (self.au_frames.first(), self.au_frames.last()) {
            (Some(first), Some(last)) => last.timestamp_s - first.timestamp_s,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub records: Vec<VideoRecord>,
}

impl Corpus {
    pub fn new(records: Vec<VideoRecord>) -> Result<Self, CorpusError> {
        let mut seen = std::collections::HashSet::new();
        for record in &records {
            if !seen.insert(record.id.as_str()) {
                return Err(CorpusError::DuplicateId(record.id.clone()));
            }
        }
        Ok(Corpus { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.label).collect()
    }
}
