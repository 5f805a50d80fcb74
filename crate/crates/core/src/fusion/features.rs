//! Fold-independent feature extraction. Visual and acoustic vectors do not
//! depend on training data, so they are computed once per corpus; lexical
//! vectors need a fold's vocabulary and are produced on demand.

use rayon::prelude::*;

use crate::acoustic::{extract_acoustic, read_wav, AcousticConfig, AcousticError, AcousticVector, AudioClip};
use crate::corpus::{AUFrame, Corpus, TranscriptToken, VideoRecord, AU_COUNT};
use crate::lexical::{augment_with_affect, vectorize, AffectLexicon, Lexicons, LexicalVector, PosWeights, Vocabulary};
use crate::visual::{aggregate_au_presence, AUVector, VisualError, DEFAULT_INTENSITY_THRESHOLD, DEFAULT_PRESENCE_RATIO};

use super::segment::{allocate_frames, UtteranceSlice, WordLengthUnit};
use super::FusionError;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureConfig {
    pub intensity_threshold: f64,
    pub presence_ratio: f64,
    pub min_frequency: usize,
    pub pos_weights: PosWeights,
    pub lexicons: Lexicons,
    pub affect: Option<AffectLexicon>,
    pub acoustic: AcousticConfig,
    pub word_length_unit: WordLengthUnit,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            intensity_threshold: DEFAULT_INTENSITY_THRESHOLD,
            presence_ratio: DEFAULT_PRESENCE_RATIO,
            min_frequency: crate::lexical::DEFAULT_MIN_FREQUENCY,
            pos_weights: PosWeights::default(),
            lexicons: Lexicons::default(),
            affect: None,
            acoustic: AcousticConfig::default(),
            word_length_unit: WordLengthUnit::Tokens,
        }
    }
}

impl FeatureConfig {
    /// AU vector over a frame range; an empty range yields the all-zero vector.
    pub fn visual(&self, frames: &[AUFrame]) -> AUVector {
        match aggregate_au_presence(frames, self.intensity_threshold, self.presence_ratio) {
            Ok(v) => v,
            Err(VisualError::EmptyInput) => AUVector { bits: [false; AU_COUNT], untracked: true },
            Err(e) => unreachable!("aggregation only fails on empty input: {e}"),
        }
    }

    pub fn lexical(&self, tokens: &[TranscriptToken], vocab: &Vocabulary) -> LexicalVector {
        let v = vectorize(tokens, vocab, &self.pos_weights);
        match &self.affect {
            Some(lex) => augment_with_affect(&v, tokens, lex),
            None => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UtteranceFeatures {
    pub slice: UtteranceSlice,
    pub visual: AUVector,
    pub acoustic: AcousticVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordFeatures {
    pub visual: AUVector,
    pub acoustic: AcousticVector,
    pub utterances: Vec<UtteranceFeatures>,
}

fn load_clip(record: &VideoRecord) -> Result<Option<AudioClip>, FusionError> {
    match &record.audio_path {
        Some(path) => read_wav(path).map(Some).map_err(|e| FusionError::Acoustic { id: record.id.clone(), source: e }),
        None => Ok(None),
    }
}

/// Audio span of a frame slice: from its first frame's timestamp to the next
/// slice's first timestamp (or the clip end for the last slice).
fn slice_times(frames: &[AUFrame], slice: &UtteranceSlice) -> Option<(f64, f64)> {
    let start = frames.get(slice.frames.start)?.timestamp_s;
    if slice.frames.is_empty() {
        return None;
    }
    let end = frames.get(slice.frames.end).map_or(f64::INFINITY, |f| f.timestamp_s);
    Some((start, end))
}

pub fn prepare_record(record: &VideoRecord, cfg: &FeatureConfig, with_acoustic: bool) -> Result<RecordFeatures, FusionError> {
    let visual = cfg.visual(&record.au_frames);
    let clip = if with_acoustic && record.precomputed_acoustic.is_none() { load_clip(record)? } else { None };
    let acoustic = match (&record.precomputed_acoustic, &clip) {
        _ if !with_acoustic => AcousticVector([0.0; crate::corpus::ACOUSTIC_DIM]),
        (Some(v), _) => AcousticVector(*v),
        (None, Some(clip)) => {
            extract_acoustic(clip, &cfg.acoustic).map_err(|e| FusionError::Acoustic { id: record.id.clone(), source: e })?
        }
        (None, None) => return Err(FusionError::MissingAcoustic(record.id.clone())),
    };

    let slices = allocate_frames(&record.transcript, record.au_frames.len(), cfg.word_length_unit)?;
    let utterances = slices
        .into_iter()
        .map(|slice| {
            let utterance_visual = cfg.visual(&record.au_frames[slice.frames.clone()]);
            let utterance_acoustic = match (&clip, slice_times(&record.au_frames, &slice)) {
                (Some(clip), Some((start, end))) => match clip.slice_seconds(start, end).map(|c| extract_acoustic(&c, &cfg.acoustic)) {
                    Some(Ok(v)) => v,
                    Some(Err(AcousticError::ClipTooShort { .. })) | None => acoustic,
                    Some(Err(e)) => return Err(FusionError::Acoustic { id: record.id.clone(), source: e }),
                },
                _ => acoustic,
            };
            Ok(UtteranceFeatures { slice, visual: utterance_visual, acoustic: utterance_acoustic })
        })
        .collect::<Result<Vec<_>, FusionError>>()?;
    Ok(RecordFeatures { visual, acoustic, utterances })
}

pub fn prepare_corpus(corpus: &Corpus, cfg: &FeatureConfig, with_acoustic: bool) -> Result<Vec<RecordFeatures>, FusionError> {
    corpus.records.par_iter().map(|r| prepare_record(r, cfg, with_acoustic)).collect()
}
