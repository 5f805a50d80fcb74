//! Per-video binary action-unit vector and agreement with manual gesture annotations.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::corpus::{au_index, AUFrame, AU_COUNT, CANONICAL_AUS};

pub const DEFAULT_INTENSITY_THRESHOLD: f64 = 3.0;
pub const DEFAULT_PRESENCE_RATIO: f64 = 0.10;

#[derive(Debug, Error, PartialEq)]
pub enum VisualError {
    #[error("no frames to aggregate")]
    EmptyInput,
    #[error("agreement lists differ in length ({auto} vs {manual})")]
    LengthMismatch { auto: usize, manual: usize },
    #[error("AU{0} is not one of the canonical action units")]
    UnknownActionUnit(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct AUVector {
    pub bits: [bool; AU_COUNT],
    /// Set when the clip had no successfully tracked frame.
    pub untracked: bool,
}

impl AUVector {
    pub fn as_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    pub fn is_active(&self, au: u8) -> bool {
        au_index(au).is_some_and(|k| self.bits[k])
    }

    pub fn active(&self) -> impl Iterator<Item = u8> + '_ {
        CANONICAL_AUS.iter().zip(&self.bits).filter(|(_, &b)| b).map(|(&au, _)| au)
    }
}

/// Bit k is set when at least `presence_ratio` of the tracked frames reach
/// `intensity_threshold` on AU k.
pub fn aggregate_au_presence(
    frames: &[AUFrame],
    intensity_threshold: f64,
    presence_ratio: f64,
) -> Result<AUVector, VisualError> {
    if frames.is_empty() {
        return Err(VisualError::EmptyInput);
    }
    let mut hits = [0usize; AU_COUNT];
    let mut tracked = 0usize;
    for frame in frames.iter().filter(|f| f.success) {
        tracked += 1;
        for (hit, &value) in hits.iter_mut().zip(&frame.intensities) {
            if value >= intensity_threshold {
                *hit += 1;
            }
        }
    }
    if tracked == 0 {
        return Ok(AUVector { bits: [false; AU_COUNT], untracked: true });
    }
    let bits = hits.map(|h| h as f64 / tracked as f64 >= presence_ratio);
    Ok(AUVector { bits, untracked: false })
}

/// Gesture category name to the action units that evidence it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AUMapping {
    entries: BTreeMap<String, BTreeSet<u8>>,
}

impl AUMapping {
    pub fn new<I, S>(entries: I) -> Result<Self, VisualError>
    where
        I: IntoIterator<Item = (S, Vec<u8>)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (name, aus) in entries {
            for &au in &aus {
                if au_index(au).is_none() {
                    return Err(VisualError::UnknownActionUnit(au));
                }
            }
            map.entry(name.into()).or_insert_with(BTreeSet::new).extend(aus);
        }
        Ok(AUMapping { entries: map })
    }

    /// Eyebrow, eye and mouth categories with the action units listed for them.
    pub fn standard() -> Self {
        AUMapping::new([
            ("Eyebrows", vec![1, 2, 4]),
            ("Eyes", vec![45, 7]),
            ("Mouth", vec![23, 25, 26, 28]),
        ])
        .expect("standard mapping uses canonical AUs")
    }

    pub fn categories(&self) -> BTreeSet<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &BTreeSet<u8>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }
}

pub fn map_to_annotation_categories(v: &AUVector, m: &AUMapping) -> BTreeSet<String> {
    m.entries()
        .filter(|(_, aus)| aus.iter().any(|&au| v.is_active(au)))
        .map(|(name, _)| name.to_string())
        .collect()
}

/// Mean over records of the fraction of `universe` categories on which the
/// automatic and manual sets agree (both present or both absent).
pub fn compute_agreement(
    auto: &[BTreeSet<String>],
    manual: &[BTreeSet<String>],
    universe: &BTreeSet<String>,
) -> Result<f64, VisualError> {
    if auto.len() != manual.len() {
        return Err(VisualError::LengthMismatch { auto: auto.len(), manual: manual.len() });
    }
    if auto.is_empty() || universe.is_empty() {
        return Err(VisualError::EmptyInput);
    }
    let total: f64 = auto
        .iter()
        .zip(manual)
        .map(|(a, m)| {
            let agree = universe.iter().filter(|c| a.contains(*c) == m.contains(*c)).count();
            agree as f64 / universe.len() as f64
        })
        .sum();
    Ok(total / auto.len() as f64)
}
