//! Splitting a video's frame sequence across its utterances in proportion to
//! utterance length.

use std::ops::Range;
use std::str::FromStr;

use crate::corpus::Transcript;

use super::FusionError;

/// How utterance length is measured when apportioning frames.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WordLengthUnit {
    #[default]
    Tokens,
    Characters,
}

impl WordLengthUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            WordLengthUnit::Tokens => "tokens",
            WordLengthUnit::Characters => "characters",
        }
    }
}

impl FromStr for WordLengthUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tokens" => Ok(WordLengthUnit::Tokens),
            "characters" => Ok(WordLengthUnit::Characters),
            other => Err(format!("unknown word length unit `{other}` (expected tokens or characters)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtteranceSlice {
    pub utterance_index: usize,
    /// Positions in `Transcript::tokens`.
    pub tokens: Range<usize>,
    /// Positions in the video's frame list.
    pub frames: Range<usize>,
}

/// Integer apportionment of `total` by the largest-remainder method. Ties in
/// the fractional part go to the earlier entry.
pub fn largest_remainder(weights: &[u64], total: usize) -> Vec<usize> {
    let sum: u64 = weights.iter().sum();
    if weights.is_empty() {
        return Vec::new();
    }
    if sum == 0 {
        return largest_remainder(&vec![1; weights.len()], total);
    }
    // exact integer arithmetic: quota_u = total * w_u / sum
    let mut counts: Vec<usize> = Vec::with_capacity(weights.len());
    let mut remainders: Vec<(u128, usize)> = Vec::with_capacity(weights.len());
    for (u, &w) in weights.iter().enumerate() {
        let scaled = total as u128 * w as u128;
        counts.push((scaled / sum as u128) as usize);
        remainders.push((scaled % sum as u128, u));
    }
    let leftover = total - counts.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, u) in remainders.iter().take(leftover) {
        counts[u] += 1;
    }
    counts
}

pub fn allocate_frames(transcript: &Transcript, n_frames: usize, unit: WordLengthUnit) -> Result<Vec<UtteranceSlice>, FusionError> {
    if transcript.utterance_count == 0 || transcript.tokens.is_empty() {
        return Err(FusionError::EmptyTranscript);
    }
    let mut weights = vec![0u64; transcript.utterance_count];
    for token in &transcript.tokens {
        weights[token.utterance_index] += match unit {
            WordLengthUnit::Tokens => 1,
            WordLengthUnit::Characters => token.text.chars().count() as u64,
        };
    }
    let counts = largest_remainder(&weights, n_frames);

    let mut slices = Vec::with_capacity(counts.len());
    let (mut frame, mut token) = (0, 0);
    for (u, &count) in counts.iter().enumerate() {
        let token_end = token + transcript.utterance(u).len();
        slices.push(UtteranceSlice { utterance_index: u, tokens: token..token_end, frames: frame..frame + count });
        token = token_end;
        frame += count;
    }
    Ok(slices)
}
