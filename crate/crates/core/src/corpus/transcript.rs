use std::path::Path;

use super::{CorpusError, TokenKind, Transcript, TranscriptToken};

/// Text of the intentional-silence marker.
pub const PAUSE_TOKEN: &str = "...";

/// Hesitation vocalizations transcribed verbatim.
pub const FILLERS: [&str; 3] = ["um", "ah", "uh"];

pub fn parse_transcript(path: &Path) -> Result<Transcript, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_transcript_str(&text).ok_or_else(|| CorpusError::EmptyTranscript(path.to_path_buf()))
}

/// Parses transcript text; `None` when it holds no tokens.
///
/// Tokens are whitespace separated. A bare `...` is a pause. Utterances end at
/// a newline or after a token carrying `.`, `?` or `!` as trailing punctuation.
pub fn parse_transcript_str(text: &str) -> Option<Transcript> {
    let mut tokens = Vec::new();
    let mut utterance = 0usize;
    let mut pending_break = false;

    for line in text.lines() {
        for raw in line.split_whitespace() {
            let (kind, text, ends_utterance) = classify(raw);
            if pending_break && !tokens.is_empty() {
                utterance += 1;
            }
            pending_break = false;
            tokens.push(TranscriptToken { kind, text, utterance_index: utterance });
            if ends_utterance {
                pending_break = true;
            }
        }
        pending_break = true;
    }

    if tokens.is_empty() {
        return None;
    }
    Some(Transcript { tokens, utterance_count: utterance + 1 })
}

fn classify(raw: &str) -> (TokenKind, String, bool) {
    if raw == PAUSE_TOKEN || raw == "\u{2026}" {
        return (TokenKind::Pause, PAUSE_TOKEN.to_string(), false);
    }
    let lower = raw.to_lowercase();
    let keep = |c: char| c.is_alphanumeric() || c == '\'';
    let core_end = lower.rfind(keep).map(|i| i + lower[i..].chars().next().map_or(1, char::len_utf8));
    let core_start = lower.find(keep);
    let (text, trailing) = match (core_start, core_end) {
        (Some(start), Some(end)) => (lower[start..end].to_string(), &lower[end..]),
        _ => (lower.clone(), lower.as_str()),
    };
    let ends = trailing.contains(['.', '?', '!']);
    let kind = if FILLERS.contains(&text.as_str()) { TokenKind::Filler } else { TokenKind::Word };
    (kind, text, ends)
}
