//! Weighted unigram features.
//!
//! The vocabulary is built from training transcripts only: words and the pause
//! marker are counted, articles, prepositions and fillers are dropped, and
//! terms below the frequency cutoff are removed. Each document is then mapped
//! to per-term counts multiplied by a part-of-speech weight (pronouns,
//! adjectives and pauses are up-weighted). An optional affect lexicon appends
//! the count-weighted mean affect vector of the document's words.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use thiserror::Error;

use crate::corpus::{TokenKind, Transcript, TranscriptToken, PAUSE_TOKEN};

pub const DEFAULT_MIN_FREQUENCY: usize = 5;

const ARTICLES: &str = include_str!("../data/articles.txt");
const PREPOSITIONS: &str = include_str!("../data/prepositions.txt");
const PRONOUNS: &str = include_str!("../data/pronouns.txt");
const ADJECTIVES: &str = include_str!("../data/adjectives.txt");

const ADJECTIVE_SUFFIXES: [&str; 6] = ["ful", "ous", "ive", "able", "less", "al"];

#[derive(Debug, Error)]
pub enum LexicalError {
    #[error("no term survives stoplist and frequency filtering")]
    EmptyVocabulary,
    #[error("affect lexicon line {line}: expected {expected} values, found {found}")]
    ArityMismatch { line: usize, expected: usize, found: usize },
    #[error("affect lexicon line {line}: {reason}")]
    MalformedAffect { line: usize, reason: String },
    #[error("affect lexicon is empty")]
    EmptyLexicon,
    #[error("cannot read {}: {source}", path.display())]
    Io { path: std::path::PathBuf, source: std::io::Error },
}

fn word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Closed-class word lists used for filtering and part-of-speech weighting.
#[derive(Clone, Debug, PartialEq)]
pub struct Lexicons {
    pub articles: HashSet<String>,
    pub prepositions: HashSet<String>,
    pub pronouns: HashSet<String>,
    pub adjectives: HashSet<String>,
}

impl Default for Lexicons {
    fn default() -> Self {
        Lexicons {
            articles: word_list(ARTICLES),
            prepositions: word_list(PREPOSITIONS),
            pronouns: word_list(PRONOUNS),
            adjectives: word_list(ADJECTIVES),
        }
    }
}

impl Lexicons {
    /// Reads a one-word-per-line list.
    pub fn read_list(path: &Path) -> Result<HashSet<String>, LexicalError> {
        std::fs::read_to_string(path)
            .map(|t| word_list(&t))
            .map_err(|source| LexicalError::Io { path: path.to_path_buf(), source })
    }

    pub fn is_stopword(&self, term: &str) -> bool {
        self.articles.contains(term) || self.prepositions.contains(term)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum POSClass {
    Pronoun,
    Adjective,
    Pause,
    Other,
}

pub fn pos_classify(term: &str, lexicons: &Lexicons) -> POSClass {
    if term == PAUSE_TOKEN {
        POSClass::Pause
    } else if lexicons.pronouns.contains(term) {
        POSClass::Pronoun
    } else if lexicons.adjectives.contains(term)
        || ADJECTIVE_SUFFIXES
            .iter()
            .any(|s| term.len() > s.len() + 2 && term.ends_with(s))
    {
        POSClass::Adjective
    } else {
        POSClass::Other
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PosWeights {
    pub pronoun: f64,
    pub adjective: f64,
    pub pause: f64,
    pub other: f64,
}

impl Default for PosWeights {
    fn default() -> Self {
        PosWeights { pronoun: 1.4, adjective: 1.2, pause: 1.6, other: 1.0 }
    }
}

impl PosWeights {
    pub fn weight(&self, class: POSClass) -> f64 {
        match class {
            POSClass::Pronoun => self.pronoun,
            POSClass::Adjective => self.adjective,
            POSClass::Pause => self.pause,
            POSClass::Other => self.other,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    frequency: Vec<usize>,
    classes: Vec<POSClass>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn corpus_frequency(&self, term: &str) -> Option<usize> {
        self.index_of(term).map(|i| self.frequency[i])
    }

    pub fn class(&self, i: usize) -> POSClass {
        self.classes[i]
    }
}

fn counted_term(token: &TranscriptToken) -> Option<&str> {
    match token.kind {
        TokenKind::Word | TokenKind::Pause => Some(&token.text),
        TokenKind::Filler => None,
    }
}

pub fn build_vocabulary<'a, I>(transcripts: I, min_frequency: usize, lexicons: &Lexicons) -> Result<Vocabulary, LexicalError>
where
    I: IntoIterator<Item = &'a Transcript>,
{
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for transcript in transcripts {
        for term in transcript.tokens.iter().filter_map(counted_term) {
            *counts.entry(term).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(term, n)| n >= min_frequency && (term == PAUSE_TOKEN || !lexicons.is_stopword(term)))
        .collect();
    if kept.is_empty() {
        return Err(LexicalError::EmptyVocabulary);
    }
    // BTreeMap order is alphabetical, and the sort is stable
    kept.sort_by_key(|&(_, n)| std::cmp::Reverse(n));

    let terms: Vec<String> = kept.iter().map(|(t, _)| t.to_string()).collect();
    Ok(Vocabulary {
        index: terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect(),
        frequency: kept.iter().map(|&(_, n)| n).collect(),
        classes: terms.iter().map(|t| pos_classify(t, lexicons)).collect(),
        terms,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LexicalVector(pub Vec<f64>);

/// Weighted term counts of a document (a whole transcript or any token slice).
pub fn vectorize(tokens: &[TranscriptToken], vocab: &Vocabulary, weights: &PosWeights) -> LexicalVector {
    let mut counts = vec![0usize; vocab.len()];
    for term in tokens.iter().filter_map(counted_term) {
        if let Some(i) = vocab.index_of(term) {
            counts[i] += 1;
        }
    }
    LexicalVector(
        counts
            .iter()
            .enumerate()
            .map(|(i, &n)| weights.weight(vocab.class(i)) * n as f64)
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffectLexicon {
    arity: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl AffectLexicon {
    pub fn new(entries: HashMap<String, Vec<f64>>) -> Result<Self, LexicalError> {
        let arity = entries.values().next().map(Vec::len).ok_or(LexicalError::EmptyLexicon)?;
        if let Some(bad) = entries.values().find(|v| v.len() != arity) {
            return Err(LexicalError::ArityMismatch { line: 0, expected: arity, found: bad.len() });
        }
        Ok(AffectLexicon { arity, entries })
    }

    /// Tab-separated rows: word, then `k` reals in [-1, 1].
    pub fn parse(text: &str) -> Result<Self, LexicalError> {
        let mut arity = None;
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cells = line.split('\t');
            let word = cells.next().unwrap_or_default().trim().to_lowercase();
            let values = cells
                .map(|c| {
                    let c = c.trim();
                    c.parse::<f64>()
                        .ok()
                        .filter(|v| (-1.0..=1.0).contains(v))
                        .ok_or_else(|| LexicalError::MalformedAffect { line: line_no, reason: format!("`{c}` is not a real in [-1, 1]") })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            if word.is_empty() || values.is_empty() {
                return Err(LexicalError::MalformedAffect { line: line_no, reason: "expected a word and at least one value".into() });
            }
            let expected = *arity.get_or_insert(values.len());
            if values.len() != expected {
                return Err(LexicalError::ArityMismatch { line: line_no, expected, found: values.len() });
            }
            entries.insert(word, values);
        }
        let arity = arity.ok_or(LexicalError::EmptyLexicon)?;
        Ok(AffectLexicon { arity, entries })
    }

    pub fn read(path: &Path) -> Result<Self, LexicalError> {
        let text = std::fs::read_to_string(path).map_err(|source| LexicalError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.entries.get(word).map(Vec::as_slice)
    }
}

/// Appends the mean affect vector over the document's words found in `lex`.
pub fn augment_with_affect(v: &LexicalVector, tokens: &[TranscriptToken], lex: &AffectLexicon) -> LexicalVector {
    let mut sum = vec![0.0; lex.arity()];
    let mut matched = 0usize;
    for token in tokens.iter().filter(|t| t.kind == TokenKind::Word) {
        if let Some(values) = lex.get(&token.text) {
            matched += 1;
            for (s, x) in sum.iter_mut().zip(values) {
                *s += x;
            }
        }
    }
    let mut out = v.0.clone();
    out.extend(sum.into_iter().map(|s| if matched == 0 { 0.0 } else { s / matched as f64 }));
    LexicalVector(out)
}
