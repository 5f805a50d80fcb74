use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{
    parse_openface_csv, parse_transcript, validate_record, Corpus, CorpusError, Exclusion, Label, ValidationConfig,
    Verdict, VideoRecord, ACOUSTIC_DIM,
};

/// Records that passed validation plus the ones that were set aside.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub excluded: Vec<Exclusion>,
}

struct ManifestEntry {
    id: String,
    label: Label,
    transcript: PathBuf,
    au_csv: PathBuf,
    acoustic: PathBuf,
    annotation: Option<PathBuf>,
}

/// Loads a manifest with the default exclusion thresholds and drops rejected records.
pub fn load_manifest(path: &Path) -> Result<Corpus, CorpusError> {
    load_manifest_with(path, &ValidationConfig::default()).map(|loaded| loaded.corpus)
}

pub fn load_manifest_with(path: &Path, validation: &ValidationConfig) -> Result<LoadedCorpus, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let entries = parse_entries(&text, path, base)?;

    let parsed: Vec<Result<VideoRecord, CorpusError>> = entries.par_iter().map(load_entry).collect();
    let mut records = Vec::with_capacity(parsed.len());
    for record in parsed {
        records.push(record?);
    }

    let mut kept = Vec::with_capacity(records.len());
    let mut excluded = Vec::new();
    for record in records {
        match validate_record(&record, validation) {
            Verdict::Accept => kept.push(record),
            Verdict::Reject(reason) => excluded.push(Exclusion { id: record.id.clone(), reason }),
        }
    }
    Ok(LoadedCorpus { corpus: Corpus::new(kept)?, excluded })
}

fn parse_entries(text: &str, path: &Path, base: &Path) -> Result<Vec<ManifestEntry>, CorpusError> {
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let malformed = |reason: String| CorpusError::MalformedManifest { path: path.to_path_buf(), line: line_no, reason };
        let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
        if fields.len() != 5 && fields.len() != 6 {
            return Err(malformed(format!("expected 5 tab-separated fields, found {}", fields.len())));
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(malformed("empty field".into()));
        }
        let label: Label = fields[1].parse().map_err(malformed)?;
        let id = fields[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        entries.push(ManifestEntry {
            id,
            label,
            transcript: base.join(fields[2]),
            au_csv: base.join(fields[3]),
            acoustic: base.join(fields[4]),
            annotation: fields.get(5).map(|p| base.join(p)),
        });
    }
    Ok(entries)
}

fn load_entry(entry: &ManifestEntry) -> Result<VideoRecord, CorpusError> {
    let transcript = parse_transcript(&entry.transcript)?;
    let au_frames = parse_openface_csv(&entry.au_csv)?;
    let is_wav = entry
        .acoustic
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("wav"));
    let (audio_path, precomputed_acoustic) = if is_wav {
        if !entry.acoustic.exists() {
            return Err(CorpusError::MissingFile(entry.acoustic.clone()));
        }
        (Some(entry.acoustic.clone()), None)
    } else {
        (None, Some(parse_acoustic_file(&entry.acoustic)?))
    };
    let manual_annotation = entry.annotation.as_deref().map(parse_annotation_file).transpose()?;
    Ok(VideoRecord {
        id: entry.id.clone(),
        label: entry.label,
        transcript,
        au_frames,
        audio_path,
        precomputed_acoustic,
        manual_annotation,
    })
}

/// Reads a single line of 28 comma-separated reals.
pub fn parse_acoustic_file(path: &Path) -> Result<[f64; ACOUSTIC_DIM], CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    let bad = |reason: String| CorpusError::MalformedAcoustic { path: path.to_path_buf(), reason };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let line = lines.next().ok_or_else(|| bad("file is empty".into()))?;
    if lines.next().is_some() {
        return Err(bad("expected a single line".into()));
    }
    let values = line
        .split(',')
        .map(|cell| {
            let cell = cell.trim();
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("non-numeric value `{cell}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| bad(format!("expected {ACOUSTIC_DIM} values, found {}", v.len())))
}

/// One gesture-category name per line.
pub fn parse_annotation_file(path: &Path) -> Result<BTreeSet<String>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

pub(crate) fn format_acoustic(values: &[f64; ACOUSTIC_DIM]) -> String {
    let cells: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    cells.join(",")
}
