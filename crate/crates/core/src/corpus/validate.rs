use std::fmt;

use super::VideoRecord;

/// Mechanical exclusion rule for clips the face tracker could not use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationConfig {
    pub min_duration_s: f64,
    pub min_success_fraction: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig { min_duration_s: 3.0, min_success_fraction: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RejectReason {
    TooShort,
    SubjectNotTracked,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::TooShort => "TooShort",
            RejectReason::SubjectNotTracked => "SubjectNotTracked",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exclusion {
    pub id: String,
    pub reason: RejectReason,
}

pub fn validate_record(record: &VideoRecord, cfg: &ValidationConfig) -> Verdict {
    if record.au_frames.is_empty() || record.au_span_s() < cfg.min_duration_s {
        return Verdict::Reject(RejectReason::TooShort);
    }
    let tracked = record.au_frames.iter().filter(|f| f.success).count();
    if (tracked as f64) < cfg.min_success_fraction * record.au_frames.len() as f64 {
        return Verdict::Reject(RejectReason::SubjectNotTracked);
    }
    Verdict::Accept
}
