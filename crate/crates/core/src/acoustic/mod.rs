//! 28-value acoustic summary of a clip.
//!
//! Frame-level descriptors (pitch, voicing, energy, spectral shape, 12 MFCCs)
//! are computed on short overlapping frames and reduced to clip-level means,
//! spreads and perturbation measures. The slot layout is fixed; precomputed
//! vector files must follow it as well:
//!
//! | slots  | content                                              |
//! |--------|------------------------------------------------------|
//! | 0..12  | MFCC c1..c12 means                                   |
//! | 12..16 | f0 mean, f0 std, f0 range, mean abs f0 step (Hz)      |
//! | 16..20 | intensity mean/std (dB), loudness mean/std            |
//! | 20     | voicing probability mean                             |
//! | 21     | harmonics-to-noise ratio mean (dB)                    |
//! | 22, 23 | jitter local, jitter ddp                             |
//! | 24..28 | spectral centroid mean/std (Hz), spectral flux mean/std |

pub mod dsp;
pub mod pitch;
mod wav;

use std::path::PathBuf;

use thiserror::Error;

pub use dsp::{compute_mfcc, frame_signal};
pub use pitch::{compute_hnr, compute_jitter, estimate_f0};
pub use wav::read_wav;

use crate::corpus::ACOUSTIC_DIM;

pub const LAYOUT_VERSION: u32 = 1;

/// Named positions in the 28-value layout.
pub mod slot {
    use std::ops::Range;

    pub const MFCC: Range<usize> = 0..12;
    pub const F0_MEAN: usize = 12;
    pub const F0_STD: usize = 13;
    pub const F0_RANGE: usize = 14;
    pub const F0_DELTA_MEAN: usize = 15;
    pub const INTENSITY_MEAN: usize = 16;
    pub const INTENSITY_STD: usize = 17;
    pub const LOUDNESS_MEAN: usize = 18;
    pub const LOUDNESS_STD: usize = 19;
    pub const VOICING_MEAN: usize = 20;
    pub const HNR_MEAN: usize = 21;
    pub const JITTER_LOCAL: usize = 22;
    pub const JITTER_DDP: usize = 23;
    pub const CENTROID_MEAN: usize = 24;
    pub const CENTROID_STD: usize = 25;
    pub const FLUX_MEAN: usize = 26;
    pub const FLUX_STD: usize = 27;

    pub const SPREAD_SLOTS: [usize; 6] = [F0_STD, INTENSITY_STD, LOUDNESS_STD, CENTROID_STD, FLUX_STD, F0_RANGE];
}

/// Reference pressure for the intensity scale, so full-scale samples read as pascals.
const INTENSITY_REFERENCE: f64 = 2e-5;
const RMS_FLOOR: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum AcousticError {
    #[error("clip has {samples} samples, fewer than one {needed}-sample frame")]
    ClipTooShort { samples: usize, needed: usize },
    #[error("no frames to summarize")]
    EmptyInput,
    #[error("invalid clip: {0}")]
    InvalidClip(String),
    #[error("{}: {channels}-channel audio is not supported; convert to mono", path.display())]
    NotMono { path: PathBuf, channels: u16 },
    #[error("{}: {reason}", path.display())]
    Wav { path: PathBuf, reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self, AcousticError> {
        if samples.is_empty() {
            return Err(AcousticError::InvalidClip("no samples".into()));
        }
        if sample_rate_hz < 8000 {
            return Err(AcousticError::InvalidClip(format!("sample rate {sample_rate_hz} Hz is below 8000 Hz")));
        }
        Ok(AudioClip { samples, sample_rate_hz })
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Sub-clip between two times, clamped to the clip bounds. `None` if empty.
    pub fn slice_seconds(&self, start_s: f64, end_s: f64) -> Option<AudioClip> {
        let sr = self.sample_rate_hz as f64;
        let start = ((start_s.max(0.0) * sr).floor() as usize).min(self.samples.len());
        let end = ((end_s.max(0.0) * sr).ceil() as usize).min(self.samples.len());
        (end > start).then(|| AudioClip { samples: self.samples[start..end].to_vec(), sample_rate_hz: self.sample_rate_hz })
    }
}

/// Per-frame low-level descriptors.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameLLD {
    pub f0_hz: f64,
    pub voicing_prob: f64,
    pub rms: f64,
    pub rms_db: f64,
    pub hnr_db: f64,
    pub spectral_centroid_hz: f64,
    pub spectral_flux: f64,
    pub mfcc: [f64; 12],
}

impl FrameLLD {
    pub fn from_rms(rms: f64) -> Self {
        FrameLLD {
            f0_hz: 0.0,
            voicing_prob: 0.0,
            rms,
            rms_db: rms_to_db(rms),
            hnr_db: 0.0,
            spectral_centroid_hz: 0.0,
            spectral_flux: 0.0,
            mfcc: [0.0; 12],
        }
    }
}

pub fn rms_to_db(rms: f64) -> f64 {
    20.0 * (rms.max(RMS_FLOOR) / INTENSITY_REFERENCE).log10()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcousticVector(pub [f64; ACOUSTIC_DIM]);

impl AcousticVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AcousticConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub pitch_frame_ms: f64,
    pub n_filters: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
}

impl Default for AcousticConfig {
    fn default() -> Self {
        AcousticConfig { frame_ms: 25.0, hop_ms: 10.0, pitch_frame_ms: 40.0, n_filters: 26, fmin_hz: 60.0, fmax_hz: 400.0 }
    }
}

/// Frame-level descriptors for a whole clip.
pub fn frame_descriptors(clip: &AudioClip, cfg: &AcousticConfig) -> Result<Vec<FrameLLD>, AcousticError> {
    let windowed = frame_signal(clip, cfg.frame_ms, cfg.hop_ms)?;
    let (frame_len, hop) = dsp::frame_geometry(clip.sample_rate_hz, cfg.frame_ms, cfg.hop_ms);
    let (pitch_len, _) = dsp::frame_geometry(clip.sample_rate_hz, cfg.pitch_frame_ms, cfg.hop_ms);
    let min_pitch_len = 2 * pitch::max_lag(clip.sample_rate_hz, cfg.fmin_hz);
    let analyzer = dsp::SpectralAnalyzer::new(frame_len, clip.sample_rate_hz, cfg.n_filters, 12);

    let mut previous: Option<Vec<f64>> = None;
    let mut out = Vec::with_capacity(windowed.len());
    for (t, frame) in windowed.iter().enumerate() {
        let start = t * hop;
        let raw = &clip.samples[start..start + frame_len];
        let rms = (raw.iter().map(|x| x * x).sum::<f64>() / frame_len as f64).sqrt();

        let magnitude = analyzer.magnitude_spectrum(frame);
        let mut lld = FrameLLD::from_rms(rms);
        lld.spectral_centroid_hz = dsp::spectral_centroid(&magnitude, analyzer.filterbank.bin_hz);
        lld.spectral_flux = previous.as_deref().map_or(0.0, |p| dsp::spectral_flux(p, &magnitude));
        lld.mfcc.copy_from_slice(&analyzer.mfcc_from_magnitude(&magnitude));

        let pitch_frame = &clip.samples[start..(start + pitch_len).min(clip.samples.len())];
        if pitch_frame.len() >= min_pitch_len {
            let (f0, voicing) = estimate_f0(pitch_frame, clip.sample_rate_hz, cfg.fmin_hz, cfg.fmax_hz);
            lld.f0_hz = f0;
            lld.voicing_prob = voicing;
            lld.hnr_db = compute_hnr(pitch_frame, clip.sample_rate_hz, f0);
        }
        previous = Some(magnitude);
        out.push(lld);
    }
    Ok(out)
}

fn mean_std(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let values: Vec<f64> = values.into_iter().collect();
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn summarize(llds: &[FrameLLD]) -> Result<AcousticVector, AcousticError> {
    if llds.is_empty() {
        return Err(AcousticError::EmptyInput);
    }
    let mut v = [0.0; ACOUSTIC_DIM];
    for (k, value) in v[slot::MFCC].iter_mut().enumerate() {
        *value = mean_std(llds.iter().map(|l| l.mfcc[k])).0;
    }

    let voiced: Vec<&FrameLLD> = llds.iter().filter(|l| l.f0_hz > 0.0).collect();
    let f0: Vec<f64> = voiced.iter().map(|l| l.f0_hz).collect();
    (v[slot::F0_MEAN], v[slot::F0_STD]) = mean_std(f0.iter().copied());
    if let (Some(lo), Some(hi)) = (f0.iter().copied().reduce(f64::min), f0.iter().copied().reduce(f64::max)) {
        v[slot::F0_RANGE] = hi - lo;
    }
    v[slot::F0_DELTA_MEAN] = mean_std(f0.windows(2).map(|w| (w[1] - w[0]).abs())).0;

    (v[slot::INTENSITY_MEAN], v[slot::INTENSITY_STD]) = mean_std(llds.iter().map(|l| l.rms_db));
    (v[slot::LOUDNESS_MEAN], v[slot::LOUDNESS_STD]) = mean_std(llds.iter().map(|l| l.rms.max(0.0).powf(0.3)));
    v[slot::VOICING_MEAN] = mean_std(llds.iter().map(|l| l.voicing_prob)).0;
    v[slot::HNR_MEAN] = mean_std(voiced.iter().map(|l| l.hnr_db)).0;
    (v[slot::JITTER_LOCAL], v[slot::JITTER_DDP]) = compute_jitter(&f0);
    (v[slot::CENTROID_MEAN], v[slot::CENTROID_STD]) = mean_std(llds.iter().map(|l| l.spectral_centroid_hz));
    (v[slot::FLUX_MEAN], v[slot::FLUX_STD]) = mean_std(llds.iter().map(|l| l.spectral_flux));
    Ok(AcousticVector(v))
}

/// Full extraction path: frames, descriptors, summary.
pub fn extract_acoustic(clip: &AudioClip, cfg: &AcousticConfig) -> Result<AcousticVector, AcousticError> {
    summarize(&frame_descriptors(clip, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lld(rms_db: f64, f0: f64) -> FrameLLD {
        FrameLLD {
            f0_hz: f0,
            voicing_prob: if f0 > 0.0 { 0.9 } else { 0.1 },
            rms: 0.1,
            rms_db,
            hnr_db: if f0 > 0.0 { 15.0 } else { 0.0 },
            spectral_centroid_hz: 1200.0,
            spectral_flux: 0.3,
            mfcc: [1.5; 12],
        }
    }

    #[test]
    fn single_frame_summary() {
        let v = summarize(&[lld(55.0, 180.0)]).unwrap().0;
        for s in slot::SPREAD_SLOTS {
            assert_eq!(v[s], 0.0, "slot {s}");
        }
        assert_eq!(v[slot::F0_MEAN], 180.0);
        assert_eq!(v[slot::INTENSITY_MEAN], 55.0);
        assert_eq!(v[slot::CENTROID_MEAN], 1200.0);
        assert!(v[slot::MFCC].iter().all(|&c| c == 1.5));
    }

    #[test]
    fn intensity_uses_population_std() {
        let v = summarize(&[lld(50.0, 0.0), lld(60.0, 0.0)]).unwrap().0;
        assert_eq!(v[slot::INTENSITY_MEAN], 55.0);
        assert_eq!(v[slot::INTENSITY_STD], 5.0);
        assert_eq!(v[slot::F0_MEAN], 0.0);
        assert_eq!(v[slot::HNR_MEAN], 0.0);
    }

    #[test]
    fn f0_statistics_skip_unvoiced_frames() {
        let v = summarize(&[lld(60.0, 100.0), lld(60.0, 0.0), lld(60.0, 200.0)]).unwrap().0;
        assert_eq!(v[slot::F0_MEAN], 150.0);
        assert_eq!(v[slot::F0_STD], 50.0);
        assert_eq!(v[slot::F0_RANGE], 100.0);
        assert_eq!(v[slot::F0_DELTA_MEAN], 100.0);
    }

    #[test]
    fn empty_summary_is_an_error() {
        assert!(matches!(summarize(&[]), Err(AcousticError::EmptyInput)));
    }

    #[test]
    fn mean_and_std_slots_ignore_frame_order() {
        let frames: Vec<FrameLLD> = (0..9)
            .map(|i| {
                let mut l = lld(40.0 + i as f64 * 3.0, if i % 3 == 0 { 0.0 } else { 100.0 + 7.0 * i as f64 });
                l.mfcc[2] = i as f64;
                l.spectral_flux = 0.1 * i as f64;
                l
            })
            .collect();
        let mut reversed = frames.clone();
        reversed.reverse();
        reversed.swap(0, 4);
        let a = summarize(&frames).unwrap().0;
        let b = summarize(&reversed).unwrap().0;
        let order_free: Vec<usize> = slot::MFCC
            .chain([
                slot::F0_MEAN,
                slot::F0_STD,
                slot::F0_RANGE,
                slot::INTENSITY_MEAN,
                slot::INTENSITY_STD,
                slot::LOUDNESS_MEAN,
                slot::LOUDNESS_STD,
                slot::VOICING_MEAN,
                slot::HNR_MEAN,
                slot::CENTROID_MEAN,
                slot::CENTROID_STD,
                slot::FLUX_MEAN,
                slot::FLUX_STD,
            ])
            .collect();
        for s in order_free {
            assert!((a[s] - b[s]).abs() < 1e-9, "slot {s}: {} vs {}", a[s], b[s]);
        }
    }

    fn vowel(sr: u32, seconds: f64, f0: f64, gain: f64) -> AudioClip {
        let n = (seconds * sr as f64) as usize;
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / sr as f64;
                gain * (1..=4).map(|h| 0.6f64.powi(h) * (2.0 * PI * f0 * h as f64 * t).sin()).sum::<f64>()
            })
            .collect();
        AudioClip::new(samples, sr).unwrap()
    }

    #[test]
    fn steady_vowel_summary() {
        let clip = vowel(16000, 0.6, 150.0, 0.5);
        let v = extract_acoustic(&clip, &AcousticConfig::default()).unwrap().0;
        assert!(v.iter().all(|x| x.is_finite()));
        assert!((v[slot::F0_MEAN] - 150.0).abs() < 3.0, "{}", v[slot::F0_MEAN]);
        assert!(v[slot::VOICING_MEAN] > 0.9);
        assert!(v[slot::HNR_MEAN] > 20.0);
        assert!(v[slot::JITTER_LOCAL] < 1e-3);
        for s in slot::SPREAD_SLOTS {
            assert!(v[s] >= 0.0);
        }
    }

    #[test]
    fn gain_shifts_intensity_only() {
        let a = vowel(8000, 0.5, 200.0, 0.2);
        let scale = 3.0;
        let b = AudioClip::new(a.samples.iter().map(|x| x * scale).collect(), 8000).unwrap();
        let cfg = AcousticConfig::default();
        let la = frame_descriptors(&a, &cfg).unwrap();
        let lb = frame_descriptors(&b, &cfg).unwrap();
        for (x, y) in la.iter().zip(&lb) {
            assert!((x.f0_hz - y.f0_hz).abs() < 1e-9);
            assert!((x.voicing_prob - y.voicing_prob).abs() < 1e-9);
            assert!((y.rms_db - x.rms_db - 20.0 * scale.log10()).abs() < 1e-9);
            for (c, d) in x.mfcc.iter().zip(&y.mfcc) {
                assert!((c - d).abs() < 1e-9);
            }
        }
        let (va, vb) = (summarize(&la).unwrap().0, summarize(&lb).unwrap().0);
        assert!((va[slot::JITTER_LOCAL] - vb[slot::JITTER_LOCAL]).abs() < 1e-12);
    }

    #[test]
    fn slice_seconds_clamps() {
        let clip = AudioClip::new(vec![0.0; 8000], 8000).unwrap();
        assert_eq!(clip.slice_seconds(0.5, 2.0).unwrap().samples.len(), 4000);
        assert!(clip.slice_seconds(2.0, 3.0).is_none());
    }
}
