//! Framing, magnitude spectra, mel filterbank and cepstral coefficients.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{AcousticError, AudioClip};

pub const PRE_EMPHASIS: f64 = 0.97;
pub const LOG_FLOOR: f64 = 1e-10;

/// Samples per frame and per hop for the given durations.
pub fn frame_geometry(sample_rate_hz: u32, frame_ms: f64, hop_ms: f64) -> (usize, usize) {
    let sr = sample_rate_hz as f64;
    let frame_len = ((sr * frame_ms / 1000.0).round() as usize).max(1);
    let hop = ((sr * hop_ms / 1000.0).round() as usize).max(1);
    (frame_len, hop)
}

/// Number of whole frames; the trailing partial frame is dropped.
pub fn frame_count(n_samples: usize, frame_len: usize, hop: usize) -> usize {
    if n_samples < frame_len {
        0
    } else {
        (n_samples - frame_len) / hop + 1
    }
}

pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len).map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos()).collect()
}

pub fn pre_emphasize(samples: &[f64], coefficient: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut prev = 0.0;
    for &x in samples {
        out.push(x - coefficient * prev);
        prev = x;
    }
    out
}

/// Pre-emphasized, Hamming-windowed analysis frames.
pub fn frame_signal(clip: &AudioClip, frame_ms: f64, hop_ms: f64) -> Result<Vec<Vec<f64>>, AcousticError> {
    let (frame_len, hop) = frame_geometry(clip.sample_rate_hz, frame_ms, hop_ms);
    let n = frame_count(clip.samples.len(), frame_len, hop);
    if n == 0 {
        return Err(AcousticError::ClipTooShort { samples: clip.samples.len(), needed: frame_len });
    }
    let emphasized = pre_emphasize(&clip.samples, PRE_EMPHASIS);
    let window = hamming(frame_len);
    Ok((0..n)
        .map(|t| {
            emphasized[t * hop..t * hop + frame_len]
                .iter()
                .zip(&window)
                .map(|(x, w)| x * w)
                .collect()
        })
        .collect())
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters spaced evenly on the mel scale from 0 Hz to Nyquist.
#[derive(Clone, Debug)]
pub struct MelFilterbank {
    /// `weights[m][k]` is the gain of filter `m` on FFT bin `k`.
    pub weights: Vec<Vec<f64>>,
    pub centers_hz: Vec<f64>,
    pub bin_hz: f64,
}

impl MelFilterbank {
    pub fn new(n_filters: usize, fft_size: usize, sample_rate_hz: u32) -> Self {
        let nyquist = sample_rate_hz as f64 / 2.0;
        let n_bins = fft_size / 2 + 1;
        let bin_hz = sample_rate_hz as f64 / fft_size as f64;
        let top = hz_to_mel(nyquist);
        let edges: Vec<f64> = (0..n_filters + 2)
            .map(|i| mel_to_hz(top * i as f64 / (n_filters + 1) as f64))
            .collect();
        let weights = (0..n_filters)
            .map(|m| {
                let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
                (0..n_bins)
                    .map(|k| {
                        let f = k as f64 * bin_hz;
                        if f > left && f <= center {
                            (f - left) / (center - left)
                        } else if f > center && f < right {
                            (right - f) / (right - center)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        MelFilterbank { weights, centers_hz: edges[1..=n_filters].to_vec(), bin_hz }
    }

    pub fn apply(&self, magnitude: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|row| row.iter().zip(magnitude).map(|(w, m)| w * m).sum())
            .collect()
    }
}

/// Orthonormal DCT-II basis, one row per output coefficient.
pub fn dct_matrix(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let scale = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            (0..n).map(|i| scale * (PI * k as f64 * (i as f64 + 0.5) / n as f64).cos()).collect()
        })
        .collect()
}

/// Reusable FFT plan, filterbank and DCT for one frame length and sample rate.
pub struct SpectralAnalyzer {
    fft: Arc<dyn Fft<f64>>,
    fft_size: usize,
    pub filterbank: MelFilterbank,
    dct: Vec<Vec<f64>>,
    n_coeffs: usize,
}

impl SpectralAnalyzer {
    pub fn new(frame_len: usize, sample_rate_hz: u32, n_filters: usize, n_coeffs: usize) -> Self {
        assert!(n_coeffs < n_filters, "cepstral coefficients 1..={n_coeffs} need more than {n_filters} filters");
        let fft_size = frame_len.next_power_of_two();
        let fft = FftPlanner::new().plan_fft_forward(fft_size);
        SpectralAnalyzer {
            fft,
            fft_size,
            filterbank: MelFilterbank::new(n_filters, fft_size, sample_rate_hz),
            dct: dct_matrix(n_filters),
            n_coeffs,
        }
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    /// Magnitudes of bins `0..=fft_size/2` of the zero-padded frame.
    pub fn magnitude_spectrum(&self, frame: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = frame.iter().map(|&x| Complex::new(x, 0.0)).collect();
        buf.resize(self.fft_size, Complex::new(0.0, 0.0));
        self.fft.process(&mut buf);
        buf[..self.fft_size / 2 + 1].iter().map(|c| c.norm()).collect()
    }

    /// Cepstral coefficients 1..=n_coeffs from a magnitude spectrum.
    pub fn mfcc_from_magnitude(&self, magnitude: &[f64]) -> Vec<f64> {
        let log_energies: Vec<f64> = self
            .filterbank
            .apply(magnitude)
            .into_iter()
            .map(|e| e.max(LOG_FLOOR).ln())
            .collect();
        self.dct[1..=self.n_coeffs]
            .iter()
            .map(|row| row.iter().zip(&log_energies).map(|(b, e)| b * e).sum())
            .collect()
    }
}

pub fn compute_mfcc(frame: &[f64], sample_rate_hz: u32, n_filters: usize, n_coeffs: usize) -> Vec<f64> {
    let analyzer = SpectralAnalyzer::new(frame.len(), sample_rate_hz, n_filters, n_coeffs);
    analyzer.mfcc_from_magnitude(&analyzer.magnitude_spectrum(frame))
}

pub fn spectral_centroid(magnitude: &[f64], bin_hz: f64) -> f64 {
    let total: f64 = magnitude.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    magnitude.iter().enumerate().map(|(k, m)| k as f64 * bin_hz * m).sum::<f64>() / total
}

/// Euclidean distance between consecutive magnitude spectra.
pub fn spectral_flux(previous: &[f64], current: &[f64]) -> f64 {
    previous
        .iter()
        .zip(current)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt()
}
