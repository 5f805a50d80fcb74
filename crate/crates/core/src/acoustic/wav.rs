use std::path::Path;

use super::{AcousticError, AudioClip};

/// Reads a 16-bit PCM mono RIFF file into samples scaled to [-1, 1).
pub fn read_wav(path: &Path) -> Result<AudioClip, AcousticError> {
    let wav_err = |e: hound::Error| AcousticError::Wav { path: path.to_path_buf(), reason: e.to_string() };
    let mut reader = hound::WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(AcousticError::NotMono { path: path.to_path_buf(), channels: spec.channels });
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(AcousticError::Wav {
            path: path.to_path_buf(),
            reason: format!("expected 16-bit integer PCM, found {} bits {:?}", spec.bits_per_sample, spec.sample_format),
        });
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(wav_err)?;
    AudioClip::new(samples, spec.sample_rate)
}
