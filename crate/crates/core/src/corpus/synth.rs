//! Seeded synthetic corpus with planted, label-correlated signal.
//!
//! Records are generated in truthful/deceptive pairs that share every random
//! draw; only the label-dependent shifts differ. At zero signal strength the two
//! members of a pair are therefore identical in all three modalities. Each pair
//! may additionally be marked "hard" for one modality, in which case that
//! modality carries only a weak signal for the pair, so single-modality
//! classifiers err on different clips and fusion has something to recover.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::acoustic::slot;
use crate::visual::AUMapping;

use super::manifest::format_acoustic;
use super::openface::{write_openface_csv, PRESENCE_INTENSITY};
use super::{
    au_index, parse_transcript_str, AUFrame, Corpus, CorpusError, Label, VideoRecord, ACOUSTIC_DIM, AU_COUNT,
    FILLERS, PAUSE_TOKEN,
};

/// Action units whose activation rate rises for deceptive clips.
pub const SIGNAL_AUS: [u8; 6] = [1, 4, 7, 14, 23, 45];

/// Signal left in a hard pair's weak modality, relative to the corpus strength.
const HARD_SCALE: f64 = 0.3;

/// Words that become more frequent in deceptive transcripts.
const HEDGES: [&str; 8] = ["really", "honest", "never", "sure", "nothing", "true", "afraid", "scared"];

const WORDS: [&str; 72] = [
    "i", "was", "the", "not", "he", "to", "and", "it", "did", "she", "that", "they", "a", "at", "home", "know",
    "never", "we", "there", "you", "just", "said", "my", "went", "in", "then", "house", "car", "night", "saw",
    "told", "with", "me", "remember", "him", "her", "police", "money", "sure", "door", "good", "time", "called",
    "left", "back", "afraid", "officer", "honest", "took", "scared", "came", "phone", "really", "around", "gun",
    "morning", "store", "friend", "wrong", "nothing", "true", "dark", "anything", "brother", "angry", "sofa",
    "men", "upset", "clear", "knife", "mother", "quiet",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_videos: usize,
    pub signal_strength: f64,
    /// Emit 16-bit mono WAV files instead of precomputed acoustic vectors.
    pub with_audio: bool,
    pub fps: f64,
    pub audio_sample_rate: u32,
    /// Fraction of pairs made hard for each modality.
    pub hard_fraction: f64,
}

impl SynthConfig {
    pub fn new(seed: u64, n_videos: usize, signal_strength: f64) -> Self {
        SynthConfig {
            seed,
            n_videos,
            signal_strength,
            with_audio: false,
            fps: 30.0,
            audio_sample_rate: 8000,
            hard_fraction: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Strengths {
    visual: f64,
    lexical: f64,
    acoustic: f64,
    /// Modality ([visual, lexical, acoustic]) drawn from a private stream
    /// instead of the one shared with the pair partner.
    decoupled: [bool; 3],
}

struct Rendered {
    record: VideoRecord,
    transcript_text: String,
    annotation_text: String,
    audio: Option<Vec<i16>>,
}

/// Writes the corpus under `out_dir` and returns it as loaded from disk would be.
pub fn generate_synthetic_corpus(cfg: &SynthConfig, out_dir: &Path) -> Result<Corpus, CorpusError> {
    if cfg.n_videos == 0 || !cfg.n_videos.is_multiple_of(2) {
        return Err(CorpusError::InvalidVideoCount(cfg.n_videos));
    }
    if !(0.0..=1.0).contains(&cfg.signal_strength) {
        return Err(CorpusError::InvalidStrength(cfg.signal_strength));
    }

    let n_pairs = cfg.n_videos / 2;
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pair_seeds: Vec<u64> = (0..n_pairs).map(|_| master.next_u64()).collect();

    let hard_per_modality = (cfg.hard_fraction * n_pairs as f64).round() as usize;
    let mut order: Vec<usize> = (0..n_pairs).collect();
    order.shuffle(&mut master);
    let mut hard = vec![None; n_pairs];
    for (rank, &pair) in order.iter().enumerate().take((3 * hard_per_modality).min(n_pairs)) {
        hard[pair] = Some(rank / hard_per_modality.max(1));
    }

    let dirs = ["transcripts", "openface", "acoustic", "audio", "annotations"];
    for d in dirs {
        if d == "audio" && !cfg.with_audio || d == "acoustic" && cfg.with_audio {
            continue;
        }
        let p = out_dir.join(d);
        fs::create_dir_all(&p).map_err(|e| CorpusError::io(&p, e))?;
    }

    let mut manifest = String::from("# id\tlabel\ttranscript\tau_csv\tacoustic\tannotation\n");
    let mut records = Vec::with_capacity(cfg.n_videos);
    for (pair, &pair_seed) in pair_seeds.iter().enumerate() {
        for label in Label::ALL {
            let s = cfg.signal_strength;
            // A hard pair's deceptive member gets fresh noise for the weak
            // modality; a near copy of its truthful partner would be
            // memorized whenever the two land in different folds.
            let decouple = |m: usize| hard[pair] == Some(m) && s > 0.0 && label == Label::Deceptive;
            let strengths = Strengths {
                visual: if hard[pair] == Some(0) { HARD_SCALE * s } else { s },
                lexical: if hard[pair] == Some(1) { HARD_SCALE * s } else { s },
                acoustic: if hard[pair] == Some(2) { HARD_SCALE * s } else { s },
                decoupled: [decouple(0), decouple(1), decouple(2)],
            };
            let id = format!("clip_{pair:03}_{}", label.as_str());
            let mut rng = ChaCha8Rng::seed_from_u64(pair_seed);
            let rendered = render_record(&id, label, strengths, cfg, out_dir, &mut rng);

            let rel_transcript = format!("transcripts/{id}.txt");
            let rel_au = format!("openface/{id}.csv");
            let rel_annotation = format!("annotations/{id}.gestures");
            let rel_acoustic = if cfg.with_audio { format!("audio/{id}.wav") } else { format!("acoustic/{id}.acoustic") };

            write(out_dir, &rel_transcript, rendered.transcript_text.as_bytes())?;
            write(out_dir, &rel_au, write_openface_csv(&rendered.record.au_frames).as_bytes())?;
            write(out_dir, &rel_annotation, rendered.annotation_text.as_bytes())?;
            match (&rendered.audio, &rendered.record.precomputed_acoustic) {
                (Some(samples), _) => write_wav(&out_dir.join(&rel_acoustic), samples, cfg.audio_sample_rate)?,
                (None, Some(values)) => {
                    write(out_dir, &rel_acoustic, format!("{}\n", format_acoustic(values)).as_bytes())?
                }
                (None, None) => unreachable!("record has neither audio nor acoustic vector"),
            }
            manifest.push_str(&format!(
                "{id}\t{label}\t{rel_transcript}\t{rel_au}\t{rel_acoustic}\t{rel_annotation}\n"
            ));
            records.push(rendered.record);
        }
    }
    write(out_dir, "manifest.tsv", manifest.as_bytes())?;
    Corpus::new(records)
}

fn write(out_dir: &Path, rel: &str, bytes: &[u8]) -> Result<(), CorpusError> {
    let path = out_dir.join(rel);
    fs::write(&path, bytes).map_err(|e| CorpusError::io(&path, e))
}

fn write_wav(path: &Path, samples: &[i16], sample_rate: u32) -> Result<(), CorpusError> {
    let spec = hound::WavSpec { channels: 1, sample_rate, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
    let io_err = |e: hound::Error| CorpusError::Io { path: path.to_path_buf(), source: std::io::Error::other(e) };
    let mut writer = hound::WavWriter::create(path, spec).map_err(io_err)?;
    for &s in samples {
        writer.write_sample(s).map_err(io_err)?;
    }
    writer.finalize().map_err(io_err)
}

fn round_to(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (value * scale).round() / scale
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn render_record(
    id: &str,
    label: Label,
    s: Strengths,
    cfg: &SynthConfig,
    out_dir: &Path,
    rng: &mut ChaCha8Rng,
) -> Rendered {
    let deceptive = if label == Label::Deceptive { 1.0 } else { 0.0 };
    let audio_seed = rng.next_u64();
    let private_seed = rng.next_u64();
    let duration_s = 8.0 + 6.0 * rng.random::<f64>();
    let private = |m: u64| ChaCha8Rng::seed_from_u64(private_seed ^ m);

    let mut transcript_text = render_transcript(deceptive * s.lexical, rng);
    if s.decoupled[1] {
        transcript_text = render_transcript(deceptive * s.lexical, &mut private(1));
    }
    let (mut au_frames, mut rates) = render_frames(duration_s, deceptive * s.visual, cfg.fps, rng);
    if s.decoupled[0] {
        (au_frames, rates) = render_frames(duration_s, deceptive * s.visual, cfg.fps, &mut private(0));
    }
    let annotation = render_annotation(&rates, rng);
    let mut acoustic = render_acoustic(deceptive * s.acoustic, rng);
    if s.decoupled[2] {
        acoustic = render_acoustic(deceptive * s.acoustic, &mut private(2));
    }

    let audio = cfg.with_audio.then(|| {
        let mut audio_rng = ChaCha8Rng::seed_from_u64(audio_seed);
        synthesize_voice(duration_s, &acoustic, cfg.audio_sample_rate, &mut audio_rng)
    });
    let audio_path: Option<PathBuf> = cfg.with_audio.then(|| out_dir.join(format!("audio/{id}.wav")));

    let annotation_text: String = annotation.iter().map(|c| format!("{c}\n")).collect();
    let record = VideoRecord {
        id: id.to_string(),
        label,
        transcript: parse_transcript_str(&transcript_text).expect("generated transcript is never empty"),
        au_frames,
        audio_path,
        precomputed_acoustic: (!cfg.with_audio).then_some(acoustic),
        manual_annotation: Some(annotation),
    };
    Rendered { record, transcript_text, annotation_text, audio }
}

fn render_transcript(shift: f64, rng: &mut ChaCha8Rng) -> String {
    let p_pause = 0.03 + 0.22 * shift;
    let p_filler = 0.04 + 0.08 * shift;
    let p_hedge = 0.35 * shift;
    // Zipf-like word choice so common words clear the vocabulary cutoff.
    let weights: Vec<f64> = (0..WORDS.len()).map(|r| 1.0 / (r as f64 + 3.0)).collect();
    let total: f64 = weights.iter().sum();

    let n_utterances = 4 + rng.random_range(0..3usize);
    let mut lines = Vec::with_capacity(n_utterances);
    for _ in 0..n_utterances {
        let len = 6 + rng.random_range(0..7usize);
        let question = rng.random::<f64>() < 0.2;
        let mut tokens: Vec<String> = Vec::with_capacity(len);
        for _ in 0..len {
            let u: f64 = rng.random();
            let filler = FILLERS[rng.random_range(0..FILLERS.len())];
            let hedge = HEDGES[rng.random_range(0..HEDGES.len())];
            let use_hedge = rng.random::<f64>() < p_hedge;
            let mut target = rng.random::<f64>() * total;
            let mut word = WORDS[WORDS.len() - 1];
            for (w, &weight) in WORDS.iter().zip(&weights) {
                if target < weight {
                    word = w;
                    break;
                }
                target -= weight;
            }
            tokens.push(if u < p_pause {
                PAUSE_TOKEN.to_string()
            } else if u < p_pause + p_filler {
                filler.to_string()
            } else if use_hedge {
                hedge.to_string()
            } else {
                word.to_string()
            });
        }
        if let Some(first) = tokens.first_mut() {
            if first != PAUSE_TOKEN {
                let mut chars = first.chars();
                if let Some(c) = chars.next() {
                    *first = c.to_uppercase().chain(chars).collect();
                }
            }
        }
        if let Some(last) = tokens.last_mut() {
            if last != PAUSE_TOKEN {
                last.push(if question { '?' } else { '.' });
            }
        }
        lines.push(tokens.join(" "));
    }
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

fn render_frames(duration_s: f64, shift: f64, fps: f64, rng: &mut ChaCha8Rng) -> (Vec<AUFrame>, [f64; AU_COUNT]) {
    let mut rates = [0.0; AU_COUNT];
    for (k, rate) in rates.iter_mut().enumerate() {
        let u: f64 = rng.random();
        let is_signal = SIGNAL_AUS.iter().any(|&au| au_index(au) == Some(k));
        *rate = if is_signal { 0.01 + 0.03 * u + 0.30 * shift } else { 0.25 * u };
    }
    let n_frames = (duration_s * fps).floor() as usize + 1;
    let au28 = au_index(28).expect("AU28 is canonical");
    let frames = (0..n_frames)
        .map(|i| {
            let success = rng.random::<f64>() < 0.97;
            let mut intensities = [0.0; AU_COUNT];
            for (k, value) in intensities.iter_mut().enumerate() {
                let active = rng.random::<f64>() < rates[k];
                let u: f64 = rng.random();
                let v = if k == au28 {
                    if active { PRESENCE_INTENSITY } else { 0.0 }
                } else if active {
                    round_to(3.0 + 2.0 * u, 3)
                } else {
                    round_to(2.8 * u, 3)
                };
                *value = if success { v } else { 0.0 };
            }
            AUFrame { frame_index: i as u64, timestamp_s: round_to(i as f64 / fps, 3), intensities, success }
        })
        .collect();
    (frames, rates)
}

fn render_annotation(rates: &[f64; AU_COUNT], rng: &mut ChaCha8Rng) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (name, aus) in AUMapping::standard().entries() {
        let seen = aus.iter().any(|&au| au_index(au).is_some_and(|k| rates[k] >= 0.10));
        let flip = rng.random::<f64>() < 0.15;
        if seen != flip {
            out.insert(name.to_string());
        }
    }
    out
}

fn render_acoustic(shift: f64, rng: &mut ChaCha8Rng) -> [f64; ACOUSTIC_DIM] {
    let mut v = [0.0; ACOUSTIC_DIM];
    for (k, value) in v[slot::MFCC].iter_mut().enumerate() {
        *value = 6.0 / (k as f64 + 1.0) * normal(rng);
    }
    v[slot::F0_MEAN] = 110.0 + 90.0 * rng.random::<f64>();
    v[slot::F0_STD] = (14.0 + 3.0 * normal(rng)).abs() + 12.0 * shift;
    v[slot::F0_RANGE] = (60.0 + 10.0 * normal(rng)).abs() + 30.0 * shift;
    v[slot::F0_DELTA_MEAN] = (4.0 + 0.8 * normal(rng)).abs() + 2.4 * shift;
    v[slot::INTENSITY_MEAN] = 62.0 + 4.0 * normal(rng);
    v[slot::INTENSITY_STD] = (7.0 + normal(rng)).abs() + 3.0 * shift;
    v[slot::LOUDNESS_MEAN] = (0.4 + 0.05 * normal(rng)).abs();
    v[slot::LOUDNESS_STD] = (0.08 + 0.01 * normal(rng)).abs();
    v[slot::VOICING_MEAN] = (0.6 + 0.05 * normal(rng)).clamp(0.0, 1.0);
    v[slot::HNR_MEAN] = 12.0 + 2.0 * normal(rng) - 6.0 * shift;
    v[slot::JITTER_LOCAL] = (0.012 + 0.0015 * normal(rng)).abs() + 0.010 * shift;
    v[slot::JITTER_DDP] = (0.022 + 0.003 * normal(rng)).abs() + 0.018 * shift;
    v[slot::CENTROID_MEAN] = 1500.0 + 200.0 * normal(rng);
    v[slot::CENTROID_STD] = (400.0 + 50.0 * normal(rng)).abs();
    v[slot::FLUX_MEAN] = (0.5 + 0.1 * normal(rng)).abs();
    v[slot::FLUX_STD] = (0.2 + 0.03 * normal(rng)).abs();
    v.map(|x| round_to(x, 6))
}

/// Harmonic voice with per-cycle period jitter, alternating voiced runs and
/// silences. Pitch level, pitch spread and jitter follow the acoustic targets.
fn synthesize_voice(duration_s: f64, acoustic: &[f64; ACOUSTIC_DIM], sample_rate: u32, rng: &mut ChaCha8Rng) -> Vec<i16> {
    let sr = sample_rate as f64;
    let n = (duration_s * sr).round() as usize;
    let f0_base = acoustic[slot::F0_MEAN];
    let f0_spread = acoustic[slot::F0_STD];
    // E|dT| = 2σ/sqrt(pi) for independent period perturbations
    let period_sigma = acoustic[slot::JITTER_LOCAL] * std::f64::consts::PI.sqrt() / 2.0;
    let ramp = (0.01 * sr) as usize;

    let mut samples = vec![0.0f64; n];
    let mut pos = (0.05 * sr) as usize;
    while pos < n {
        let run = ((0.15 + 0.30 * rng.random::<f64>()) * sr) as usize;
        let gap = ((0.05 + 0.20 * rng.random::<f64>()) * sr) as usize;
        let f_run = (f0_base + f0_spread * normal(rng)).clamp(70.0, 380.0);
        let end = (pos + run).min(n);
        let mut phase = 0.0f64;
        let mut period = 1.0 / f_run;
        for (i, sample) in samples[pos..end].iter_mut().enumerate() {
            let edge = i.min(end - pos - 1 - i);
            let env = if edge < ramp { 0.5 - 0.5 * (std::f64::consts::PI * edge as f64 / ramp as f64).cos() } else { 1.0 };
            let voiced: f64 = (1..=5).map(|h| 0.7f64.powi(h) * (h as f64 * phase).sin()).sum();
            *sample = 0.3 * env * voiced;
            phase += std::f64::consts::TAU / (period * sr);
            if phase >= std::f64::consts::TAU {
                phase -= std::f64::consts::TAU;
                period = (1.0 + period_sigma * normal(rng)) / f_run;
            }
        }
        pos = end + gap;
    }
    samples
        .iter()
        .map(|&x| ((x + 0.004 * normal(rng)).clamp(-1.0, 1.0) * 32767.0).round() as i16)
        .collect()
}
