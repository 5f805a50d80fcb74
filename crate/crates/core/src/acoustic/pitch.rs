//! Autocorrelation pitch tracking, jitter and harmonics-to-noise ratio.

/// Peaks below this normalized correlation are treated as unvoiced.
pub const VOICING_THRESHOLD: f64 = 0.45;

/// Peaks within this distance of the best one count as ties; the shortest lag wins.
const OCTAVE_TOLERANCE: f64 = 0.02;

fn centered(frame: &[f64]) -> Vec<f64> {
    let mean = frame.iter().sum::<f64>() / frame.len().max(1) as f64;
    frame.iter().map(|x| x - mean).collect()
}

/// Normalized cross-correlation of the frame with itself shifted by `lag`.
fn nccf(x: &[f64], lag: usize) -> f64 {
    if lag >= x.len() {
        return 0.0;
    }
    let head = &x[..x.len() - lag];
    let tail = &x[lag..];
    let cross: f64 = head.iter().zip(tail).map(|(a, b)| a * b).sum();
    let e0: f64 = head.iter().map(|a| a * a).sum();
    let e1: f64 = tail.iter().map(|b| b * b).sum();
    let denom = (e0 * e1).sqrt();
    if denom > 0.0 {
        cross / denom
    } else {
        0.0
    }
}

/// Longest lag searched for `fmin`, limited so every lag keeps half the frame.
pub fn max_lag(sample_rate_hz: u32, fmin_hz: f64) -> usize {
    (sample_rate_hz as f64 / fmin_hz).ceil() as usize
}

/// Returns `(f0_hz, voicing_prob)`; f0 is 0 for unvoiced frames.
pub fn estimate_f0(frame: &[f64], sample_rate_hz: u32, fmin_hz: f64, fmax_hz: f64) -> (f64, f64) {
    let sr = sample_rate_hz as f64;
    let x = centered(frame);
    if x.iter().all(|&v| v == 0.0) {
        return (0.0, 0.0);
    }
    let lag_min = ((sr / fmax_hz).floor() as usize).max(2);
    let lag_max = max_lag(sample_rate_hz, fmin_hz).min(x.len() / 2);
    if lag_max <= lag_min {
        return (0.0, 0.0);
    }

    // r[i] holds the correlation at lag lag_min - 1 + i
    let r: Vec<f64> = (lag_min - 1..=lag_max + 1).map(|lag| nccf(&x, lag)).collect();
    let peaks: Vec<usize> = (1..r.len() - 1).filter(|&i| r[i] >= r[i - 1] && r[i] >= r[i + 1]).collect();
    let Some(best) = peaks.iter().map(|&i| r[i]).max_by(f64::total_cmp) else {
        let top = r[1..r.len() - 1].iter().copied().fold(0.0, f64::max);
        return (0.0, top.clamp(0.0, 1.0));
    };
    let chosen = peaks
        .iter()
        .copied()
        .find(|&i| r[i] >= best - OCTAVE_TOLERANCE)
        .expect("the best peak satisfies its own tolerance");

    let voicing = r[chosen].clamp(0.0, 1.0);
    if voicing < VOICING_THRESHOLD {
        return (0.0, voicing);
    }
    let (a, b, c) = (r[chosen - 1], r[chosen], r[chosen + 1]);
    let curvature = a - 2.0 * b + c;
    let offset = if curvature < 0.0 { (0.5 * (a - c) / curvature).clamp(-0.5, 0.5) } else { 0.0 };
    let lag = (lag_min - 1 + chosen) as f64 + offset;
    (sr / lag, voicing)
}

/// Relative period perturbation `(local, ddp)` over a voiced f0 series.
pub fn compute_jitter(f0_series: &[f64]) -> (f64, f64) {
    if f0_series.len() < 3 {
        return (0.0, 0.0);
    }
    let periods: Vec<f64> = f0_series.iter().map(|f| 1.0 / f).collect();
    let mean_period = periods.iter().sum::<f64>() / periods.len() as f64;
    let diffs: Vec<f64> = periods.windows(2).map(|w| w[1] - w[0]).collect();
    let local = diffs.iter().map(|d| d.abs()).sum::<f64>() / diffs.len() as f64;
    let ddp = diffs.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (diffs.len() - 1) as f64;
    (local / mean_period, ddp / mean_period)
}

/// Harmonics-to-noise ratio in dB from the correlation at the pitch period.
pub fn compute_hnr(frame: &[f64], sample_rate_hz: u32, f0_hz: f64) -> f64 {
    if f0_hz <= 0.0 {
        return 0.0;
    }
    let x = centered(frame);
    let period = sample_rate_hz as f64 / f0_hz;
    let r = [period.floor(), period.ceil()]
        .into_iter()
        .filter(|&lag| lag >= 1.0)
        .map(|lag| nccf(&x, lag as usize))
        .fold(f64::NEG_INFINITY, f64::max)
        .clamp(1e-6, 1.0 - 1e-6);
    10.0 * (r / (1.0 - r)).log10()
}
