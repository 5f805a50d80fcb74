//! Sigmoid fit of margins to probabilities (Newton's method with
//! backtracking on the smoothed-target log likelihood).

use super::SvmError;
use crate::corpus::Label;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlattConfig {
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for PlattConfig {
    fn default() -> Self {
        PlattConfig { max_iter: 100, tolerance: 1e-5 }
    }
}

/// `P(deceptive | margin) = 1 / (1 + exp(a * margin + b))`, evaluated without overflow.
pub fn platt_probability(margin: f64, a: f64, b: f64) -> f64 {
    let z = a * margin + b;
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

fn neg_log_likelihood(margins: &[f64], targets: &[f64], a: f64, b: f64) -> f64 {
    margins
        .iter()
        .zip(targets)
        .map(|(f, t)| {
            let z = f * a + b;
            if z >= 0.0 {
                t * z + (-z).exp().ln_1p()
            } else {
                (t - 1.0) * z + z.exp().ln_1p()
            }
        })
        .sum()
}

pub fn fit_platt(margins: &[f64], labels: &[Label], cfg: &PlattConfig) -> Result<(f64, f64), SvmError> {
    if margins.len() != labels.len() {
        return Err(SvmError::DimensionMismatch { expected: margins.len(), found: labels.len() });
    }
    let positives = labels.iter().filter(|&&l| l == Label::Deceptive).count() as f64;
    let negatives = labels.len() as f64 - positives;
    if positives == 0.0 || negatives == 0.0 {
        return Err(SvmError::SingleClassInput);
    }
    let hi = (positives + 1.0) / (positives + 2.0);
    let lo = 1.0 / (negatives + 2.0);
    let targets: Vec<f64> = labels.iter().map(|&l| if l == Label::Deceptive { hi } else { lo }).collect();

    const MIN_STEP: f64 = 1e-10;
    const RIDGE: f64 = 1e-12;
    let mut a = 0.0;
    let mut b = ((negatives + 1.0) / (positives + 1.0)).ln();
    let mut fval = neg_log_likelihood(margins, &targets, a, b);
    for _ in 0..cfg.max_iter {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (RIDGE, RIDGE, 0.0, 0.0, 0.0);
        for (f, t) in margins.iter().zip(&targets) {
            // p = P(target side) as a function of z = f a + b
            let z = f * a + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = t - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < cfg.tolerance && g2.abs() < cfg.tolerance {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let descent = g1 * da + g2 * db;
        let mut step = 1.0;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = neg_log_likelihood(margins, &targets, na, nb);
            if nf < fval + 1e-4 * step * descent {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if step < MIN_STEP {
            break;
        }
    }
    Ok((a, b))
}
