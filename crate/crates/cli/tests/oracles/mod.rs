//! Independent reference computations used by the acceptance checks.

#![allow(dead_code)]

use veracity_core::corpus::{AUFrame, AU_COUNT};

/// Signed labels as +1 / -1.
pub type Signs = Vec<f64>;

pub struct ReferenceSolution {
    pub alphas: Vec<f64>,
    pub dual_objective: f64,
    /// Primal minus dual at the returned point; an upper bound on the error.
    pub certified_gap: f64,
    pub iterations: usize,
}

fn gram(x: &[Vec<f64>], y: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum::<f64>()).collect())
        .collect()
}

pub fn dual_objective(x: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let w = weights(x, y, alpha);
    alpha.iter().sum::<f64>() - 0.5 * w.iter().map(|v| v * v).sum::<f64>()
}

pub fn weights(x: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; x[0].len()];
    for ((xi, yi), ai) in x.iter().zip(y).zip(alpha) {
        for (wk, xk) in w.iter_mut().zip(xi) {
            *wk += ai * yi * xk;
        }
    }
    w
}

/// Primal objective at `w` with the bias chosen exactly: the hinge sum is
/// piecewise linear in b, so its minimum sits on a breakpoint.
pub fn primal_at_best_bias(x: &[Vec<f64>], y: &[f64], w: &[f64], c: f64) -> f64 {
    let scores: Vec<f64> = x.iter().map(|xi| xi.iter().zip(w).map(|(a, b)| a * b).sum()).collect();
    let hinge = |b: f64| -> f64 { scores.iter().zip(y).map(|(s, yi)| (1.0 - yi * (s + b)).max(0.0)).sum() };
    let best = scores.iter().zip(y).map(|(s, yi)| hinge(yi - s)).fold(f64::INFINITY, f64::min);
    0.5 * w.iter().map(|v| v * v).sum::<f64>() + c * best
}

/// Euclidean projection onto `{0 <= a <= C, y.a = 0}` by bisection on the multiplier.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - lambda * yi).clamp(0.0, c)).collect() };
    let balance = |a: &[f64]| -> f64 { a.iter().zip(y).map(|(ai, yi)| ai * yi).sum() };
    let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if balance(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// Given a guess of which multipliers sit at 0, at C, or strictly between,
/// solves the stationarity system for the free ones and the bias exactly and
/// keeps the result only when every KKT condition holds.
fn polish(q: &[Vec<f64>], y: &[f64], c: f64, guess: &[f64]) -> Option<Vec<f64>> {
    let n = y.len();
    let edge = 1e-7 * c;
    let free: Vec<usize> = (0..n).filter(|&i| guess[i] > edge && guess[i] < c - edge).collect();
    let mut alpha: Vec<f64> = guess.iter().map(|&a| if a >= c - edge { c } else { 0.0 }).collect();
    let mut bias = None;
    if !free.is_empty() {
        let m = free.len();
        let mut a = vec![vec![0.0; m + 1]; m + 1];
        let mut rhs = vec![0.0; m + 1];
        for (r, &i) in free.iter().enumerate() {
            for (k, &j) in free.iter().enumerate() {
                a[r][k] = q[i][j];
            }
            a[r][m] = y[i];
            a[m][r] = y[i];
            rhs[r] = 1.0 - (0..n).filter(|&j| alpha[j] == c).map(|j| q[i][j] * c).sum::<f64>();
        }
        rhs[m] = -(0..n).filter(|&j| alpha[j] == c).map(|j| y[j] * c).sum::<f64>();
        let x = solve_dense(a, rhs)?;
        for (k, &i) in free.iter().enumerate() {
            alpha[i] = x[k];
        }
        bias = Some(x[m]);
    }
    let balance: f64 = alpha.iter().zip(y).map(|(a, yi)| a * yi).sum();
    if alpha.iter().any(|&a| !(-1e-12..=c + 1e-12).contains(&a)) || balance.abs() > 1e-9 {
        return None;
    }
    // y_i f(x_i) - y_i b, i.e. the margin without the bias term
    let partial: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[i][j] * alpha[j]).sum()).collect();
    let feasible = |b: f64| {
        (0..n).all(|i| {
            let ym = partial[i] + y[i] * b;
            if alpha[i] == 0.0 {
                ym >= 1.0 - 1e-9
            } else if alpha[i] == c {
                ym <= 1.0 + 1e-9
            } else {
                (ym - 1.0).abs() <= 1e-9
            }
        })
    };
    let ok = match bias {
        Some(b) => feasible(b),
        // every multiplier at a bound: some bias in the admissible interval must work
        None => (0..n).map(|i| y[i] * (1.0 - partial[i])).any(feasible),
    };
    ok.then_some(alpha)
}

/// Accelerated projected gradient on the SVM dual with function-value
/// restarts, finished by an exact solve on the identified free set. Stops once
/// the certified gap drops below `target_gap`.
pub fn reference_svm(x: &[Vec<f64>], y: &[f64], c: f64, target_gap: f64, max_iter: usize) -> ReferenceSolution {
    let n = x.len();
    let q = gram(x, y);
    let lipschitz: f64 = (0..n).map(|i| q[i][i]).sum::<f64>().max(1e-12);
    let step = 1.0 / lipschitz;
    let minus_dual = |a: &[f64]| -dual_objective(x, y, a);
    let certify = |a: &[f64]| primal_at_best_bias(x, y, &weights(x, y, a), c) - dual_objective(x, y, a);

    let mut alpha = vec![0.0; n];
    let mut momentum = alpha.clone();
    let mut t = 1.0f64;
    let mut value = minus_dual(&alpha);
    let mut best = (alpha.clone(), certify(&alpha));
    let mut iterations = 0;
    while iterations < max_iter && best.1 >= target_gap {
        iterations += 1;
        if iterations % 25 == 0 {
            for candidate in [Some(alpha.clone()), polish(&q, y, c, &alpha)].into_iter().flatten() {
                let gap = certify(&candidate);
                if gap < best.1 {
                    best = (candidate, gap);
                }
            }
        }
        let grad: Vec<f64> = (0..n).map(|i| q[i].iter().zip(&momentum).map(|(a, b)| a * b).sum::<f64>() - 1.0).collect();
        let trial: Vec<f64> = momentum.iter().zip(&grad).map(|(m, g)| m - step * g).collect();
        let next = project(&trial, y, c);
        let next_value = minus_dual(&next);
        if next_value > value && t > 1.0 {
            t = 1.0;
            momentum = alpha.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        momentum = next.iter().zip(&alpha).map(|(a, p)| a + (t - 1.0) / t_next * (a - p)).collect();
        alpha = next;
        value = next_value;
        t = t_next;
    }
    let (alphas, certified_gap) = best;
    ReferenceSolution { dual_objective: dual_objective(x, y, &alphas), alphas, certified_gap, iterations }
}

/// Presence bits by direct counting over the frame matrix.
pub fn brute_force_presence(frames: &[AUFrame], threshold: f64, ratio: f64) -> ([bool; AU_COUNT], bool) {
    let mut bits = [false; AU_COUNT];
    let mut tracked = 0usize;
    for f in frames {
        if f.success {
            tracked += 1;
        }
    }
    if tracked == 0 {
        return (bits, true);
    }
    for (k, bit) in bits.iter_mut().enumerate() {
        let mut count = 0usize;
        for f in frames {
            if f.success && f.intensities[k] >= threshold {
                count += 1;
            }
        }
        *bit = count as f64 / tracked as f64 >= ratio;
    }
    (bits, false)
}
