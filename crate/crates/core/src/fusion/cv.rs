use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Label;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CVConfig {
    pub n_folds: usize,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for CVConfig {
    fn default() -> Self {
        CVConfig { n_folds: 10, stratified: true, seed: 0 }
    }
}

/// Fold index of every record. Each class is shuffled with `seed` and dealt
/// round-robin, continuing where the previous class stopped, so per-fold class
/// counts differ by at most one and fold sizes by at most one.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for class in Label::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[i] = next % k;
            next += 1;
        }
    }
    folds
}

pub fn assign_folds(labels: &[Label], cfg: &CVConfig) -> Vec<usize> {
    if cfg.stratified {
        return stratified_folds(labels, cfg.n_folds, cfg.seed);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(&mut rng);
    let mut folds = vec![0; labels.len()];
    for (rank, i) in order.into_iter().enumerate() {
        folds[i] = rank % cfg.n_folds;
    }
    folds
}
