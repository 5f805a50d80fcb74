//! Cross-validated evaluation of single modalities and fusion strategies.
//!
//! Everything learned from data (vocabulary, standardizers, SVMs, calibration,
//! optional C and weight selection) is fitted inside each fold on that fold's
//! training records only.

use rayon::prelude::*;

use crate::corpus::{Corpus, Label};
use crate::lexical::{build_vocabulary, Vocabulary};
use crate::svm::{
    fit_platt, out_of_fold_margins, platt_probability, train_calibrated, train_svm, CalibratedModel, LinearSVMModel,
    PlattConfig, Standardizer, TrainConfig, CALIBRATION_FOLDS,
};

use super::cv::{assign_folds, stratified_folds, CVConfig};
use super::features::{prepare_corpus, FeatureConfig, RecordFeatures};
use super::report::{ReportRow, RowSource};
use super::{decision_fuse, majority_vote, FusionError, FusionStrategy, Method, Modality, ModalityStandardizers};

const C_CANDIDATES: [f64; 3] = [1.0, 0.1, 10.0];
const WEIGHT_STEP: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub cv: CVConfig,
    pub train: TrainConfig,
    pub features: FeatureConfig,
    /// Enabled flags for [visual, lexical, acoustic].
    pub modalities: [bool; 3],
    /// Pick C from {0.1, 1, 10} by inner cross-validation.
    pub c_grid: bool,
    /// Pick decision-fusion weights on the 0.1 simplex grid by inner cross-validation.
    pub weight_grid: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            cv: CVConfig::default(),
            train: TrainConfig::default(),
            features: FeatureConfig::default(),
            modalities: [true; 3],
            c_grid: false,
            weight_grid: false,
        }
    }
}

impl EvalConfig {
    fn enabled(&self) -> Vec<Modality> {
        Modality::ALL.into_iter().filter(|m| self.modalities[m.index()]).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowResult {
    pub method: Method,
    /// Held-out prediction for every record, in corpus order.
    pub predictions: Vec<Label>,
    pub labels: Vec<Label>,
    /// Fraction of held-out utterances labeled with their video's label.
    pub utterance_accuracy: Option<f64>,
}

impl RowResult {
    fn class_accuracy(&self, class: Option<Label>) -> f64 {
        let (mut hit, mut total) = (0usize, 0usize);
        for (p, l) in self.predictions.iter().zip(&self.labels) {
            if class.is_none_or(|c| c == *l) {
                total += 1;
                hit += usize::from(p == l);
            }
        }
        if total == 0 {
            0.0
        } else {
            hit as f64 / total as f64
        }
    }

    pub fn overall(&self) -> f64 {
        self.class_accuracy(None)
    }

    pub fn truthful_accuracy(&self) -> f64 {
        self.class_accuracy(Some(Label::Truthful))
    }

    pub fn deceptive_accuracy(&self) -> f64 {
        self.class_accuracy(Some(Label::Deceptive))
    }

    pub fn report_row(&self) -> ReportRow {
        ReportRow {
            name: self.method.name().to_string(),
            overall: self.overall(),
            truthful: Some(self.truthful_accuracy()),
            deceptive: Some(self.deceptive_accuracy()),
            source: RowSource::Computed,
        }
    }
}

/// Early-fusion pipeline fitted on a set of records.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldModels {
    pub vocabulary: Vocabulary,
    pub standardizers: ModalityStandardizers,
    pub model: CalibratedModel,
}

struct FoldOutput {
    test: Vec<usize>,
    predictions: Vec<Label>,
    utterances_correct: usize,
    utterances_total: usize,
}

pub struct Evaluator<'a> {
    corpus: &'a Corpus,
    features: Vec<RecordFeatures>,
    folds: Vec<usize>,
    cfg: EvalConfig,
}

impl<'a> Evaluator<'a> {
    pub fn new(corpus: &'a Corpus, cfg: EvalConfig) -> Result<Self, FusionError> {
        for class in Label::ALL {
            let found = corpus.count(class);
            if found < cfg.cv.n_folds {
                return Err(FusionError::TooFewRecords { class, found, needed: cfg.cv.n_folds });
            }
        }
        let features = prepare_corpus(corpus, &cfg.features, cfg.modalities[Modality::Acoustic.index()])?;
        let folds = assign_folds(&corpus.labels(), &cfg.cv);
        Ok(Evaluator { corpus, features, folds, cfg })
    }

    pub fn config(&self) -> &EvalConfig {
        &self.cfg
    }

    pub fn features(&self) -> &[RecordFeatures] {
        &self.features
    }

    /// Fold index of every record.
    pub fn folds(&self) -> &[usize] {
        &self.folds
    }

    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.folds.len()).partition(|&i| self.folds[i] != fold)
    }

    pub fn run(&self, method: Method) -> Result<RowResult, FusionError> {
        if let Method::Single(m) = method {
            if !self.cfg.modalities[m.index()] {
                return Err(FusionError::NoModality(m.as_str().into()));
            }
        } else if self.cfg.enabled().is_empty() {
            return Err(FusionError::NoModality(method.name().into()));
        }
        let outputs: Vec<FoldOutput> = (0..self.cfg.cv.n_folds)
            .into_par_iter()
            .map(|fold| self.run_fold(method, fold))
            .collect::<Result<_, _>>()?;

        let labels = self.corpus.labels();
        let mut predictions = labels.clone();
        let (mut correct, mut total) = (0, 0);
        for out in outputs {
            for (i, p) in out.test.into_iter().zip(out.predictions) {
                predictions[i] = p;
            }
            correct += out.utterances_correct;
            total += out.utterances_total;
        }
        let utterance_accuracy = matches!(method, Method::Fusion(FusionStrategy::UtteranceFusion)).then(|| correct as f64 / total.max(1) as f64);
        Ok(RowResult { method, predictions, labels, utterance_accuracy })
    }

    pub fn run_all(&self, methods: &[Method]) -> Result<Vec<RowResult>, FusionError> {
        methods.iter().map(|&m| self.run(m)).collect()
    }

    fn labels_of(&self, idx: &[usize]) -> Vec<Label> {
        idx.iter().map(|&i| self.corpus.records[i].label).collect()
    }

    pub fn vocabulary(&self, train: &[usize]) -> Result<Vocabulary, FusionError> {
        let transcripts = train.iter().map(|&i| &self.corpus.records[i].transcript);
        Ok(build_vocabulary(transcripts, self.cfg.features.min_frequency, &self.cfg.features.lexicons)?)
    }

    fn modality_row(&self, m: Modality, i: usize, vocab: &Vocabulary) -> Vec<f64> {
        let f = &self.features[i];
        match m {
            Modality::Visual => f.visual.as_f64(),
            Modality::Lexical => self.cfg.features.lexical(&self.corpus.records[i].transcript.tokens, vocab).0,
            Modality::Acoustic => f.acoustic.0.to_vec(),
        }
    }

    /// Per-utterance rows of one record for one modality.
    fn utterance_rows(&self, m: Modality, i: usize, vocab: &Vocabulary) -> Vec<Vec<f64>> {
        let record = &self.corpus.records[i];
        self.features[i]
            .utterances
            .iter()
            .map(|u| match m {
                Modality::Visual => u.visual.as_f64(),
                Modality::Lexical => self.cfg.features.lexical(&record.transcript.tokens[u.slice.tokens.clone()], vocab).0,
                Modality::Acoustic => u.acoustic.0.to_vec(),
            })
            .collect()
    }

    /// Standardizers for all three modalities fitted on `train`.
    pub fn standardizers(&self, train: &[usize], vocab: &Vocabulary) -> Result<ModalityStandardizers, FusionError> {
        let fit = |m| Standardizer::fit(&train.iter().map(|&i| self.modality_row(m, i, vocab)).collect::<Vec<_>>());
        Ok(ModalityStandardizers { visual: fit(Modality::Visual)?, lexical: fit(Modality::Lexical)?, acoustic: fit(Modality::Acoustic)? })
    }

    fn fit_svm(&self, x: &[Vec<f64>], y: &[Label], seed: u64) -> Result<LinearSVMModel, FusionError> {
        let cfg = TrainConfig { c_penalty: self.choose_c(x, y, seed)?, seed, ..self.cfg.train };
        Ok(train_svm(x, y, &cfg)?)
    }

    fn fit_calibrated(&self, x: &[Vec<f64>], y: &[Label], seed: u64) -> Result<CalibratedModel, FusionError> {
        let cfg = TrainConfig { c_penalty: self.choose_c(x, y, seed)?, seed, ..self.cfg.train };
        Ok(train_calibrated(x, y, &cfg)?)
    }

    /// Inner-CV accuracy over the C grid; the configured C when the grid is off
    /// or a class is too small to split.
    fn choose_c(&self, x: &[Vec<f64>], y: &[Label], seed: u64) -> Result<f64, FusionError> {
        const INNER: usize = 5;
        if !self.cfg.c_grid || Label::ALL.iter().any(|&c| y.iter().filter(|&&l| l == c).count() < INNER) {
            return Ok(self.cfg.train.c_penalty);
        }
        let folds = stratified_folds(y, INNER, seed ^ 0x5eed);
        let mut best = (self.cfg.train.c_penalty, -1.0);
        for c in C_CANDIDATES {
            let cfg = TrainConfig { c_penalty: c, seed, ..self.cfg.train };
            let mut hits = 0usize;
            for fold in 0..INNER {
                let (tr, te): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| folds[i] != fold);
                let model = train_svm(&pick(x, &tr), &pick(y, &tr), &cfg)?;
                for &i in &te {
                    hits += usize::from(model.predict_label(&x[i])? == y[i]);
                }
            }
            let acc = hits as f64 / y.len() as f64;
            if acc > best.1 {
                best = (c, acc);
            }
        }
        Ok(best.0)
    }

    /// Early-fusion pipeline fitted on the given records.
    pub fn fit_early_fusion(&self, train: &[usize], seed: u64) -> Result<FoldModels, FusionError> {
        let vocabulary = self.vocabulary(train)?;
        let standardizers = self.standardizers(train, &vocabulary)?;
        let x: Vec<Vec<f64>> = train.iter().map(|&i| self.fused_row(i, &vocabulary, &standardizers)).collect::<Result<_, _>>()?;
        let model = self.fit_calibrated(&x, &self.labels_of(train), seed)?;
        Ok(FoldModels { vocabulary, standardizers, model })
    }

    fn fused_row(&self, i: usize, vocab: &Vocabulary, s: &ModalityStandardizers) -> Result<Vec<f64>, FusionError> {
        let mut out = Vec::new();
        for m in self.cfg.enabled() {
            out.extend(standardizer_for(s, m).transform(&self.modality_row(m, i, vocab))?);
        }
        Ok(out)
    }

    fn run_fold(&self, method: Method, fold: usize) -> Result<FoldOutput, FusionError> {
        let (train, test) = self.split(fold);
        let seed = self.cfg.train.seed.wrapping_add(fold as u64);
        let y = self.labels_of(&train);
        let vocab = self.vocabulary(&train)?;
        let mut out = FoldOutput { test: test.clone(), predictions: Vec::with_capacity(test.len()), utterances_correct: 0, utterances_total: 0 };

        match method {
            Method::Single(m) => {
                let s = Standardizer::fit(&train.iter().map(|&i| self.modality_row(m, i, &vocab)).collect::<Vec<_>>())?;
                let x: Vec<Vec<f64>> = train.iter().map(|&i| s.transform(&self.modality_row(m, i, &vocab))).collect::<Result<_, _>>()?;
                let model = self.fit_svm(&x, &y, seed)?;
                for &i in &test {
                    out.predictions.push(model.predict_label(&s.transform(&self.modality_row(m, i, &vocab))?)?);
                }
            }
            Method::Fusion(FusionStrategy::EarlyFusion) => {
                let s = self.standardizers(&train, &vocab)?;
                let x: Vec<Vec<f64>> = train.iter().map(|&i| self.fused_row(i, &vocab, &s)).collect::<Result<_, _>>()?;
                let model = self.fit_svm(&x, &y, seed)?;
                for &i in &test {
                    out.predictions.push(model.predict_label(&self.fused_row(i, &vocab, &s)?)?);
                }
            }
            Method::Fusion(FusionStrategy::DecisionFusion { weights }) => {
                let enabled = self.cfg.enabled();
                let mut models = Vec::new();
                let mut train_rows = Vec::new();
                for &m in &enabled {
                    let s = Standardizer::fit(&train.iter().map(|&i| self.modality_row(m, i, &vocab)).collect::<Vec<_>>())?;
                    let x: Vec<Vec<f64>> = train.iter().map(|&i| s.transform(&self.modality_row(m, i, &vocab))).collect::<Result<_, _>>()?;
                    models.push((m, s, self.fit_calibrated(&x, &y, seed)?));
                    train_rows.push(x);
                }
                let weights: Vec<f64> = if self.cfg.weight_grid {
                    self.choose_weights(&train_rows, &y, seed)?
                } else {
                    enabled.iter().map(|m| weights[m.index()]).collect()
                };
                for &i in &test {
                    let probs: Vec<(f64, f64)> = models
                        .iter()
                        .map(|(m, s, model)| model.probabilities(&s.transform(&self.modality_row(*m, i, &vocab))?))
                        .collect::<Result<_, _>>()?;
                    out.predictions.push(decision_fuse(&probs, &weights)?);
                }
            }
            Method::Fusion(FusionStrategy::UtteranceFusion) => {
                let enabled = self.cfg.enabled();
                let per_record = |i: usize| -> Vec<Vec<Vec<f64>>> { enabled.iter().map(|&m| self.utterance_rows(m, i, &vocab)).collect() };
                let train_parts: Vec<Vec<Vec<Vec<f64>>>> = train.iter().map(|&i| per_record(i)).collect();
                let standardizers: Vec<Standardizer> = (0..enabled.len())
                    .map(|k| Standardizer::fit(&train_parts.iter().flat_map(|parts| parts[k].iter().cloned()).collect::<Vec<_>>()))
                    .collect::<Result<_, _>>()?;
                let join = |parts: &[Vec<Vec<f64>>]| -> Result<Vec<Vec<f64>>, FusionError> {
                    let n_utt = parts[0].len();
                    (0..n_utt)
                        .map(|u| {
                            let mut row = Vec::new();
                            for (k, s) in standardizers.iter().enumerate() {
                                row.extend(s.transform(&parts[k][u])?);
                            }
                            Ok(row)
                        })
                        .collect()
                };
                let (mut x, mut yu) = (Vec::new(), Vec::new());
                for (parts, &label) in train_parts.iter().zip(&y) {
                    let rows = join(parts)?;
                    yu.extend(std::iter::repeat_n(label, rows.len()));
                    x.extend(rows);
                }
                let model = self.fit_svm(&x, &yu, seed)?;
                for &i in &test {
                    let votes: Vec<Label> = join(&per_record(i))?.iter().map(|r| model.predict_label(r)).collect::<Result<_, _>>()?;
                    let truth = self.corpus.records[i].label;
                    out.utterances_correct += votes.iter().filter(|&&v| v == truth).count();
                    out.utterances_total += votes.len();
                    out.predictions.push(majority_vote(&votes));
                }
            }
        }
        Ok(out)
    }

    /// Best weights on the simplex grid, scored on out-of-fold calibrated
    /// probabilities of the training records. Uniform weights are kept unless
    /// a grid point is strictly better.
    fn choose_weights(&self, rows: &[Vec<Vec<f64>>], y: &[Label], seed: u64) -> Result<Vec<f64>, FusionError> {
        let k = rows.len();
        let uniform = vec![1.0 / k as f64; k];
        let cfg = TrainConfig { seed, ..self.cfg.train };
        let mut probs: Vec<Vec<(f64, f64)>> = Vec::with_capacity(k);
        for x in rows {
            let Some(margins) = out_of_fold_margins(x, y, &cfg, CALIBRATION_FOLDS)? else {
                return Ok(uniform);
            };
            let (a, b) = fit_platt(&margins, y, &PlattConfig::default())?;
            probs.push(margins.iter().map(|&m| platt_probability(m, a, b)).map(|p| (1.0 - p, p)).collect());
        }
        let score = |w: &[f64]| -> Result<usize, FusionError> {
            let mut hits = 0;
            for (i, label) in y.iter().enumerate() {
                let p: Vec<(f64, f64)> = probs.iter().map(|pm| pm[i]).collect();
                hits += usize::from(decision_fuse(&p, w)? == *label);
            }
            Ok(hits)
        };
        let mut best = (uniform.clone(), score(&uniform)?);
        for w in simplex_grid(k, WEIGHT_STEP) {
            let s = score(&w)?;
            if s > best.1 {
                best = (w, s);
            }
        }
        Ok(best.0)
    }
}

fn pick<T: Clone>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i].clone()).collect()
}

fn standardizer_for(s: &ModalityStandardizers, m: Modality) -> &Standardizer {
    match m {
        Modality::Visual => &s.visual,
        Modality::Lexical => &s.lexical,
        Modality::Acoustic => &s.acoustic,
    }
}

/// Non-negative weight vectors with entries on a `1/steps` grid summing to 1.
pub(crate) fn simplex_grid(k: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, steps: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if k == 1 {
            prefix.push(left);
            out.push(prefix.iter().map(|&c| c as f64 / steps as f64).collect());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(k - 1, left - c, steps, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(k, steps, steps, &mut Vec::new(), &mut out);
    }
    out
}
