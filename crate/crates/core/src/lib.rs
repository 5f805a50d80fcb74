//! Multimodal deception classification from courtroom-style video records.
//!
//! Three feature families are extracted per video: a binary facial action unit
//! vector, weighted unigram counts, and a fixed-length acoustic summary. Each
//! feeds a linear SVM, and the modalities are combined by early (feature)
//! fusion, decision-level fusion of calibrated scores, or utterance-level
//! voting. Evaluation is by stratified k-fold cross-validation.

pub mod acoustic;
pub mod corpus;
pub mod lexical;
pub mod visual;
pub mod fusion;
pub mod svm;
pub mod config;
