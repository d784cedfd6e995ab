//! Prediction, accuracy, the majority baseline, significance testing, and
//! attention export.

mod export;
mod ttest;

pub use export::{attention_export, export_attention, AttentionExport, ExportFormat, ExportTokens, ExportWeights};
pub use ttest::{paired_t_test, parse_samples, regularized_incomplete_beta, two_sided_p, PairedTTest};

use crate::corpus::Sentiment;
use crate::error::{Error, Result};
use crate::model::{EmbeddedExample, Model};

/// Argmax over class probabilities; ties go to the lowest class index.
pub fn predict_label(probs: &[f64]) -> Sentiment {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    Sentiment::from_index(best).expect("three-class probabilities")
}

pub fn predict(model: &Model, ex: &EmbeddedExample) -> Result<Sentiment> {
    let (p, _) = model.predict_proba(ex)?;
    Ok(predict_label(&p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub predicted: Sentiment,
    pub gold: Sentiment,
    pub probabilities: Vec<f64>,
}

impl Prediction {
    pub fn correct(&self) -> bool {
        self.predicted == self.gold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub predictions: Vec<Prediction>,
    pub accuracy: f64,
}

impl EvalResult {
    pub fn correct(&self) -> usize {
        self.predictions.iter().filter(|p| p.correct()).count()
    }

    /// Per-example 0/1 correctness, for pairing in a t-test.
    pub fn correctness(&self) -> Vec<f64> {
        self.predictions.iter().map(|p| if p.correct() { 1.0 } else { 0.0 }).collect()
    }
}

pub fn evaluate(model: &Model, examples: &[EmbeddedExample]) -> Result<EvalResult> {
    if examples.is_empty() {
        return Err(Error::Domain("evaluation over an empty corpus".into()));
    }
    let predictions = examples
        .iter()
        .map(|ex| {
            let (probabilities, _) = model.predict_proba(ex)?;
            Ok(Prediction {
                predicted: predict_label(&probabilities),
                gold: ex.label,
                probabilities,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let correct = predictions.iter().filter(|p| p.correct()).count();
    Ok(EvalResult {
        accuracy: correct as f64 / predictions.len() as f64,
        predictions,
    })
}

pub fn accuracy(model: &Model, examples: &[EmbeddedExample]) -> Result<f64> {
    Ok(evaluate(model, examples)?.accuracy)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorityBaseline {
    /// Most frequent training label (lowest class index on ties).
    pub label: Sentiment,
    pub accuracy: f64,
}

/// Predicts the most frequent training label for every test example.
pub fn majority_baseline(train: &[Sentiment], test: &[Sentiment]) -> Result<MajorityBaseline> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::Domain("majority baseline needs non-empty corpora".into()));
    }
    let mut counts = [0usize; 3];
    for l in train {
        counts[l.index()] += 1;
    }
    let mut best = 0;
    for i in 1..3 {
        if counts[i] > counts[best] {
            best = i;
        }
    }
    let label = Sentiment::from_index(best).expect("class index");
    let hits = test.iter().filter(|&&l| l == label).count();
    Ok(MajorityBaseline {
        label,
        accuracy: hits as f64 / test.len() as f64,
    })
}
