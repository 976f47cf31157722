use serde::{Deserialize, Serialize};

use super::gbm::GbmModel;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    /// A row is predicted positive when its probability is `>= threshold`.
    pub fn from_scores(probs: &[f64], truth: &[bool], threshold: f64) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (&p, &t) in probs.iter().zip(truth) {
            match (p >= threshold, t) {
                (true, true) => cm.tp += 1,
                (true, false) => cm.fp += 1,
                (false, false) => cm.tn += 1,
                (false, true) => cm.fn_ += 1,
            }
        }
        cm
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Test-set metrics at one threshold. Rates that would divide by zero are
/// `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub confusion: ConfusionMatrix,
    pub n: u64,
    pub accuracy: f64,
    pub accuracy_ci95: (f64, f64),
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub prevalence: f64,
    /// Precision over prevalence.
    pub lift: Option<f64>,
    pub train_accuracy: Option<f64>,
    /// `train_accuracy - accuracy`.
    pub train_test_gap: Option<f64>,
}

impl EvalReport {
    pub fn from_confusion(cm: ConfusionMatrix, threshold: f64) -> Result<Self> {
        let n = cm.total();
        if n == 0 {
            return Err(Error::InvalidInput("empty evaluation set".into()));
        }
        let correct = cm.tp + cm.tn;
        let precision = ratio(cm.tp, cm.tp + cm.fp);
        let prevalence = (cm.tp + cm.fn_) as f64 / n as f64;
        Ok(EvalReport {
            threshold,
            confusion: cm,
            n,
            accuracy: correct as f64 / n as f64,
            accuracy_ci95: wilson_interval(correct, n, Z95),
            sensitivity: ratio(cm.tp, cm.tp + cm.fn_),
            specificity: ratio(cm.tn, cm.tn + cm.fp),
            precision,
            prevalence,
            lift: precision.filter(|_| prevalence > 0.0).map(|p| p / prevalence),
            train_accuracy: None,
            train_test_gap: None,
        })
    }

    pub fn with_train_accuracy(mut self, train_accuracy: f64) -> Self {
        self.train_accuracy = Some(train_accuracy);
        self.train_test_gap = Some(train_accuracy - self.accuracy);
        self
    }
}

/// Scores `rows` with `model` and compares against `positive`.
pub fn evaluate(
    model: &GbmModel,
    m: &FeatureMatrix,
    positive: &[bool],
    rows: &[usize],
    threshold: f64,
) -> Result<EvalReport> {
    let probs = model.predict_rows(m, rows)?;
    let truth: Vec<bool> = rows.iter().map(|&r| positive[r]).collect();
    EvalReport::from_confusion(ConfusionMatrix::from_scores(&probs, &truth, threshold), threshold)
}
