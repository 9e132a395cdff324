use serde::{Deserialize, Serialize};

use crate::style::Pole;
use crate::{Error, Result};

/// Binary confusion counts; the positive class is the first pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn correct(&self) -> usize {
        self.tp + self.tn
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }
}

pub fn confusion(predicted: &[Pole], truth: &[Pole]) -> Result<ConfusionMatrix> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput("no predictions to score"));
    }
    let mut cm = ConfusionMatrix::default();
    for (p, t) in predicted.iter().zip(truth) {
        match (p, t) {
            (Pole::First, Pole::First) => cm.tp += 1,
            (Pole::First, Pole::Second) => cm.fp += 1,
            (Pole::Second, Pole::First) => cm.fn_ += 1,
            (Pole::Second, Pole::Second) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// Why a ratio metric has no value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedReason {
    NoPositivePredictions,
    NoPositiveCases,
    NoNegativeCases,
    SingleClassTruth,
}

impl UndefinedReason {
    pub fn describe(self) -> &'static str {
        match self {
            UndefinedReason::NoPositivePredictions => "no positive predictions",
            UndefinedReason::NoPositiveCases => "no positive cases",
            UndefinedReason::NoNegativeCases => "no negative cases",
            UndefinedReason::SingleClassTruth => "truth has a single class",
        }
    }
}

/// A metric that is either a number or absent with a reason. Absent values
/// are never coerced to 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricValue {
    Value(f64),
    Undefined(UndefinedReason),
}

impl MetricValue {
    pub fn value(self) -> Option<f64> {
        match self {
            MetricValue::Value(v) => Some(v),
            MetricValue::Undefined(_) => None,
        }
    }

    fn ratio(num: usize, den: usize, reason: UndefinedReason) -> Self {
        if den == 0 {
            MetricValue::Undefined(reason)
        } else {
            MetricValue::Value(num as f64 / den as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Precision,
    Recall,
    Specificity,
    Auc,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Accuracy,
        Metric::Precision,
        Metric::Recall,
        Metric::Specificity,
        Metric::Auc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::Specificity => "specificity",
            Metric::Auc => "auc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: MetricValue,
    pub recall: MetricValue,
    pub specificity: MetricValue,
    /// Absent when no scores were available.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc: Option<MetricValue>,
}

impl Metrics {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Accuracy => Some(self.accuracy),
            Metric::Precision => self.precision.value(),
            Metric::Recall => self.recall.value(),
            Metric::Specificity => self.specificity.value(),
            Metric::Auc => self.auc.and_then(MetricValue::value),
        }
    }
}

/// Accuracy, precision, recall and specificity of `cm`.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyInput("confusion matrix is empty"));
    }
    Ok(Metrics {
        accuracy: cm.correct() as f64 / total as f64,
        precision: MetricValue::ratio(cm.tp, cm.tp + cm.fp, UndefinedReason::NoPositivePredictions),
        recall: MetricValue::ratio(cm.tp, cm.tp + cm.fn_, UndefinedReason::NoPositiveCases),
        specificity: MetricValue::ratio(cm.tn, cm.tn + cm.fp, UndefinedReason::NoNegativeCases),
        auc: None,
    })
}
