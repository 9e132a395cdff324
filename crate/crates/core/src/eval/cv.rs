use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::auc::auc_roc;
use super::confusion::{confusion, metrics, ConfusionMatrix, Metric, MetricValue, Metrics, UndefinedReason};
use super::stats::mean_sd;
use crate::dataset::LearningDataset;
use crate::learners::{fit, Classifier, ModelKind, Schema, TrainConfig};
use crate::rng::derive_seed;
use crate::sampling::{make_folds, under_sample_indices};
use crate::style::{Dimension, Pole};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvOptions {
    pub k: usize,
    pub seed: u64,
    /// Deal each pole round-robin over the folds.
    pub stratified: bool,
    /// Under-sample each training part to equal class sizes.
    pub balance_training: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            k: 10,
            seed: 0,
            stratified: true,
            balance_training: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation; absent with fewer than two values.
    pub stddev: Option<f64>,
    pub min: f64,
    pub max: f64,
    /// Values that were defined and entered the summary.
    pub n: usize,
}

/// Summary of the defined values, or `None` when there are none.
pub fn summarize_values(values: &[f64]) -> Option<MetricSummary> {
    if values.is_empty() {
        return None;
    }
    let (mean, stddev) = mean_sd(values);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(MetricSummary {
        mean: mean.clamp(min, max),
        stddev,
        min,
        max,
        n: values.len(),
    })
}

/// Per-metric summaries over a list of fold metrics.
pub fn summarize(folds: &[Metrics]) -> BTreeMap<Metric, MetricSummary> {
    let mut out = BTreeMap::new();
    for metric in Metric::ALL {
        let values: Vec<f64> = folds.iter().filter_map(|m| m.get(metric)).collect();
        if let Some(s) = summarize_values(&values) {
            out.insert(metric, s);
        }
    }
    out
}

/// Confusion matrix and metrics (with AUC) of a classifier on labeled rows.
pub fn evaluate<C: Classifier + ?Sized>(model: &C, x: &[Vec<f64>], y: &[Pole]) -> Result<(ConfusionMatrix, Metrics)> {
    let pred = model.predict(x)?;
    let cm = confusion(&pred.poles, y)?;
    let mut m = metrics(&cm)?;
    m.auc = Some(match auc_roc(&pred.scores, y) {
        Ok(a) => MetricValue::Value(a),
        Err(Error::SingleClass) => MetricValue::Undefined(UndefinedReason::SingleClassTruth),
        Err(e) => return Err(e),
    });
    Ok((cm, m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub dimension: Option<Dimension>,
    pub model: ModelKind,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub summary: BTreeMap<Metric, MetricSummary>,
    /// Metrics of the summed fold confusion matrices (no AUC).
    pub pooled: Metrics,
}

/// k-fold cross-validation on a feature matrix.
pub fn cross_validate_xy(
    schema: &Schema,
    x: &[Vec<f64>],
    y: &[Pole],
    kind: ModelKind,
    config: &TrainConfig,
    options: &CvOptions,
) -> Result<CvReport> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    config.validate()?;
    let plan = make_folds(x.len(), options.k, options.stratified.then_some(y), options.seed)?;
    let mut folds = Vec::with_capacity(options.k);
    let mut pooled = ConfusionMatrix::default();
    for fold in 0..options.k {
        let mut train = plan.train_indices(fold);
        let test = plan.test_indices(fold);
        let train_y: Vec<Pole> = train.iter().map(|&i| y[i]).collect();
        if !(train_y.contains(&Pole::First) && train_y.contains(&Pole::Second)) {
            return Err(Error::DegenerateFold { fold });
        }
        if options.balance_training {
            let keep = under_sample_indices(&train_y, derive_seed(options.seed, 100 + fold as u64))?;
            train = keep.into_iter().map(|p| train[p]).collect();
        }
        let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
        let ty: Vec<Pole> = train.iter().map(|&i| y[i]).collect();
        let cfg = config.reseeded(derive_seed(options.seed, 200 + fold as u64));
        let model = fit(kind, &cfg, schema, &tx, &ty)?;
        let vx: Vec<Vec<f64>> = test.iter().map(|&i| x[i].clone()).collect();
        let vy: Vec<Pole> = test.iter().map(|&i| y[i]).collect();
        let (cm, m) = evaluate(&model, &vx, &vy)?;
        pooled.add(&cm);
        folds.push(FoldResult {
            fold,
            n_train: tx.len(),
            n_test: vx.len(),
            confusion: cm,
            metrics: m,
            converged: model.converged,
        });
    }
    let fold_metrics: Vec<Metrics> = folds.iter().map(|f| f.metrics).collect();
    Ok(CvReport {
        dimension: schema.dimension,
        model: kind,
        k: options.k,
        seed: options.seed,
        summary: summarize(&fold_metrics),
        pooled: metrics(&pooled)?,
        folds,
    })
}

/// k-fold cross-validation over the rows labeled for `dimension`.
pub fn cross_validate(
    dataset: &LearningDataset,
    dimension: Dimension,
    kind: ModelKind,
    config: &TrainConfig,
    options: &CvOptions,
) -> Result<CvReport> {
    let (x, y) = dataset.labeled_xy(dimension);
    let schema = Schema::new(dataset.feature_names.clone(), Some(dimension));
    cross_validate_xy(&schema, &x, &y, kind, config, options)
}
