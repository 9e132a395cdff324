//! Binary classifiers over count features.
//!
//! Every model scores a row with a real number; a score of zero or more
//! means the first pole. SVM and MLP models standardize their inputs with
//! statistics fitted on the training rows; trees, forests and naive Bayes
//! see raw counts.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::style::{Dimension, Pole};
use crate::{Error, Result};

pub mod forest;
pub mod mlp;
pub mod naive_bayes;
pub mod standardize;
pub mod svm;
pub mod tree;

pub use forest::ForestConfig;
pub use mlp::MlpConfig;
pub use naive_bayes::NbConfig;
pub use standardize::Standardizer;
pub use svm::{Kernel, SvmConfig};
pub use tree::TreeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Svm,
    #[serde(alias = "nb")]
    NaiveBayes,
    #[serde(alias = "tree")]
    TreeC45,
    #[serde(alias = "forest")]
    RandomForest,
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Svm,
        ModelKind::NaiveBayes,
        ModelKind::TreeC45,
        ModelKind::RandomForest,
        ModelKind::Mlp,
    ];

    /// Short name used on the command line and in reports.
    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::NaiveBayes => "nb",
            ModelKind::TreeC45 => "tree",
            ModelKind::RandomForest => "forest",
            ModelKind::Mlp => "mlp",
        }
    }

    pub fn parse(s: &str) -> Result<ModelKind> {
        let lower = s.trim().to_ascii_lowercase();
        ModelKind::ALL
            .into_iter()
            .find(|k| {
                lower == k.short_name()
                    || match k {
                        ModelKind::NaiveBayes => lower == "naive_bayes",
                        ModelKind::TreeC45 => lower == "c45" || lower == "tree_c45" || lower == "j48",
                        ModelKind::RandomForest => lower == "rf" || lower == "random_forest",
                        ModelKind::Mlp => lower == "nn",
                        ModelKind::Svm => false,
                    }
            })
            .ok_or_else(|| Error::InvalidConfig(format!("unknown model kind `{s}`")))
    }

    fn standardizes(self) -> bool {
        matches!(self, ModelKind::Svm | ModelKind::Mlp)
    }
}

/// Hyperparameters for every model kind; `fit` reads the part for its kind.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub svm: SvmConfig,
    pub nb: NbConfig,
    pub tree: TreeConfig,
    pub forest: ForestConfig,
    pub mlp: MlpConfig,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.svm.validate()?;
        self.nb.validate()?;
        self.tree.validate()?;
        self.forest.validate()?;
        self.mlp.validate()
    }

    /// Copy with the seeded learners (forest, MLP) reseeded.
    pub fn reseeded(&self, seed: u64) -> TrainConfig {
        let mut out = self.clone();
        out.forest.seed = seed;
        out.mlp.seed = crate::rng::derive_seed(seed, 1);
        out
    }
}

/// Feature names and target dimension a model was fitted for.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schema {
    pub feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<Dimension>,
}

impl Schema {
    pub fn new(feature_names: Vec<String>, dimension: Option<Dimension>) -> Self {
        Self {
            feature_names,
            dimension,
        }
    }

    /// Generic names `f0..f{width-1}`.
    pub fn anonymous(width: usize) -> Self {
        Self {
            feature_names: (0..width).map(|i| format!("f{i}")).collect(),
            dimension: None,
        }
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Svm(svm::SvmModel),
    NaiveBayes(naive_bayes::NbModel),
    TreeC45(tree::Tree),
    RandomForest(forest::Forest),
    Mlp(mlp::MlpParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub schema: Schema,
    /// Pole names, positive (first) pole first.
    pub class_order: [String; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standardization: Option<Standardizer>,
    pub params: ModelParams,
    /// False when an iterative solver stopped at its iteration budget.
    pub converged: bool,
}

/// Poles and raw decision scores for a batch of rows.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Prediction {
    pub poles: Vec<Pole>,
    pub scores: Vec<f64>,
}

/// Anything that labels rows.
pub trait Classifier {
    fn width(&self) -> usize;

    /// Decision score for one row of the right width.
    fn score_row(&self, row: &[f64]) -> f64;

    fn predict(&self, rows: &[Vec<f64>]) -> Result<Prediction> {
        let mut out = Prediction {
            poles: Vec::with_capacity(rows.len()),
            scores: Vec::with_capacity(rows.len()),
        };
        for row in rows {
            if row.len() != self.width() {
                return Err(Error::WidthMismatch {
                    expected: self.width(),
                    actual: row.len(),
                });
            }
            let s = self.score_row(row);
            out.poles.push(Pole::from_score(s));
            out.scores.push(s);
        }
        Ok(out)
    }
}

impl Classifier for TrainedModel {
    fn width(&self) -> usize {
        self.schema.width()
    }

    fn score_row(&self, row: &[f64]) -> f64 {
        let scaled;
        let row = match &self.standardization {
            Some(s) => {
                scaled = s.transform_row(row);
                &scaled[..]
            }
            None => row,
        };
        match &self.params {
            ModelParams::Svm(m) => m.decision(row),
            ModelParams::NaiveBayes(m) => m.score(row),
            ModelParams::TreeC45(m) => m.score(row),
            ModelParams::RandomForest(m) => m.score(row),
            ModelParams::Mlp(m) => m.logit(row),
        }
    }
}

/// Poles and scores of `model` on `rows`.
pub fn predict(model: &TrainedModel, rows: &[Vec<f64>]) -> Result<Prediction> {
    model.predict(rows)
}

pub(crate) fn check_xy(schema: &Schema, x: &[Vec<f64>], y: &[Pole]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::EmptyInput("no training rows"));
    }
    for row in x {
        if row.len() != schema.width() {
            return Err(Error::WidthMismatch {
                expected: schema.width(),
                actual: row.len(),
            });
        }
    }
    Ok(())
}

pub(crate) fn require_both_classes(y: &[Pole]) -> Result<()> {
    let first = y.contains(&Pole::First);
    let second = y.contains(&Pole::Second);
    if first && second {
        Ok(())
    } else {
        Err(Error::SingleClass)
    }
}

/// Fits a model of `kind` on rows `x` with poles `y`.
pub fn fit(kind: ModelKind, config: &TrainConfig, schema: &Schema, x: &[Vec<f64>], y: &[Pole]) -> Result<TrainedModel> {
    check_xy(schema, x, y)?;
    config.validate()?;
    let standardization = if kind.standardizes() {
        Some(Standardizer::fit(x)?)
    } else {
        None
    };
    let scaled: Vec<Vec<f64>>;
    let xs: &[Vec<f64>] = match &standardization {
        Some(s) => {
            scaled = s.transform(x);
            &scaled
        }
        None => x,
    };
    let mut converged = true;
    let params = match kind {
        ModelKind::Svm => {
            let (model, ok) = svm::fit(xs, y, &config.svm)?;
            converged = ok;
            ModelParams::Svm(model)
        }
        ModelKind::NaiveBayes => ModelParams::NaiveBayes(naive_bayes::fit(xs, y, &config.nb)?),
        ModelKind::TreeC45 => ModelParams::TreeC45(tree::fit(xs, y, &config.tree)),
        ModelKind::RandomForest => ModelParams::RandomForest(forest::fit(xs, y, &config.forest, &config.tree)?),
        ModelKind::Mlp => ModelParams::Mlp(mlp::fit(xs, y, &config.mlp)?),
    };
    let class_order = match schema.dimension {
        Some(d) => [d.poles().0.into(), d.poles().1.into()],
        None => ["first".into(), "second".into()],
    };
    Ok(TrainedModel {
        kind,
        schema: schema.clone(),
        class_order,
        standardization,
        params,
        converged,
    })
}

/// Fraction of rows where `model` predicts the given pole.
pub fn training_accuracy<C: Classifier + ?Sized>(model: &C, x: &[Vec<f64>], y: &[Pole]) -> Result<f64> {
    let pred = model.predict(x)?;
    let hits = pred.poles.iter().zip(y).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y.len().max(1) as f64)
}

#[cfg(test)]
pub(crate) mod testdata {
    use super::*;
    use crate::rng::Rng;
    use alloc::vec;

    /// Two Gaussian-ish blobs in 2-D, well separated.
    pub fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Pole>) {
        let mut rng = Rng::new(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let pole = if i % 2 == 0 { Pole::First } else { Pole::Second };
            let c = if pole == Pole::First { 3.0 } else { -3.0 };
            x.push(vec![c + rng.uniform_range(-1.0, 1.0), c + rng.uniform_range(-1.0, 1.0)]);
            y.push(pole);
        }
        (x, y)
    }
}
