//! Labeled-ratio sweeps and the supervised / self-training / tri-training
//! comparison.
//!
//! Both follow the same protocol. The rows labeled for the dimension are
//! split into `folds` stratified folds. For each fold, the other folds form
//! the training part; a fraction `ratio` of it keeps its labels (`L`), the
//! rest joins the dataset's originally unlabeled rows in `U`. The held-out
//! fold is never seen by any method and serves as the test set. At
//! `ratio = 1` with no originally unlabeled rows, `U` is empty and every
//! method reduces to the supervised baseline.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::confusion::{metrics, ConfusionMatrix, Metric, Metrics};
use super::cv::{evaluate, summarize, MetricSummary};
use super::stats::{paired_t_test, self_taught_accuracy, TTestResult};
use crate::dataset::LearningDataset;
use crate::learners::{fit, Classifier, ModelKind, Schema, TrainConfig};
use crate::rng::derive_seed;
use crate::sampling::{choose_labeled, make_folds, SplitSpec};
use crate::semisup::{self_train_xy, tri_train_xy, LabelingConfig, TriTrainOptions};
use crate::style::{Dimension, Pole};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolOptions {
    pub folds: usize,
    pub stratified: bool,
    pub labeling: LabelingConfig,
    pub final_config: TrainConfig,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            folds: 10,
            stratified: true,
            labeling: LabelingConfig::default(),
            final_config: TrainConfig::default(),
        }
    }
}

/// Metrics of one method over the folds of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub per_fold: Vec<Metrics>,
    pub summary: BTreeMap<Metric, MetricSummary>,
    /// Metrics of the summed fold confusion matrices.
    pub pooled: Metrics,
}

impl MethodResult {
    fn from_folds(cms: &[ConfusionMatrix], per_fold: Vec<Metrics>) -> Result<Self> {
        let mut pooled = ConfusionMatrix::default();
        for cm in cms {
            pooled.add(cm);
        }
        Ok(Self {
            summary: summarize(&per_fold),
            pooled: metrics(&pooled)?,
            per_fold,
        })
    }

    pub fn mean(&self, metric: Metric) -> Option<f64> {
        self.summary.get(&metric).map(|s| s.mean)
    }
}

struct FoldOutcome {
    sl: (ConfusionMatrix, Metrics),
    ssl: (ConfusionMatrix, Metrics),
    tri: Option<(ConfusionMatrix, Metrics)>,
    n_labeled: usize,
    n_hidden: usize,
    n_hidden_correct: usize,
}

struct Protocol<'a> {
    dataset: &'a LearningDataset,
    schema: Schema,
    labeled: Vec<usize>,
    poles: Vec<Pole>,
    unlabeled: Vec<usize>,
}

impl<'a> Protocol<'a> {
    fn new(dataset: &'a LearningDataset, dimension: Dimension) -> Result<Self> {
        let labeled = dataset.labeled_indices(dimension);
        if labeled.is_empty() {
            return Err(Error::EmptyInput("no labeled rows for the dimension"));
        }
        let poles = labeled
            .iter()
            .map(|&i| {
                dataset
                    .label(dimension, &dataset.rows[i].user_id)
                    .expect("labeled")
                    .pole
            })
            .collect();
        Ok(Self {
            dataset,
            schema: Schema::new(dataset.feature_names.clone(), Some(dimension)),
            unlabeled: dataset.unlabeled_indices(dimension),
            labeled,
            poles,
        })
    }

    fn row(&self, i: usize) -> Vec<f64> {
        self.dataset.rows[i].features()
    }

    fn run(
        &self,
        ratio: f64,
        kind: ModelKind,
        seed: u64,
        options: &ProtocolOptions,
        tri: bool,
    ) -> Result<Vec<FoldOutcome>> {
        let plan = make_folds(
            self.labeled.len(),
            options.folds,
            options.stratified.then_some(&self.poles[..]),
            seed,
        )?;
        let mut out = Vec::with_capacity(options.folds);
        for fold in 0..options.folds {
            let f = fold as u64;
            let train = plan.train_indices(fold);
            let test = plan.test_indices(fold);
            let train_poles: Vec<Pole> = train.iter().map(|&p| self.poles[p]).collect();
            let spec = SplitSpec {
                labeled_ratio: ratio,
                seed: derive_seed(seed, 1_000 + f),
                stratified: options.stratified,
            };
            let keep = choose_labeled(&train_poles, &spec)?;
            let mut in_l = alloc::vec![false; train.len()];
            for &k in &keep {
                in_l[k] = true;
            }
            let lx: Vec<Vec<f64>> = keep.iter().map(|&k| self.row(self.labeled[train[k]])).collect();
            let ly: Vec<Pole> = keep.iter().map(|&k| train_poles[k]).collect();
            let hidden: Vec<usize> = (0..train.len()).filter(|&k| !in_l[k]).collect();
            let mut ux: Vec<Vec<f64>> = hidden.iter().map(|&k| self.row(self.labeled[train[k]])).collect();
            let hidden_truth: Vec<Pole> = hidden.iter().map(|&k| train_poles[k]).collect();
            ux.extend(self.unlabeled.iter().map(|&i| self.row(i)));

            let tx: Vec<Vec<f64>> = test.iter().map(|&p| self.row(self.labeled[p])).collect();
            let ty: Vec<Pole> = test.iter().map(|&p| self.poles[p]).collect();

            let cfg = options.final_config.reseeded(derive_seed(seed, 2_000 + f));
            let baseline = fit(kind, &cfg, &self.schema, &lx, &ly)?;
            let labeling = LabelingConfig {
                seed: derive_seed(seed, 3_000 + f),
                ..options.labeling.clone()
            };
            let st = self_train_xy(&self.schema, &lx, &ly, &ux, &labeling, kind, &cfg)?;
            let n_hidden_correct = hidden_truth.iter().zip(&st.self_taught).filter(|(t, p)| t == p).count();
            let tri_result = if tri {
                let opts = TriTrainOptions::uniform(kind, cfg.clone(), derive_seed(seed, 4_000 + f));
                let model = tri_train_xy(&self.schema, &lx, &ly, &ux, &opts)?;
                Some(evaluate(&model, &tx, &ty)?)
            } else {
                None
            };
            out.push(FoldOutcome {
                sl: evaluate(&baseline, &tx, &ty)?,
                ssl: evaluate(&st.final_model, &tx, &ty)?,
                tri: tri_result,
                n_labeled: lx.len(),
                n_hidden: hidden_truth.len(),
                n_hidden_correct,
            });
        }
        Ok(out)
    }
}

fn collect(
    outcomes: &[FoldOutcome],
    pick: impl Fn(&FoldOutcome) -> Option<(ConfusionMatrix, Metrics)>,
) -> Result<Option<MethodResult>> {
    let picked: Option<Vec<(ConfusionMatrix, Metrics)>> = outcomes.iter().map(pick).collect();
    match picked {
        None => Ok(None),
        Some(v) => {
            let (cms, ms): (Vec<_>, Vec<_>) = v.into_iter().unzip();
            MethodResult::from_folds(&cms, ms).map(Some)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub final_kind: ModelKind,
    pub seed: u64,
    /// Size of `L`, summed over folds.
    pub n_labeled: usize,
    /// Training rows whose labels were hidden, summed over folds.
    pub n_hidden: usize,
    /// The supervised baseline trained on `L` only.
    pub baseline: MethodResult,
    /// The final model of self-training.
    pub self_training: MethodResult,
    /// Labeled rows counted correct plus correct self-taught labels on the
    /// hidden rows, over both (rows without any truth are excluded).
    pub self_taught_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub dimension: Dimension,
    pub folds: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Mean over rows matching `ratio` and `kind` of the per-row mean
    /// final-model metric.
    pub fn mean_over_seeds(&self, ratio: f64, kind: ModelKind, metric: Metric) -> Option<f64> {
        let v: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.ratio == ratio && r.final_kind == kind)
            .filter_map(|r| r.self_training.mean(metric))
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// One row per `(ratio, kind, seed)`, in that nesting order.
pub fn ratio_sweep(
    dataset: &LearningDataset,
    dimension: Dimension,
    ratios: &[f64],
    kinds: &[ModelKind],
    seeds: &[u64],
    options: &ProtocolOptions,
) -> Result<SweepReport> {
    for &r in ratios {
        SplitSpec::new(r, 0).validate()?;
    }
    let protocol = Protocol::new(dataset, dimension)?;
    let mut rows = Vec::new();
    for &ratio in ratios {
        for &kind in kinds {
            for &seed in seeds {
                let outcomes = protocol.run(ratio, kind, seed, options, false)?;
                let n_labeled: usize = outcomes.iter().map(|o| o.n_labeled).sum();
                let n_hidden: usize = outcomes.iter().map(|o| o.n_hidden).sum();
                let correct: usize = outcomes.iter().map(|o| o.n_hidden_correct).sum();
                rows.push(SweepRow {
                    ratio,
                    final_kind: kind,
                    seed,
                    n_labeled,
                    n_hidden,
                    baseline: collect(&outcomes, |o| Some(o.sl))?.expect("baseline"),
                    self_training: collect(&outcomes, |o| Some(o.ssl))?.expect("self-training"),
                    self_taught_accuracy: self_taught_accuracy(n_labeled, correct, n_labeled + n_hidden)?,
                });
            }
        }
    }
    Ok(SweepReport {
        dimension,
        folds: options.folds,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSpec {
    pub ratio: f64,
    pub final_kind: ModelKind,
    pub seeds: Vec<u64>,
    #[serde(default = "default_true")]
    pub include_tri_training: bool,
    #[serde(default)]
    pub protocol: ProtocolOptions,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Supervised,
    SelfTraining,
    TriTraining,
}

impl Method {
    pub fn short_name(self) -> &'static str {
        match self {
            Method::Supervised => "SL",
            Method::SelfTraining => "SSL",
            Method::TriTraining => "Tri",
        }
    }
}

/// Metrics of every method on one `(seed, fold)` test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRow {
    pub seed: u64,
    pub fold: usize,
    pub supervised: Metrics,
    pub self_training: Metrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tri_training: Option<Metrics>,
}

impl PairedRow {
    pub fn get(&self, method: Method) -> Option<&Metrics> {
        match method {
            Method::Supervised => Some(&self.supervised),
            Method::SelfTraining => Some(&self.self_training),
            Method::TriTraining => self.tri_training.as_ref(),
        }
    }
}

/// One t-test cell: `left − right` on `metric`, or the reason it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCell {
    pub left: Method,
    pub right: Method,
    pub metric: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<TTestResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Pairs dropped because the metric was undefined on either side.
    pub dropped_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub dimension: Dimension,
    pub ratio: f64,
    pub final_kind: ModelKind,
    pub folds: usize,
    pub rows: Vec<PairedRow>,
    pub summary: BTreeMap<Method, BTreeMap<Metric, MetricSummary>>,
    pub tests: Vec<TestCell>,
}

impl ComparisonReport {
    pub fn test(&self, left: Method, right: Method, metric: Metric) -> Option<&TestCell> {
        self.tests
            .iter()
            .find(|c| c.left == left && c.right == right && c.metric == metric)
    }
}

/// Paired t-test of two methods over the rows, skipping rows where the
/// metric is undefined for either.
pub fn paired_cell(rows: &[PairedRow], left: Method, right: Method, metric: Metric) -> TestCell {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut dropped = 0;
    for row in rows {
        match (
            row.get(left).and_then(|m| m.get(metric)),
            row.get(right).and_then(|m| m.get(metric)),
        ) {
            (Some(x), Some(y)) => {
                a.push(x);
                b.push(y);
            }
            _ => dropped += 1,
        }
    }
    let (result, error) = match paired_t_test(&a, &b) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    TestCell {
        left,
        right,
        metric,
        result,
        error,
        dropped_pairs: dropped,
    }
}

/// Supervised baseline, self-training and (optionally) tri-training under
/// identical splits, paired per `(seed, fold)`. The t-tests are
/// `SL − SSL` and `Tri − SSL` on accuracy, precision and recall, so a
/// negative t favors self-training.
pub fn compare_methods(
    dataset: &LearningDataset,
    dimension: Dimension,
    spec: &CompareSpec,
) -> Result<ComparisonReport> {
    SplitSpec::new(spec.ratio, 0).validate()?;
    if spec.seeds.is_empty() {
        return Err(Error::EmptyInput("no seeds to compare over"));
    }
    let protocol = Protocol::new(dataset, dimension)?;
    let mut rows = Vec::new();
    for &seed in &spec.seeds {
        let outcomes = protocol.run(
            spec.ratio,
            spec.final_kind,
            seed,
            &spec.protocol,
            spec.include_tri_training,
        )?;
        for (fold, o) in outcomes.into_iter().enumerate() {
            rows.push(PairedRow {
                seed,
                fold,
                supervised: o.sl.1,
                self_training: o.ssl.1,
                tri_training: o.tri.map(|t| t.1),
            });
        }
    }
    let mut methods = alloc::vec![Method::Supervised, Method::SelfTraining];
    if spec.include_tri_training {
        methods.push(Method::TriTraining);
    }
    let mut summary = BTreeMap::new();
    for &m in &methods {
        let ms: Vec<Metrics> = rows.iter().filter_map(|r| r.get(m).copied()).collect();
        summary.insert(m, summarize(&ms));
    }
    let mut tests = Vec::new();
    for &left in &methods {
        if left == Method::SelfTraining {
            continue;
        }
        for metric in [Metric::Accuracy, Metric::Precision, Metric::Recall] {
            tests.push(paired_cell(&rows, left, Method::SelfTraining, metric));
        }
    }
    Ok(ComparisonReport {
        dimension,
        ratio: spec.ratio,
        final_kind: spec.final_kind,
        folds: spec.protocol.folds,
        rows,
        summary,
        tests,
    })
}

/// Accuracy of `model` on rows whose truth is known; used for the labeling
/// stage in reports.
pub fn accuracy_on<C: Classifier + ?Sized>(model: &C, x: &[Vec<f64>], y: &[Pole]) -> Result<f64> {
    Ok(evaluate(model, x, y)?.1.accuracy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ProfileRow;
    use crate::rng::Rng;
    use crate::style::DimensionLabel;
    use alloc::format;
    use alloc::vec;

    fn dataset(n: usize, seed: u64) -> LearningDataset {
        let mut rng = Rng::new(seed);
        let rows = (0..n)
            .map(|i| ProfileRow {
                user_id: format!("u{i:04}"),
                counts: vec![0, 0],
            })
            .collect();
        let mut ds = LearningDataset::new(vec!["a".into(), "b".into()], rows).unwrap();
        for i in 0..n {
            let pole = if rng.uniform() < 0.5 { Pole::First } else { Pole::Second };
            let (ra, rb) = if pole == Pole::First { (8.0, 3.0) } else { (3.0, 6.0) };
            ds.rows[i].counts = vec![rng.poisson(ra), rng.poisson(rb)];
            ds.set_label(&format!("u{i:04}"), DimensionLabel::pole_only(Dimension::Input, pole));
        }
        ds
    }

    fn options() -> ProtocolOptions {
        ProtocolOptions {
            folds: 5,
            ..ProtocolOptions::default()
        }
    }

    #[test]
    fn one_row_per_cell_and_full_ratio_is_baseline() {
        let ds = dataset(100, 1);
        let ratios = [0.1, 0.2, 0.5, 0.75, 1.0];
        let r = ratio_sweep(&ds, Dimension::Input, &ratios, &[ModelKind::TreeC45], &[7], &options()).unwrap();
        assert_eq!(r.rows.len(), 5);
        let full = &r.rows[4];
        assert_eq!(full.baseline, full.self_training);
        assert_eq!(full.n_hidden, 0);
        assert_eq!(full.self_taught_accuracy, 1.0);
        let again = ratio_sweep(
            &ds,
            Dimension::Input,
            &[0.2, 0.2],
            &[ModelKind::TreeC45],
            &[7],
            &options(),
        )
        .unwrap();
        assert_eq!(again.rows[0], again.rows[1]);
        assert_eq!(again.rows[0], r.rows[1]);
    }

    #[test]
    fn identical_methods_surface_a_per_cell_error() {
        let ds = dataset(60, 2);
        let spec = CompareSpec {
            ratio: 1.0,
            final_kind: ModelKind::NaiveBayes,
            seeds: vec![1, 2],
            include_tri_training: false,
            protocol: options(),
        };
        let r = compare_methods(&ds, Dimension::Input, &spec).unwrap();
        assert_eq!(r.rows.len(), 10);
        let cell = r
            .test(Method::Supervised, Method::SelfTraining, Metric::Accuracy)
            .unwrap();
        assert!(cell.result.is_none());
        assert_eq!(cell.error.as_deref(), Some("t undefined for constant differences"));
    }

    #[test]
    fn comparison_includes_tri_training() {
        let ds = dataset(80, 3);
        let spec = CompareSpec {
            ratio: 0.3,
            final_kind: ModelKind::TreeC45,
            seeds: vec![4],
            include_tri_training: true,
            protocol: options(),
        };
        let r = compare_methods(&ds, Dimension::Input, &spec).unwrap();
        assert!(r.rows.iter().all(|row| row.tri_training.is_some()));
        assert_eq!(r.tests.len(), 6);
        assert!(r.summary.contains_key(&Method::TriTraining));
    }
}
