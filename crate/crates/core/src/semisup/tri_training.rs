//! Tri-training (Zhou & Li): three learners label unlabeled rows for each
//! other.
//!
//! Each learner starts from its own bootstrap sample of `L`. In every round,
//! learner `i` takes the `U` rows on which the other two agree, provided the
//! pair's error on `L` (measured where they agree) went down and the
//! error-times-size bound still improves; if the candidate set is too large
//! for the bound it is randomly subsampled. Learners that accepted a set are
//! refitted on `L` plus that set. The loop stops after a round without
//! updates. Prediction is a majority vote.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::LearningDataset;
use crate::learners::{fit, Classifier, ModelKind, Schema, TrainConfig, TrainedModel};
use crate::rng::{derive_seed, Rng};
use crate::style::{Dimension, Pole};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub config: TrainConfig,
}

impl LearnerSpec {
    pub fn new(kind: ModelKind, config: TrainConfig) -> Self {
        Self { kind, config }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriTrainOptions {
    pub learners: [LearnerSpec; 3],
    /// Initial models see bootstrap samples of `L` (otherwise all of `L`).
    #[serde(default = "default_true")]
    pub bootstrap: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
}

fn default_true() -> bool {
    true
}

fn default_max_rounds() -> usize {
    100
}

impl TriTrainOptions {
    /// Three copies of one learner.
    pub fn uniform(kind: ModelKind, config: TrainConfig, seed: u64) -> Self {
        let spec = LearnerSpec::new(kind, config);
        Self {
            learners: [spec.clone(), spec.clone(), spec],
            bootstrap: true,
            seed,
            max_rounds: default_max_rounds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriTrainModel {
    pub models: [TrainedModel; 3],
    /// Rounds executed, including the final round without updates.
    pub rounds: usize,
    /// Size of the agreement set each learner last trained with.
    pub pseudo_labeled: [usize; 3],
}

impl Classifier for TriTrainModel {
    fn width(&self) -> usize {
        self.models[0].schema.width()
    }

    /// Vote margin `(first votes − second votes) / 3`.
    fn score_row(&self, row: &[f64]) -> f64 {
        let first = self
            .models
            .iter()
            .filter(|m| Pole::from_score(m.score_row(row)) == Pole::First)
            .count() as f64;
        (first - (3.0 - first)) / 3.0
    }
}

fn bootstrap_indices(y: &[Pole], seed: u64) -> Result<Vec<usize>> {
    let n = y.len();
    for attempt in 0..100 {
        let mut rng = Rng::new(derive_seed(seed, attempt));
        let idx: Vec<usize> = (0..n).map(|_| rng.below(n)).collect();
        let first = idx.iter().any(|&i| y[i] == Pole::First);
        let second = idx.iter().any(|&i| y[i] == Pole::Second);
        if first && second {
            return Ok(idx);
        }
    }
    Err(Error::SingleClass)
}

/// Error of the pair `(a, b)` on `L`, counted where they agree.
fn pair_error(a: &[Pole], b: &[Pole], y: &[Pole]) -> Option<f64> {
    let mut agree = 0usize;
    let mut wrong = 0usize;
    for ((pa, pb), t) in a.iter().zip(b).zip(y) {
        if pa == pb {
            agree += 1;
            if pa != t {
                wrong += 1;
            }
        }
    }
    (agree > 0).then(|| wrong as f64 / agree as f64)
}

fn fit_on(spec: &LearnerSpec, schema: &Schema, x: &[Vec<f64>], y: &[Pole]) -> Result<TrainedModel> {
    fit(spec.kind, &spec.config, schema, x, y)
}

pub fn tri_train_xy(
    schema: &Schema,
    lx: &[Vec<f64>],
    ly: &[Pole],
    ux: &[Vec<f64>],
    options: &TriTrainOptions,
) -> Result<TriTrainModel> {
    if lx.len() != ly.len() {
        return Err(Error::LengthMismatch {
            left: lx.len(),
            right: ly.len(),
        });
    }
    crate::learners::require_both_classes(ly)?;
    if let Some(row) = ux.iter().find(|r| r.len() != schema.width()) {
        return Err(Error::SchemaMismatch {
            expected: schema.width(),
            actual: row.len(),
        });
    }

    let mut models: Vec<TrainedModel> = Vec::with_capacity(3);
    for (i, spec) in options.learners.iter().enumerate() {
        let model = if options.bootstrap {
            let idx = bootstrap_indices(ly, derive_seed(options.seed, i as u64))?;
            let bx: Vec<Vec<f64>> = idx.iter().map(|&k| lx[k].clone()).collect();
            let by: Vec<Pole> = idx.iter().map(|&k| ly[k]).collect();
            fit_on(spec, schema, &bx, &by)?
        } else {
            fit_on(spec, schema, lx, ly)?
        };
        models.push(model);
    }

    let mut prev_error = [0.5f64; 3];
    let mut prev_size = [0usize; 3];
    let mut rounds = 0;
    let mut subsample_rng = Rng::new(derive_seed(options.seed, 1000));
    while rounds < options.max_rounds {
        rounds += 1;
        let on_l: Vec<Vec<Pole>> = models
            .iter()
            .map(|m| m.predict(lx).map(|p| p.poles))
            .collect::<Result<_>>()?;
        let on_u: Vec<Vec<Pole>> = models
            .iter()
            .map(|m| m.predict(ux).map(|p| p.poles))
            .collect::<Result<_>>()?;
        let mut updates: Vec<(usize, Vec<usize>, f64)> = Vec::new();
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let Some(err) = pair_error(&on_l[j], &on_l[k], ly) else {
                continue;
            };
            if err >= prev_error[i] {
                continue;
            }
            let mut agreed: Vec<usize> = (0..ux.len()).filter(|&t| on_u[j][t] == on_u[k][t]).collect();
            if prev_size[i] == 0 {
                prev_size[i] = libm::floor(err / (prev_error[i] - err) + 1.0) as usize;
            }
            let prev = prev_size[i] as f64;
            if prev_size[i] >= agreed.len() {
                continue;
            }
            if err * (agreed.len() as f64) < prev_error[i] * prev {
                updates.push((i, agreed, err));
            } else if prev > err / (prev_error[i] - err) {
                let keep = libm::ceil(prev_error[i] * prev / err - 1.0) as usize;
                subsample_rng.shuffle(&mut agreed);
                agreed.truncate(keep);
                agreed.sort_unstable();
                updates.push((i, agreed, err));
            }
        }
        if updates.is_empty() {
            break;
        }
        for (i, agreed, err) in updates {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let mut x = lx.to_vec();
            let mut y = ly.to_vec();
            for &t in &agreed {
                debug_assert_eq!(on_u[j][t], on_u[k][t]);
                x.push(ux[t].clone());
                y.push(on_u[j][t]);
            }
            models[i] = fit_on(&options.learners[i], schema, &x, &y)?;
            prev_error[i] = err;
            prev_size[i] = agreed.len();
        }
    }
    let models: [TrainedModel; 3] = models
        .try_into()
        .map_err(|_| Error::EmptyInput("tri-training learners"))?;
    Ok(TriTrainModel {
        models,
        rounds,
        pseudo_labeled: prev_size,
    })
}

/// Tri-training on `L` (labeled for `dimension`) and the rows of `U`.
pub fn tri_train(
    l: &LearningDataset,
    u: &LearningDataset,
    dimension: Dimension,
    options: &TriTrainOptions,
) -> Result<TriTrainModel> {
    if l.feature_names != u.feature_names && !u.is_empty() {
        return Err(Error::SchemaMismatch {
            expected: l.width(),
            actual: u.width(),
        });
    }
    let (lx, ly) = l.labeled_xy(dimension);
    let schema = Schema::new(l.feature_names.clone(), Some(dimension));
    tri_train_xy(&schema, &lx, &ly, &u.features(), options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Pole>) {
        let mut rng = Rng::new(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let pole = if rng.uniform() < 0.5 { Pole::First } else { Pole::Second };
            let m = if pole == Pole::First { 1.0 } else { -1.0 };
            x.push(vec![m + rng.uniform_range(-1.5, 1.5), rng.uniform_range(-1.0, 1.0)]);
            y.push(pole);
        }
        (x, y)
    }

    #[test]
    fn empty_pool_is_vote_of_bootstrap_models() {
        let (lx, ly) = data(40, 1);
        let schema = Schema::anonymous(2);
        let opts = TriTrainOptions::uniform(ModelKind::TreeC45, TrainConfig::default(), 3);
        let tri = tri_train_xy(&schema, &lx, &ly, &[], &opts).unwrap();
        // fit the three bootstrap models by hand
        let manual: Vec<TrainedModel> = (0..3)
            .map(|i| {
                let idx = bootstrap_indices(&ly, derive_seed(3, i)).unwrap();
                let bx: Vec<Vec<f64>> = idx.iter().map(|&k| lx[k].clone()).collect();
                let by: Vec<Pole> = idx.iter().map(|&k| ly[k]).collect();
                fit(ModelKind::TreeC45, &TrainConfig::default(), &schema, &bx, &by).unwrap()
            })
            .collect();
        assert_eq!(&tri.models[..], &manual[..]);
        let (tx, _) = data(50, 2);
        for row in &tx {
            let votes = manual
                .iter()
                .filter(|m| Pole::from_score(m.score_row(row)) == Pole::First)
                .count();
            let expected = if votes >= 2 { Pole::First } else { Pole::Second };
            assert_eq!(Pole::from_score(tri.score_row(row)), expected);
        }
    }

    #[test]
    fn identical_learners_label_all_of_u_then_stop() {
        let (lx, ly) = data(40, 4);
        let (ux, _) = data(60, 5);
        let schema = Schema::anonymous(2);
        let mut opts = TriTrainOptions::uniform(ModelKind::TreeC45, TrainConfig::default(), 0);
        opts.bootstrap = false;
        let tri = tri_train_xy(&schema, &lx, &ly, &ux, &opts).unwrap();
        assert_eq!(tri.rounds, 2);
        assert_eq!(tri.pseudo_labeled, [60, 60, 60]);
    }

    #[test]
    fn single_class_l_is_rejected() {
        let lx = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let ly = vec![Pole::First, Pole::First];
        let opts = TriTrainOptions::uniform(ModelKind::NaiveBayes, TrainConfig::default(), 0);
        assert_eq!(
            tri_train_xy(&Schema::anonymous(2), &lx, &ly, &[], &opts).unwrap_err(),
            Error::SingleClass
        );
    }

    #[test]
    fn deterministic_in_seed() {
        let (lx, ly) = data(30, 6);
        let (ux, _) = data(100, 7);
        let opts = TriTrainOptions::uniform(ModelKind::TreeC45, TrainConfig::default(), 9);
        let a = tri_train_xy(&Schema::anonymous(2), &lx, &ly, &ux, &opts).unwrap();
        let b = tri_train_xy(&Schema::anonymous(2), &lx, &ly, &ux, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.rounds >= 1);
    }

    #[test]
    fn pair_error_counts_only_agreement() {
        let a = [Pole::First, Pole::First, Pole::Second];
        let b = [Pole::First, Pole::Second, Pole::Second];
        let y = [Pole::Second, Pole::First, Pole::Second];
        assert_eq!(pair_error(&a, &b, &y), Some(0.5));
        assert_eq!(pair_error(&a[1..2], &b[1..2], &y[1..2]), None);
    }
}
