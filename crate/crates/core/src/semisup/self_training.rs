use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::LearningDataset;
use crate::learners::{fit, Classifier, ModelKind, Schema, SvmConfig, TrainConfig, TrainedModel};
use crate::sampling::under_sample_indices;
use crate::style::{Dimension, DimensionLabel, Pole};
use crate::{Error, Result};

/// How the labeling SVM is trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelingConfig {
    pub svm: SvmConfig,
    /// Randomly under-sample `L` to equal class sizes before fitting the
    /// labeling model. `L` itself still goes into `D′` whole.
    pub balance: bool,
    pub seed: u64,
}

impl Default for LabelingConfig {
    fn default() -> Self {
        Self {
            svm: SvmConfig::default(),
            balance: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    OriginalLabel,
    SelfTaughtLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCounts {
    pub labeled: usize,
    pub unlabeled: usize,
    pub combined: usize,
}

/// Everything one self-training run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTrainRun {
    pub dimension: Dimension,
    pub labeling_model: TrainedModel,
    pub final_model: TrainedModel,
    /// `L` rows followed by the self-labeled `U` rows.
    pub d_prime: LearningDataset,
    /// One flag per `d_prime` row.
    pub provenance: Vec<Provenance>,
    pub counts: RunCounts,
}

/// Matrix-level result of [`self_train_xy`].
#[derive(Debug, Clone)]
pub struct SelfTrainOutput {
    pub labeling_model: TrainedModel,
    pub final_model: TrainedModel,
    /// Labels the labeling model gave to the `U` rows.
    pub self_taught: Vec<Pole>,
}

fn labeling_train_config(config: &LabelingConfig) -> TrainConfig {
    TrainConfig {
        svm: config.svm.clone(),
        ..TrainConfig::default()
    }
}

/// Fits the labeling SVM on `(lx, ly)`, labels `ux`, and fits
/// `final_kind` on the labeled rows followed by the self-labeled rows.
pub fn self_train_xy(
    schema: &Schema,
    lx: &[Vec<f64>],
    ly: &[Pole],
    ux: &[Vec<f64>],
    labeling: &LabelingConfig,
    final_kind: ModelKind,
    final_config: &TrainConfig,
) -> Result<SelfTrainOutput> {
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
    let svm_config = labeling_train_config(labeling);
    let labeling_model = if labeling.balance {
        let keep = under_sample_indices(ly, labeling.seed)?;
        let bx: Vec<Vec<f64>> = keep.iter().map(|&i| lx[i].clone()).collect();
        let by: Vec<Pole> = keep.iter().map(|&i| ly[i]).collect();
        fit(ModelKind::Svm, &svm_config, schema, &bx, &by)?
    } else {
        fit(ModelKind::Svm, &svm_config, schema, lx, ly)?
    };
    let self_taught = labeling_model.predict(ux)?.poles;

    let mut dx: Vec<Vec<f64>> = Vec::with_capacity(lx.len() + ux.len());
    dx.extend_from_slice(lx);
    dx.extend_from_slice(ux);
    let mut dy: Vec<Pole> = Vec::with_capacity(dx.len());
    dy.extend_from_slice(ly);
    dy.extend_from_slice(&self_taught);
    let final_model = fit(final_kind, final_config, schema, &dx, &dy)?;
    Ok(SelfTrainOutput {
        labeling_model,
        final_model,
        self_taught,
    })
}

/// One-pass self-training for `dimension`.
///
/// A labeling SVM is fitted on `L`, every row of `U` receives its predicted
/// pole, and the final model of `final_kind` is fitted on `D′ = L ∪ U′`.
/// There is no iteration and no confidence threshold.
pub fn self_train(
    l: &LearningDataset,
    u: &LearningDataset,
    dimension: Dimension,
    labeling: &LabelingConfig,
    final_kind: ModelKind,
    final_config: &TrainConfig,
) -> Result<SelfTrainRun> {
    if l.feature_names != u.feature_names && !u.is_empty() {
        return Err(Error::SchemaMismatch {
            expected: l.width(),
            actual: u.width(),
        });
    }
    let labeled = l.restrict_to_labeled(dimension);
    let (lx, ly) = labeled.labeled_xy(dimension);
    let ux = u.features();
    let schema = Schema::new(l.feature_names.clone(), Some(dimension));
    let out = self_train_xy(&schema, &lx, &ly, &ux, labeling, final_kind, final_config)?;

    let mut d_prime = labeled.clone();
    d_prime.rows.extend(u.rows.iter().cloned());
    for (row, pole) in u.rows.iter().zip(&out.self_taught) {
        d_prime.set_label(&row.user_id, DimensionLabel::pole_only(dimension, *pole));
    }
    let mut provenance = alloc::vec![Provenance::OriginalLabel; labeled.len()];
    provenance.resize(d_prime.len(), Provenance::SelfTaughtLabel);
    let counts = RunCounts {
        labeled: labeled.len(),
        unlabeled: u.len(),
        combined: d_prime.len(),
    };
    Ok(SelfTrainRun {
        dimension,
        labeling_model: out.labeling_model,
        final_model: out.final_model,
        d_prime,
        provenance,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ProfileRow;
    use crate::rng::Rng;
    use alloc::format;
    use alloc::string::String;
    use alloc::vec;

    fn dataset(n: usize, seed: u64) -> LearningDataset {
        let mut rng = Rng::new(seed);
        let mut rows = Vec::new();
        let mut poles = Vec::new();
        for i in 0..n {
            let pole = if rng.uniform() < 0.5 { Pole::First } else { Pole::Second };
            let shift = if pole == Pole::First { 6.0 } else { 2.0 };
            rows.push(ProfileRow {
                user_id: format!("s{i:03}"),
                counts: vec![rng.poisson(shift), rng.poisson(4.0)],
            });
            poles.push(pole);
        }
        let mut ds = LearningDataset::new(vec![String::from("a"), String::from("b")], rows).unwrap();
        for (i, p) in poles.into_iter().enumerate() {
            ds.set_label(&format!("s{i:03}"), DimensionLabel::pole_only(Dimension::Input, p));
        }
        ds
    }

    #[test]
    fn combined_size_and_provenance() {
        let ds = dataset(100, 1);
        let l = ds.subset(&(0..20).collect::<Vec<_>>());
        let mut u = ds.subset(&(20..100).collect::<Vec<_>>());
        u.labels.clear();
        let run = self_train(
            &l,
            &u,
            Dimension::Input,
            &LabelingConfig::default(),
            ModelKind::TreeC45,
            &TrainConfig::default(),
        )
        .unwrap();
        assert_eq!(
            run.counts,
            RunCounts {
                labeled: 20,
                unlabeled: 80,
                combined: 100
            }
        );
        assert_eq!(
            run.provenance
                .iter()
                .filter(|p| **p == Provenance::SelfTaughtLabel)
                .count(),
            80
        );
        assert_eq!(run.d_prime.labeled_count(Dimension::Input), 100);
        run.d_prime.validate().unwrap();
    }

    #[test]
    fn empty_pool_equals_supervised_fit() {
        let ds = dataset(40, 2);
        let u = LearningDataset {
            feature_names: ds.feature_names.clone(),
            ..LearningDataset::default()
        };
        let cfg = TrainConfig::default().reseeded(5);
        let run = self_train(
            &ds,
            &u,
            Dimension::Input,
            &LabelingConfig::default(),
            ModelKind::RandomForest,
            &cfg,
        )
        .unwrap();
        let (x, y) = ds.labeled_xy(Dimension::Input);
        let schema = Schema::new(ds.feature_names.clone(), Some(Dimension::Input));
        let direct = fit(ModelKind::RandomForest, &cfg, &schema, &x, &y).unwrap();
        assert_eq!(run.final_model.predict(&x).unwrap(), direct.predict(&x).unwrap());
    }

    #[test]
    fn single_class_l_is_rejected() {
        let ds = dataset(30, 3);
        let firsts: Vec<usize> = (0..30)
            .filter(|&i| ds.label(Dimension::Input, &ds.rows[i].user_id).unwrap().pole == Pole::First)
            .collect();
        let l = ds.subset(&firsts);
        let err = self_train(
            &l,
            &ds,
            Dimension::Input,
            &LabelingConfig::default(),
            ModelKind::NaiveBayes,
            &TrainConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::SingleClass);
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let ds = dataset(30, 4);
        let mut u = ds.clone();
        u.feature_names.push("c".into());
        for r in &mut u.rows {
            r.counts.push(0);
        }
        let err = self_train(
            &ds,
            &u,
            Dimension::Input,
            &LabelingConfig::default(),
            ModelKind::NaiveBayes,
            &TrainConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::SchemaMismatch { .. }));
    }
}
