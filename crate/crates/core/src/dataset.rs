//! The learning dataset: count vectors plus partial per-dimension labels.
//!
//! Rows without a label for a dimension are that dimension's unlabeled
//! pool; rows with one are its labeled pool. Each dimension partitions the
//! rows independently.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::features::StudentProfile;
use crate::style::{Dimension, DimensionLabel, Pole};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub user_id: String,
    pub counts: Vec<u64>,
}

impl ProfileRow {
    pub fn features(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

pub type LabelMap = BTreeMap<String, DimensionLabel>;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LearningDataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<ProfileRow>,
    #[serde(default)]
    pub labels: BTreeMap<Dimension, LabelMap>,
}

/// Labels held back from a split. Only evaluation code should look at them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WithheldLabels {
    pub dimension: Dimension,
    pub labels: LabelMap,
}

impl WithheldLabels {
    pub fn pole_of(&self, user_id: &str) -> Option<Pole> {
        self.labels.get(user_id).map(|l| l.pole)
    }

    /// Puts the withheld labels back onto `dataset`.
    pub fn reattach(&self, dataset: &LearningDataset) -> LearningDataset {
        let mut out = dataset.clone();
        let map = out.labels.entry(self.dimension).or_default();
        for (user, label) in &self.labels {
            map.insert(user.clone(), *label);
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssembleReport {
    /// Label entries whose user has no profile.
    pub rejected_user_ids: Vec<String>,
}

impl LearningDataset {
    pub fn new(feature_names: Vec<String>, rows: Vec<ProfileRow>) -> Result<Self> {
        let ds = Self {
            feature_names,
            rows,
            labels: BTreeMap::new(),
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let width = self.feature_names.len();
        let mut seen = BTreeSet::new();
        for row in &self.rows {
            if row.counts.len() != width {
                return Err(Error::SchemaMismatch {
                    expected: width,
                    actual: row.counts.len(),
                });
            }
            if !seen.insert(row.user_id.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate user id `{}`", row.user_id)));
            }
        }
        for (dim, map) in &self.labels {
            for (user, label) in map {
                if !seen.contains(user.as_str()) {
                    return Err(Error::InvalidConfig(format!("{dim} label for unknown user `{user}`")));
                }
                if label.dimension != *dim {
                    return Err(Error::InvalidConfig(format!(
                        "label for `{user}` filed under {dim} but tagged {}",
                        label.dimension
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn label(&self, dimension: Dimension, user_id: &str) -> Option<&DimensionLabel> {
        self.labels.get(&dimension).and_then(|m| m.get(user_id))
    }

    pub fn set_label(&mut self, user_id: &str, label: DimensionLabel) {
        self.labels
            .entry(label.dimension)
            .or_default()
            .insert(user_id.into(), label);
    }

    /// Indices of rows labeled for `dimension`, in row order.
    pub fn labeled_indices(&self, dimension: Dimension) -> Vec<usize> {
        self.indices_where(dimension, true)
    }

    /// Indices of rows without a label for `dimension`, in row order.
    pub fn unlabeled_indices(&self, dimension: Dimension) -> Vec<usize> {
        self.indices_where(dimension, false)
    }

    fn indices_where(&self, dimension: Dimension, labeled: bool) -> Vec<usize> {
        let map = self.labels.get(&dimension);
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| map.is_some_and(|m| m.contains_key(&r.user_id)) == labeled)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn labeled_count(&self, dimension: Dimension) -> usize {
        self.labeled_indices(dimension).len()
    }

    /// Feature vectors and poles of the labeled rows, in row order.
    pub fn labeled_xy(&self, dimension: Dimension) -> (Vec<Vec<f64>>, Vec<Pole>) {
        let idx = self.labeled_indices(dimension);
        let x = idx.iter().map(|&i| self.rows[i].features()).collect();
        let y = idx
            .iter()
            .map(|&i| self.label(dimension, &self.rows[i].user_id).expect("labeled").pole)
            .collect();
        (x, y)
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(ProfileRow::features).collect()
    }

    /// The rows at `indices` (in that order) with their labels.
    pub fn subset(&self, indices: &[usize]) -> LearningDataset {
        let rows: Vec<ProfileRow> = indices.iter().map(|&i| self.rows[i].clone()).collect();
        let mut labels = BTreeMap::new();
        for (dim, map) in &self.labels {
            let kept: LabelMap = rows
                .iter()
                .filter_map(|r| map.get(&r.user_id).map(|l| (r.user_id.clone(), *l)))
                .collect();
            if !kept.is_empty() {
                labels.insert(*dim, kept);
            }
        }
        LearningDataset {
            feature_names: self.feature_names.clone(),
            rows,
            labels,
        }
    }

    /// Only the rows labeled for `dimension`, keeping only that dimension's labels.
    pub fn restrict_to_labeled(&self, dimension: Dimension) -> LearningDataset {
        let mut out = self.subset(&self.labeled_indices(dimension));
        out.labels.retain(|d, _| *d == dimension);
        out
    }

    /// Class sizes `(first, second)` among labeled rows.
    pub fn class_counts(&self, dimension: Dimension) -> (usize, usize) {
        let map = match self.labels.get(&dimension) {
            Some(m) => m,
            None => return (0, 0),
        };
        let first = map.values().filter(|l| l.pole == Pole::First).count();
        (first, map.len() - first)
    }
}

/// Builds a dataset from profiles and per-student labels.
///
/// Labels naming a user without a profile are skipped and listed in the
/// report.
pub fn assemble_dataset(
    feature_names: Vec<String>,
    profiles: &[StudentProfile],
    labels: &[(String, Vec<DimensionLabel>)],
) -> Result<(LearningDataset, AssembleReport)> {
    let rows = profiles
        .iter()
        .map(|p| ProfileRow {
            user_id: p.user_id.clone(),
            counts: p.counts.clone(),
        })
        .collect();
    let mut dataset = LearningDataset::new(feature_names, rows)?;
    let known: BTreeSet<String> = dataset.rows.iter().map(|r| r.user_id.clone()).collect();
    let mut report = AssembleReport::default();
    for (user, user_labels) in labels {
        if !known.contains(user) {
            report.rejected_user_ids.push(user.clone());
            continue;
        }
        for label in user_labels {
            dataset.set_label(user, *label);
        }
    }
    Ok((dataset, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::style::label_from_score;
    use alloc::vec;

    fn profiles(n: usize) -> Vec<StudentProfile> {
        (0..n)
            .map(|i| StudentProfile {
                user_id: format!("u{i}"),
                counts: vec![i as u64, 1],
                unmapped_events: 0,
            })
            .collect()
    }

    fn names() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn partition_per_dimension() {
        let labels: Vec<_> = (0..4)
            .map(|i| {
                (
                    format!("u{i}"),
                    vec![label_from_score(Dimension::Processing, 3).unwrap()],
                )
            })
            .collect();
        let (ds, report) = assemble_dataset(names(), &profiles(10), &labels).unwrap();
        assert!(report.rejected_user_ids.is_empty());
        assert_eq!(ds.labeled_count(Dimension::Processing), 4);
        assert_eq!(ds.unlabeled_indices(Dimension::Processing).len(), 6);
        assert_eq!(ds.labeled_count(Dimension::Input), 0);
    }

    #[test]
    fn zero_labels_is_legal() {
        let (ds, _) = assemble_dataset(names(), &profiles(3), &[]).unwrap();
        assert_eq!(ds.unlabeled_indices(Dimension::Input), vec![0, 1, 2]);
    }

    #[test]
    fn unknown_user_is_rejected_not_fatal() {
        let labels = vec![
            ("X".into(), vec![label_from_score(Dimension::Input, 1).unwrap()]),
            ("u1".into(), vec![label_from_score(Dimension::Input, -1).unwrap()]),
        ];
        let (ds, report) = assemble_dataset(names(), &profiles(3), &labels).unwrap();
        assert_eq!(report.rejected_user_ids, vec![String::from("X")]);
        assert_eq!(ds.labeled_count(Dimension::Input), 1);
        ds.validate().unwrap();
    }

    #[test]
    fn duplicate_users_fail_validation() {
        let mut p = profiles(2);
        p[1].user_id = "u0".into();
        assert!(assemble_dataset(names(), &p, &[]).is_err());
    }

    #[test]
    fn subset_keeps_matching_labels() {
        let labels = vec![("u2".into(), vec![label_from_score(Dimension::Input, 5).unwrap()])];
        let (ds, _) = assemble_dataset(names(), &profiles(4), &labels).unwrap();
        let sub = ds.subset(&[2, 0]);
        assert_eq!(sub.rows[0].user_id, "u2");
        assert_eq!(sub.labeled_count(Dimension::Input), 1);
        let sub = ds.subset(&[0, 1]);
        assert!(sub.labels.is_empty());
    }
}
