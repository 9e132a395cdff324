//! Under-sampling, labeled/unlabeled splits and cross-validation folds.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{LabelMap, LearningDataset, WithheldLabels};
use crate::rng::Rng;
use crate::style::{Dimension, Pole};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of labeled rows that keep their label, in `(0, 1]`.
    pub labeled_ratio: f64,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub stratified: bool,
}

fn default_true() -> bool {
    true
}

impl SplitSpec {
    pub fn new(labeled_ratio: f64, seed: u64) -> Self {
        Self {
            labeled_ratio,
            seed,
            stratified: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.labeled_ratio > 0.0 && self.labeled_ratio <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "labeled ratio {} outside (0, 1]",
                self.labeled_ratio
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index of every row.
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Round half to even of a non-negative real.
pub(crate) fn round_half_even(x: f64) -> usize {
    let floor = libm::floor(x);
    let diff = x - floor;
    let base = floor as usize;
    if diff > 0.5 || (diff == 0.5 && base % 2 == 1) {
        base + 1
    } else {
        base
    }
}

/// Indices (ascending) of a balanced subset of `labels`: every row of the
/// minority class plus a uniform random subset of the majority class of
/// the same size.
pub fn under_sample_indices(labels: &[Pole], seed: u64) -> Result<Vec<usize>> {
    let (first, second): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i] == Pole::First);
    if first.is_empty() || second.is_empty() {
        return Err(Error::SingleClass);
    }
    let (mut majority, minority) = if first.len() >= second.len() {
        (first, second)
    } else {
        (second, first)
    };
    let mut rng = Rng::new(seed);
    rng.shuffle(&mut majority);
    majority.truncate(minority.len());
    let mut keep = minority;
    keep.extend(majority);
    keep.sort_unstable();
    Ok(keep)
}

/// Random under-sampling of the labeled rows for `dimension`.
///
/// The result holds only labeled rows; both poles end up with the original
/// minority size.
pub fn under_sample(dataset: &LearningDataset, dimension: Dimension, seed: u64) -> Result<LearningDataset> {
    let labeled = dataset.restrict_to_labeled(dimension);
    let (_, y) = labeled.labeled_xy(dimension);
    let keep = under_sample_indices(&y, seed)?;
    Ok(labeled.subset(&keep))
}

/// Per-class quotas summing to `total`, apportioned by largest remainder.
/// Ties in remainder go to the earlier class.
fn apportion(class_sizes: &[usize], ratio: f64, total: usize) -> Vec<usize> {
    let exact: Vec<f64> = class_sizes.iter().map(|&c| ratio * c as f64).collect();
    let mut quotas: Vec<usize> = exact
        .iter()
        .zip(class_sizes)
        .map(|(&e, &c)| (libm::floor(e) as usize).min(c))
        .collect();
    let mut order: Vec<usize> = (0..class_sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - libm::floor(exact[a]);
        let rb = exact[b] - libm::floor(exact[b]);
        rb.partial_cmp(&ra)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut assigned: usize = quotas.iter().sum();
    while assigned < total {
        let mut progressed = false;
        for &c in &order {
            if assigned < total && quotas[c] < class_sizes[c] {
                quotas[c] += 1;
                assigned += 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    while assigned > total {
        for &c in order.iter().rev() {
            if assigned > total && quotas[c] > 0 {
                quotas[c] -= 1;
                assigned -= 1;
            }
        }
    }
    quotas
}

/// Which of the labeled rows (given by their poles) keep their label.
/// Returned indices are ascending positions into `labels`.
pub fn choose_labeled(labels: &[Pole], spec: &SplitSpec) -> Result<Vec<usize>> {
    spec.validate()?;
    let n = labels.len();
    let total = round_half_even(spec.labeled_ratio * n as f64).min(n);
    if total == 0 {
        return Err(Error::EmptyLabeledSet {
            labeled: n,
            ratio: spec.labeled_ratio,
        });
    }
    let mut rng = Rng::new(spec.seed);
    let mut chosen = Vec::with_capacity(total);
    if spec.stratified {
        let classes = [Pole::First, Pole::Second];
        let members: Vec<Vec<usize>> = classes
            .iter()
            .map(|&p| (0..n).filter(|&i| labels[i] == p).collect())
            .collect();
        let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
        let quotas = apportion(&sizes, spec.labeled_ratio, total);
        for (mut m, q) in members.into_iter().zip(quotas) {
            rng.shuffle(&mut m);
            chosen.extend_from_slice(&m[..q]);
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut all);
        chosen.extend_from_slice(&all[..total]);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Splits `dataset` for `dimension` into a labeled set `L` and an unlabeled
/// pool `U`.
///
/// `L` keeps `round(r * labeled_count)` labeled rows (half to even). `U`
/// holds every other row with no label for `dimension`; the labels removed
/// from rows moved into `U` are returned separately.
pub fn split_labeled_unlabeled(
    dataset: &LearningDataset,
    dimension: Dimension,
    spec: &SplitSpec,
) -> Result<(LearningDataset, LearningDataset, WithheldLabels)> {
    let labeled = dataset.labeled_indices(dimension);
    if labeled.is_empty() {
        return Err(Error::EmptyInput("no labeled rows for the dimension"));
    }
    let poles: Vec<Pole> = labeled
        .iter()
        .map(|&i| {
            dataset
                .label(dimension, &dataset.rows[i].user_id)
                .expect("labeled")
                .pole
        })
        .collect();
    let keep: Vec<usize> = choose_labeled(&poles, spec)?.into_iter().map(|p| labeled[p]).collect();
    let mut in_l = alloc::vec![false; dataset.len()];
    for &i in &keep {
        in_l[i] = true;
    }
    let u_idx: Vec<usize> = (0..dataset.len()).filter(|&i| !in_l[i]).collect();

    let mut l = dataset.subset(&keep);
    l.labels.retain(|d, _| *d == dimension);
    let mut u = dataset.subset(&u_idx);
    let hidden: LabelMap = u.labels.remove(&dimension).unwrap_or_default();
    u.labels.clear();
    Ok((
        l,
        u,
        WithheldLabels {
            dimension,
            labels: hidden,
        },
    ))
}

/// Assigns `n_rows` rows to `k` folds. With `labels`, each class is dealt
/// round-robin so every fold gets its share of both poles.
pub fn make_folds(n_rows: usize, k: usize, labels: Option<&[Pole]>, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n_rows {
        return Err(Error::BadFoldCount { k, n: n_rows });
    }
    if let Some(l) = labels {
        if l.len() != n_rows {
            return Err(Error::LengthMismatch {
                left: n_rows,
                right: l.len(),
            });
        }
    }
    let mut rng = Rng::new(seed);
    let order: Vec<usize> = match labels {
        None => {
            let mut all: Vec<usize> = (0..n_rows).collect();
            rng.shuffle(&mut all);
            all
        }
        Some(labels) => {
            let mut groups: BTreeMap<Pole, Vec<usize>> = BTreeMap::new();
            for (i, &p) in labels.iter().enumerate() {
                groups.entry(p).or_default().push(i);
            }
            let mut order = Vec::with_capacity(n_rows);
            for (_, mut members) in groups {
                rng.shuffle(&mut members);
                order.extend(members);
            }
            order
        }
    };
    let mut assignments = alloc::vec![0; n_rows];
    for (pos, &row) in order.iter().enumerate() {
        assignments[row] = pos % k;
    }
    Ok(FoldPlan { k, assignments })
}
