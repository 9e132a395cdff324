//! Binary decision tree on numeric thresholds, split by gain ratio.
//!
//! Candidate thresholds are midpoints between consecutive distinct values.
//! Among candidates whose information gain is positive and at least the
//! average gain, the one with the highest gain ratio wins; ties keep the
//! earliest feature and the lowest threshold. A node whose candidates all
//! have zero gain is still split (at the best gain ratio) so that any
//! consistent training set is fitted exactly when depth is unbounded.
//! There is no pruning.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::style::Pole;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    /// Minimum rows on each side of a split.
    pub min_leaf: usize,
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            min_leaf: 1,
            max_depth: None,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(Error::InvalidConfig("tree min_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        first: usize,
        second: usize,
    },
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Nodes in an arena; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    fn leaf_for(&self, x: &[f64]) -> (usize, usize) {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { first, second } => return (first, second),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Leaf class balance `(first − second) / size`, in `[-1, 1]`.
    pub fn score(&self, x: &[f64]) -> f64 {
        let (first, second) = self.leaf_for(x);
        (first as f64 - second as f64) / (first + second).max(1) as f64
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
            }
        }
        walk(self, 0)
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }
}

fn entropy(first: usize, second: usize) -> f64 {
    let n = (first + second) as f64;
    let mut h = 0.0;
    for c in [first, second] {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * libm::log2(p);
        }
    }
    h
}

/// Information gain and gain ratio of splitting `(first, second)` into a
/// left part `(lf, ls)` and the remainder.
pub fn gain_and_ratio(first: usize, second: usize, lf: usize, ls: usize) -> (f64, f64) {
    let n = (first + second) as f64;
    let (rf, rs) = (first - lf, second - ls);
    let nl = (lf + ls) as f64;
    let nr = (rf + rs) as f64;
    let gain = entropy(first, second) - (nl / n) * entropy(lf, ls) - (nr / n) * entropy(rf, rs);
    let split_info = entropy(lf + ls, rf + rs);
    let ratio = if split_info > 0.0 { gain / split_info } else { 0.0 };
    (gain, ratio)
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    ratio: f64,
}

/// Chooses `per_split` distinct features (ascending) or all of them.
pub(crate) struct FeatureSampler<'r> {
    pub per_split: usize,
    pub rng: &'r mut Rng,
}

pub(crate) struct Builder<'a, 'r> {
    x: &'a [Vec<f64>],
    y: &'a [Pole],
    config: &'a TreeConfig,
    sampler: Option<FeatureSampler<'r>>,
    nodes: Vec<Node>,
}

impl<'a, 'r> Builder<'a, 'r> {
    pub(crate) fn new(
        x: &'a [Vec<f64>],
        y: &'a [Pole],
        config: &'a TreeConfig,
        sampler: Option<FeatureSampler<'r>>,
    ) -> Self {
        Self {
            x,
            y,
            config,
            sampler,
            nodes: Vec::new(),
        }
    }

    pub(crate) fn build(mut self, rows: Vec<usize>) -> Tree {
        self.grow(rows, 0);
        Tree { nodes: self.nodes }
    }

    fn features(&mut self) -> Vec<usize> {
        let d = self.x.first().map_or(0, Vec::len);
        match &mut self.sampler {
            Some(s) if s.per_split < d => {
                let mut all: Vec<usize> = (0..d).collect();
                // partial Fisher–Yates from the front
                for i in 0..s.per_split {
                    let j = i + s.rng.below(d - i);
                    all.swap(i, j);
                }
                all.truncate(s.per_split);
                all.sort_unstable();
                all
            }
            _ => (0..d).collect(),
        }
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let first = rows.iter().filter(|&&i| self.y[i] == Pole::First).count();
        let second = rows.len() - first;
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { first, second });
        let depth_ok = self.config.max_depth.is_none_or(|m| depth < m);
        if first == 0 || second == 0 || !depth_ok || rows.len() < 2 * self.config.min_leaf {
            return at;
        }
        let features = self.features();
        let Some((feature, threshold)) = self.best_split(&rows, &features, first, second) else {
            return at;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| self.x[i][feature] <= threshold);
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left: l,
            right: r,
        };
        at
    }

    fn best_split(&self, rows: &[usize], features: &[usize], first: usize, second: usize) -> Option<(usize, f64)> {
        let min_leaf = self.config.min_leaf;
        let n = rows.len();
        let mut candidates = Vec::new();
        let mut sorted: Vec<(f64, Pole)> = Vec::with_capacity(n);
        for &f in features {
            sorted.clear();
            sorted.extend(rows.iter().map(|&i| (self.x[i][f], self.y[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (mut lf, mut ls) = (0usize, 0usize);
            for k in 0..n - 1 {
                match sorted[k].1 {
                    Pole::First => lf += 1,
                    Pole::Second => ls += 1,
                }
                let (lo, hi) = (sorted[k].0, sorted[k + 1].0);
                if lo == hi || k + 1 < min_leaf || n - k - 1 < min_leaf {
                    continue;
                }
                let (gain, ratio) = gain_and_ratio(first, second, lf, ls);
                candidates.push(Candidate {
                    feature: f,
                    threshold: lo + (hi - lo) / 2.0,
                    gain,
                    ratio,
                });
            }
        }
        if candidates.is_empty() {
            return None;
        }
        const EPS: f64 = 1e-12;
        let positive: Vec<&Candidate> = candidates.iter().filter(|c| c.gain > EPS).collect();
        let pool: Vec<&Candidate> = if positive.is_empty() {
            candidates.iter().collect()
        } else {
            let avg = positive.iter().map(|c| c.gain).sum::<f64>() / positive.len() as f64;
            positive.into_iter().filter(|c| c.gain >= avg - EPS).collect()
        };
        let mut best = pool[0];
        for c in &pool[1..] {
            if c.ratio > best.ratio + EPS {
                best = c;
            }
        }
        Some((best.feature, best.threshold))
    }
}

pub fn fit(x: &[Vec<f64>], y: &[Pole], config: &TreeConfig) -> Tree {
    Builder::new(x, y, config, None).build((0..x.len()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    use crate::learners::training_accuracy;
    use crate::learners::{fit as fit_model, ModelKind, Schema, TrainConfig};

    #[test]
    fn pure_input_is_one_leaf() {
        let x = vec![vec![1.0], vec![5.0], vec![3.0]];
        let y = vec![Pole::Second; 3];
        let t = fit(&x, &y, &TreeConfig::default());
        assert_eq!(t.nodes, vec![Node::Leaf { first: 0, second: 3 }]);
        assert!(t.score(&[100.0]) < 0.0);
    }

    #[test]
    fn four_rows_root_threshold_and_gain_ratio() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let y = vec![Pole::First, Pole::First, Pole::Second, Pole::Second];
        let t = fit(&x, &y, &TreeConfig::default());
        match *t.root() {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert!(threshold > 2.0 && threshold < 3.0);
            }
            ref other => panic!("{other:?}"),
        }
        let (gain, ratio) = gain_and_ratio(2, 2, 2, 0);
        assert_abs_diff_eq!(gain, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ratio, 1.0, epsilon = 1e-15);
        // the off-centre thresholds: gain 1 - 0.75 H(1/3), split info H(1/4)
        let (g, r) = gain_and_ratio(2, 2, 1, 0);
        assert_abs_diff_eq!(g, 0.31127812445913283, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 0.3836885465963443, epsilon = 1e-12);
    }

    #[test]
    fn separable_feature_is_chosen_at_root() {
        // feature 1 is noise, feature 0 separates at 10
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![if i < 10 { i as f64 } else { 20.0 + i as f64 }, ((i * 7) % 5) as f64])
            .collect();
        let y: Vec<Pole> = (0..20)
            .map(|i| if i < 10 { Pole::First } else { Pole::Second })
            .collect();
        let t = fit(&x, &y, &TreeConfig::default());
        assert!(matches!(*t.root(), Node::Split { feature: 0, .. }));
        let m = fit_model(
            ModelKind::TreeC45,
            &TrainConfig::default(),
            &Schema::anonymous(2),
            &x,
            &y,
        )
        .unwrap();
        assert_eq!(training_accuracy(&m, &x, &y).unwrap(), 1.0);
    }

    #[test]
    fn xor_is_fitted_despite_zero_root_gain() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = vec![Pole::First, Pole::First, Pole::Second, Pole::Second];
        let t = fit(&x, &y, &TreeConfig::default());
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(Pole::from_score(t.score(xi)), *yi);
        }
    }

    #[test]
    fn depth_and_leaf_limits() {
        let x: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        let y: Vec<Pole> = (0..16)
            .map(|i| if (i / 2) % 2 == 0 { Pole::First } else { Pole::Second })
            .collect();
        let t = fit(
            &x,
            &y,
            &TreeConfig {
                min_leaf: 1,
                max_depth: Some(2),
            },
        );
        assert!(t.depth() <= 2);
        let t = fit(
            &x,
            &y,
            &TreeConfig {
                min_leaf: 8,
                max_depth: None,
            },
        );
        assert!(t.depth() <= 1);
        let t = fit(&x, &y, &TreeConfig::default());
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(Pole::from_score(t.score(xi)), *yi);
        }
    }

    #[test]
    fn tied_leaf_goes_to_first_pole() {
        // identical vectors with conflicting labels cannot be split
        let x = vec![vec![1.0], vec![1.0]];
        let y = vec![Pole::Second, Pole::First];
        let t = fit(&x, &y, &TreeConfig::default());
        assert_eq!(t.score(&[1.0]), 0.0);
        assert_eq!(Pole::from_score(t.score(&[1.0])), Pole::First);
    }
}
