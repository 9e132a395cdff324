//! Random forest of gain-ratio trees.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tree::{Builder, FeatureSampler, Tree, TreeConfig};
use crate::rng::{derive_seed, Rng};
use crate::style::Pole;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub bootstrap: bool,
    /// Features tried at each split; `None` means `ceil(sqrt(d))`.
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 50,
            bootstrap: true,
            features_per_split: None,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig("forest needs at least one tree".into()));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::InvalidConfig("features_per_split must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Vote margin `(first votes − second votes) / trees`.
    pub fn score(&self, x: &[f64]) -> f64 {
        let first = self
            .trees
            .iter()
            .filter(|t| Pole::from_score(t.score(x)) == Pole::First)
            .count();
        let second = self.trees.len() - first;
        (first as f64 - second as f64) / self.trees.len() as f64
    }
}

fn ceil_sqrt(d: usize) -> usize {
    let mut r = libm::sqrt(d as f64) as usize;
    while r * r < d {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= d {
        r -= 1;
    }
    r.max(1)
}

/// Tree `t` uses its own generator seeded with `derive_seed(seed, t)`:
/// first the bootstrap draws, then the per-node feature draws.
pub fn fit(x: &[Vec<f64>], y: &[Pole], config: &ForestConfig, tree: &TreeConfig) -> Result<Forest> {
    config.validate()?;
    tree.validate()?;
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    let per_split = config.features_per_split.unwrap_or_else(|| ceil_sqrt(d)).min(d.max(1));
    let trees = (0..config.n_trees)
        .map(|t| {
            let mut rng = Rng::new(derive_seed(config.seed, t as u64));
            let rows: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.below(n)).collect()
            } else {
                (0..n).collect()
            };
            let sampler = FeatureSampler {
                per_split,
                rng: &mut rng,
            };
            Builder::new(x, y, tree, Some(sampler)).build(rows)
        })
        .collect();
    Ok(Forest { trees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::tree;
    use alloc::vec;

    #[test]
    fn ceil_sqrt_values() {
        assert_eq!(ceil_sqrt(1), 1);
        assert_eq!(ceil_sqrt(4), 2);
        assert_eq!(ceil_sqrt(5), 3);
        assert_eq!(ceil_sqrt(12), 4);
        assert_eq!(ceil_sqrt(16), 4);
    }

    #[test]
    fn single_tree_without_bootstrap_equals_plain_tree() {
        let (x, y) = crate::learners::testdata::blobs(30, 8);
        let cfg = ForestConfig {
            n_trees: 1,
            bootstrap: false,
            features_per_split: Some(2),
            seed: 4,
        };
        let forest = fit(&x, &y, &cfg, &TreeConfig::default()).unwrap();
        let plain = tree::fit(&x, &y, &TreeConfig::default());
        assert_eq!(forest.trees[0], plain);
        for row in &x {
            assert_eq!(Pole::from_score(forest.score(row)), Pole::from_score(plain.score(row)));
        }
    }

    #[test]
    fn even_split_vote_goes_to_first_pole() {
        let leaf = |first, second| Tree {
            nodes: vec![tree::Node::Leaf { first, second }],
        };
        let f = Forest {
            trees: vec![leaf(1, 0), leaf(0, 1)],
        };
        assert_eq!(f.score(&[0.0]), 0.0);
        assert_eq!(Pole::from_score(f.score(&[0.0])), Pole::First);
    }

    #[test]
    fn separable_data_with_25_trees() {
        let (x, y) = crate::learners::testdata::blobs(50, 9);
        let cfg = ForestConfig {
            n_trees: 25,
            ..ForestConfig::default()
        };
        let f = fit(&x, &y, &cfg, &TreeConfig::default()).unwrap();
        for (row, p) in x.iter().zip(&y) {
            assert_eq!(Pole::from_score(f.score(row)), *p);
        }
    }

    #[test]
    fn same_seed_same_forest() {
        let (x, y) = crate::learners::testdata::blobs(30, 10);
        let cfg = ForestConfig::default();
        assert_eq!(
            fit(&x, &y, &cfg, &TreeConfig::default()).unwrap(),
            fit(&x, &y, &cfg, &TreeConfig::default()).unwrap()
        );
    }
}
