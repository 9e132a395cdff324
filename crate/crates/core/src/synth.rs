//! Synthetic learner datasets with known poles.
//!
//! Every student gets a pole for one dimension and independent Poisson
//! counts per feature at that pole's rate. Separation scales the
//! difference between the two rate vectors around their midpoint:
//! `0` makes the poles indistinguishable, `1` uses the rates as given.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{LabelMap, LearningDataset, ProfileRow, WithheldLabels};
use crate::rng::{derive_seed, Rng};
use crate::style::{Dimension, DimensionLabel, Pole};
use crate::{Error, Result};

/// Lowest effective rate after applying the separation.
pub const MIN_RATE: f64 = 1e-3;

/// Draws used by [`bayes_rate`].
pub const BAYES_DRAWS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_students: usize,
    pub feature_names: Vec<String>,
    /// Expected count per feature for first-pole students.
    pub rates_first: Vec<f64>,
    /// Expected count per feature for second-pole students.
    pub rates_second: Vec<f64>,
    pub separation: f64,
    /// Probability that a student has the first pole.
    pub class_balance: f64,
    /// Fraction of rows whose label is visible in the dataset.
    pub labeled_fraction: f64,
    pub dimension: Dimension,
    pub seed: u64,
}

impl Default for SynthSpec {
    /// Eight learning-object counts for the Input dimension: visual
    /// learners watch more video, verbal learners read more.
    fn default() -> Self {
        let names = [
            "course_reviews",
            "reading_list",
            "abstract_materials",
            "concrete_materials",
            "visual_materials",
            "full_assessment",
            "exercise_submit",
            "quiz_submitted",
        ];
        Self {
            n_students: 1000,
            feature_names: names.iter().map(|s| String::from(*s)).collect(),
            rates_first: alloc::vec![12.0, 3.0, 4.0, 6.0, 14.0, 5.0, 7.0, 8.0],
            rates_second: alloc::vec![11.0, 8.0, 7.0, 5.0, 6.0, 5.0, 7.0, 8.0],
            separation: 0.7,
            class_balance: 0.5,
            labeled_fraction: 1.0,
            dimension: Dimension::Input,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_students == 0 {
            return bad("n_students must be positive".into());
        }
        let d = self.feature_names.len();
        if d == 0 {
            return bad("at least one feature is required".into());
        }
        if self.rates_first.len() != d || self.rates_second.len() != d {
            return bad(format!(
                "rate vectors must have {d} entries, got {} and {}",
                self.rates_first.len(),
                self.rates_second.len()
            ));
        }
        if self
            .rates_first
            .iter()
            .chain(&self.rates_second)
            .any(|r| !(r.is_finite() && *r > 0.0))
        {
            return bad("rates must be positive and finite".into());
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return bad(format!(
                "separation must be a non-negative number, got {}",
                self.separation
            ));
        }
        if !(self.class_balance > 0.0 && self.class_balance < 1.0) {
            return bad(format!("class_balance must be in (0, 1), got {}", self.class_balance));
        }
        if !(self.labeled_fraction > 0.0 && self.labeled_fraction <= 1.0) {
            return bad(format!(
                "labeled_fraction must be in (0, 1], got {}",
                self.labeled_fraction
            ));
        }
        Ok(())
    }

    /// Per-feature rates for `pole` after applying the separation.
    pub fn effective_rates(&self, pole: Pole) -> Vec<f64> {
        self.rates_first
            .iter()
            .zip(&self.rates_second)
            .map(|(&a, &b)| {
                let mid = 0.5 * (a + b);
                let r = if pole == Pole::First { a } else { b };
                (mid + self.separation * (r - mid)).max(MIN_RATE)
            })
            .collect()
    }
}

/// A generated dataset and the pole of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub dataset: LearningDataset,
    pub truth: WithheldLabels,
}

pub fn generate(spec: &SynthSpec) -> Result<Generated> {
    spec.validate()?;
    let rates = [spec.effective_rates(Pole::First), spec.effective_rates(Pole::Second)];
    let mut rng = Rng::new(derive_seed(spec.seed, 0));
    let width = digits(spec.n_students.max(2) - 1);
    let mut rows = Vec::with_capacity(spec.n_students);
    let mut poles = Vec::with_capacity(spec.n_students);
    for i in 0..spec.n_students {
        let pole = if rng.uniform() < spec.class_balance {
            Pole::First
        } else {
            Pole::Second
        };
        let r = &rates[(pole == Pole::Second) as usize];
        rows.push(ProfileRow {
            user_id: format!("s{i:0width$}"),
            counts: r.iter().map(|&rate| rng.poisson(rate)).collect(),
        });
        poles.push(pole);
    }
    let n_visible =
        (crate::sampling::round_half_even(spec.labeled_fraction * spec.n_students as f64)).clamp(1, spec.n_students);
    let mut order: Vec<usize> = (0..spec.n_students).collect();
    Rng::new(derive_seed(spec.seed, 1)).shuffle(&mut order);
    let mut visible = alloc::vec![false; spec.n_students];
    for &i in &order[..n_visible] {
        visible[i] = true;
    }

    let mut dataset = LearningDataset::new(spec.feature_names.clone(), rows)?;
    let mut truth = LabelMap::new();
    for i in 0..spec.n_students {
        let label = DimensionLabel::pole_only(spec.dimension, poles[i]);
        let id = dataset.rows[i].user_id.clone();
        if visible[i] {
            dataset.set_label(&id, label);
        }
        truth.insert(id, label);
    }
    Ok(Generated {
        dataset,
        truth: WithheldLabels {
            dimension: spec.dimension,
            labels: truth,
        },
    })
}

fn digits(mut n: usize) -> usize {
    let mut w = 1;
    while n >= 10 {
        n /= 10;
        w += 1;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesEstimate {
    pub rate: f64,
    pub std_error: f64,
    pub draws: usize,
}

/// Monte Carlo estimate of the Bayes-optimal accuracy under `spec`'s
/// generating distribution, with [`BAYES_DRAWS`] draws.
pub fn bayes_rate(spec: &SynthSpec) -> Result<BayesEstimate> {
    bayes_rate_with(spec, BAYES_DRAWS, derive_seed(spec.seed, 2))
}

/// As [`bayes_rate`] with an explicit draw count and random stream.
pub fn bayes_rate_with(spec: &SynthSpec, draws: usize, seed: u64) -> Result<BayesEstimate> {
    spec.validate()?;
    if draws == 0 {
        return Err(Error::InvalidConfig("draws must be positive".into()));
    }
    let rf = spec.effective_rates(Pole::First);
    let rs = spec.effective_rates(Pole::Second);
    let log_ratio: Vec<f64> = rf.iter().zip(&rs).map(|(a, b)| libm::log(a / b)).collect();
    let offset =
        libm::log(spec.class_balance / (1.0 - spec.class_balance)) - rf.iter().sum::<f64>() + rs.iter().sum::<f64>();
    let mut rng = Rng::new(seed);
    let mut correct = 0usize;
    for _ in 0..draws {
        let pole = if rng.uniform() < spec.class_balance {
            Pole::First
        } else {
            Pole::Second
        };
        let rates = if pole == Pole::First { &rf } else { &rs };
        let mut score = offset;
        for (rate, lr) in rates.iter().zip(&log_ratio) {
            score += rng.poisson(*rate) as f64 * lr;
        }
        if Pole::from_score(score) == pole {
            correct += 1;
        }
    }
    let p = correct as f64 / draws as f64;
    Ok(BayesEstimate {
        rate: p,
        std_error: libm::sqrt(p * (1.0 - p) / draws as f64),
        draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthSpec {
        SynthSpec {
            n_students: 200,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn deterministic_and_valid() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a, b);
        a.dataset.validate().unwrap();
        assert_eq!(a.truth.labels.len(), 200);
        assert_eq!(a.dataset.labeled_count(Dimension::Input), 200);
        assert_eq!(a.dataset.rows[0].user_id, "s000");
    }

    #[test]
    fn labeled_fraction_hides_rows() {
        let spec = SynthSpec {
            labeled_fraction: 0.25,
            ..small()
        };
        let g = generate(&spec).unwrap();
        assert_eq!(g.dataset.labeled_count(Dimension::Input), 50);
        for row in &g.dataset.rows {
            if let Some(l) = g.dataset.label(Dimension::Input, &row.user_id) {
                assert_eq!(Some(l.pole), g.truth.pole_of(&row.user_id));
            }
        }
    }

    #[test]
    fn class_balance_drives_minority_count() {
        let spec = SynthSpec {
            class_balance: 0.3,
            ..small()
        };
        let g = generate(&spec).unwrap();
        let first = g.truth.labels.values().filter(|l| l.pole == Pole::First).count();
        // 60 expected, binomial sd ~6.5
        assert!((35..=85).contains(&first), "{first}");
    }

    #[test]
    fn no_separation_gives_majority_rate() {
        let spec = SynthSpec {
            separation: 0.0,
            class_balance: 0.7,
            ..small()
        };
        let est = bayes_rate(&spec).unwrap();
        assert_eq!(est.draws, BAYES_DRAWS);
        assert!((est.rate - 0.7).abs() <= 2.0 * est.std_error + 1e-12, "{est:?}");
    }

    #[test]
    fn large_separation_approaches_one() {
        let spec = SynthSpec {
            separation: 5.0,
            ..small()
        };
        assert!(bayes_rate_with(&spec, 20_000, 1).unwrap().rate > 0.999);
    }

    #[test]
    fn two_streams_agree() {
        let spec = small();
        let a = bayes_rate_with(&spec, BAYES_DRAWS, 10).unwrap();
        let b = bayes_rate_with(&spec, BAYES_DRAWS, 11).unwrap();
        let se = libm::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
        assert!((a.rate - b.rate).abs() <= 3.0 * se);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        for spec in [
            SynthSpec {
                class_balance: 1.0,
                ..small()
            },
            SynthSpec {
                labeled_fraction: 0.0,
                ..small()
            },
            SynthSpec {
                rates_first: alloc::vec![1.0],
                ..small()
            },
            SynthSpec {
                separation: -1.0,
                ..small()
            },
        ] {
            assert!(matches!(spec.validate(), Err(Error::InvalidConfig(_))));
        }
    }
}
