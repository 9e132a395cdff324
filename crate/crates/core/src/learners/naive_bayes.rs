//! Gaussian naive Bayes.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::style::Pole;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbConfig {
    /// Floor on every per-class feature variance.
    pub var_floor: f64,
}

impl Default for NbConfig {
    fn default() -> Self {
        Self { var_floor: 1e-9 }
    }
}

impl NbConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.var_floor > 0.0) {
            return Err(Error::InvalidConfig(
                "naive Bayes variance floor must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub log_prior: f64,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl ClassStats {
    pub fn log_joint(&self, x: &[f64]) -> f64 {
        let ln_2pi = libm::log(2.0 * core::f64::consts::PI);
        self.log_prior
            + x.iter()
                .zip(self.mean.iter().zip(&self.variance))
                .map(|(v, (m, var))| -0.5 * (ln_2pi + libm::log(*var)) - (v - m) * (v - m) / (2.0 * var))
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub first: ClassStats,
    pub second: ClassStats,
}

impl NbModel {
    /// Log-posterior difference, first pole minus second.
    pub fn score(&self, x: &[f64]) -> f64 {
        self.first.log_joint(x) - self.second.log_joint(x)
    }
}

fn class_stats(x: &[Vec<f64>], y: &[Pole], pole: Pole, floor: f64) -> ClassStats {
    let members: Vec<&Vec<f64>> = x.iter().zip(y).filter(|(_, p)| **p == pole).map(|(r, _)| r).collect();
    let n = members.len() as f64;
    let d = x[0].len();
    let mut mean = alloc::vec![0.0; d];
    for r in &members {
        for (m, v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut variance = alloc::vec![0.0; d];
    for r in &members {
        for ((s, v), m) in variance.iter_mut().zip(r.iter()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    variance.iter_mut().for_each(|s| *s = (*s / n).max(floor));
    ClassStats {
        log_prior: libm::log(n / x.len() as f64),
        mean,
        variance,
    }
}

pub fn fit(x: &[Vec<f64>], y: &[Pole], config: &NbConfig) -> Result<NbModel> {
    super::require_both_classes(y)?;
    Ok(NbModel {
        first: class_stats(x, y, Pole::First, config.var_floor),
        second: class_stats(x, y, Pole::Second, config.var_floor),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hand_evaluated_log_densities() {
        // class + : {1, 3} -> mean 2, var 1 ; class - : {-1, -3} -> mean -2, var 1
        let x = vec![vec![1.0], vec![3.0], vec![-1.0], vec![-3.0]];
        let y = vec![Pole::First, Pole::First, Pole::Second, Pole::Second];
        let m = fit(&x, &y, &NbConfig::default()).unwrap();
        let half_ln_2pi = 0.5 * libm::log(2.0 * core::f64::consts::PI);
        let ln_half = libm::log(0.5);
        // (0.5 - 2)^2 / 2 = 1.125 ; (0.5 + 2)^2 / 2 = 3.125
        assert_abs_diff_eq!(
            m.first.log_joint(&[0.5]),
            ln_half - half_ln_2pi - 1.125,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            m.second.log_joint(&[0.5]),
            ln_half - half_ln_2pi - 3.125,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(m.score(&[0.5]), 2.0, epsilon = 1e-12);
        assert_eq!(Pole::from_score(m.score(&[0.5])), Pole::First);
    }

    #[test]
    fn symmetric_midpoint_ties_to_first_pole() {
        let x = vec![vec![1.0], vec![3.0], vec![-1.0], vec![-3.0]];
        let y = vec![Pole::First, Pole::First, Pole::Second, Pole::Second];
        let m = fit(&x, &y, &NbConfig::default()).unwrap();
        assert_eq!(m.score(&[0.0]), 0.0);
        assert_eq!(Pole::from_score(m.score(&[0.0])), Pole::First);
    }

    #[test]
    fn constant_feature_uses_floor() {
        let x = vec![vec![5.0, 1.0], vec![5.0, 2.0], vec![4.0, 8.0], vec![4.0, 9.0]];
        let y = vec![Pole::First, Pole::First, Pole::Second, Pole::Second];
        let m = fit(&x, &y, &NbConfig::default()).unwrap();
        assert_eq!(m.first.variance[0], 1e-9);
        assert!(m.score(&[5.0, 1.5]).is_finite());
        assert!(m.score(&[5.0, 1.5]) > 0.0);
    }

    #[test]
    fn nearest_mean_with_equal_variances() {
        let x = vec![vec![0.0], vec![2.0], vec![10.0], vec![12.0]];
        let y = vec![Pole::First, Pole::First, Pole::Second, Pole::Second];
        let m = fit(&x, &y, &NbConfig::default()).unwrap();
        for q in [-5.0, 3.0, 5.9] {
            assert!(m.score(&[q]) > 0.0);
        }
        for q in [6.1, 9.0, 40.0] {
            assert!(m.score(&[q]) < 0.0);
        }
    }

    #[test]
    fn single_class_is_error() {
        let x = vec![vec![0.0], vec![2.0]];
        assert!(fit(&x, &[Pole::Second, Pole::Second], &NbConfig::default()).is_err());
    }
}
