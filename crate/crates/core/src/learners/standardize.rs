use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Columns whose population standard deviation is below this map to zero.
pub const STD_FLOOR: f64 = 1e-9;

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput("cannot standardize zero rows"))?;
        let d = first.len();
        let n = rows.len() as f64;
        let mut mean = alloc::vec![0.0; d];
        for row in rows {
            if row.len() != d {
                return Err(Error::WidthMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; d];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let stddev = var.into_iter().map(|s| libm::sqrt(s / n)).collect();
        Ok(Self { mean, stddev })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.stddev))
            .map(|(v, (m, s))| if *s < STD_FLOOR { 0.0 } else { (v - m) / s })
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_two_four() {
        let rows = vec![vec![0.0], vec![2.0], vec![4.0]];
        let s = Standardizer::fit(&rows).unwrap();
        assert_eq!(s.mean, vec![2.0]);
        assert_abs_diff_eq!(s.stddev[0], libm::sqrt(8.0 / 3.0), epsilon = 1e-15);
        let t = s.transform(&rows);
        assert_abs_diff_eq!(t[0][0], -1.224744871391589, epsilon = 1e-12);
        assert_eq!(t[1][0], 0.0);
        assert_abs_diff_eq!(t[2][0], 1.224744871391589, epsilon = 1e-12);
    }

    #[test]
    fn constant_column_is_zeroed() {
        let rows = vec![vec![7.0, 1.0], vec![7.0, 2.0], vec![7.0, 3.0]];
        let t = Standardizer::fit(&rows).unwrap().transform(&rows);
        assert!(t.iter().all(|r| r[0] == 0.0));
        let mean: f64 = t.iter().map(|r| r[1]).sum::<f64>() / 3.0;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn empty_is_error() {
        assert!(Standardizer::fit(&[]).is_err());
    }
}
