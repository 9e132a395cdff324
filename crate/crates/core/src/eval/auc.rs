use alloc::vec::Vec;

use crate::style::Pole;
use crate::{Error, Result};

/// Area under the ROC curve as the Mann–Whitney statistic: the fraction of
/// (positive, negative) pairs where the positive scores higher, ties
/// counting one half. Computed from mid-ranks in `O(n log n)`.
pub fn auc_roc(scores: &[f64], truth: &[Pole]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: truth.len(),
        });
    }
    let n_pos = truth.iter().filter(|p| **p == Pole::First).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidConfig("AUC scores must not be NaN".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // twice the positive rank sum, so mid-ranks stay integral
    let mut rank_sum2: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end, mid-rank (start + 1 + end) / 2
        let mid2 = (start + 1 + end) as u128;
        let pos = order[start..end].iter().filter(|&&i| truth[i] == Pole::First).count() as u128;
        rank_sum2 += mid2 * pos;
        start = end;
    }
    let np = n_pos as u128;
    // U = R - np(np+1)/2, doubled
    let u2 = rank_sum2 - np * (np + 1);
    Ok(u2 as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}
