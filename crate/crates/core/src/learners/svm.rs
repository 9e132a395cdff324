//! Soft-margin SVM trained by sequential minimal optimization.
//!
//! The dual
//!
//! ```text
//! min  ½ αᵀQα − Σ αᵢ     Q_ij = y_i y_j K(x_i, x_j)
//! s.t. 0 ≤ αᵢ ≤ C,  Σ αᵢ yᵢ = 0
//! ```
//!
//! is solved two coordinates at a time. The working pair is the maximal
//! violating pair with second-order selection of the second index; the
//! solver stops once the violation gap `m(α) − M(α)` drops below the
//! tolerance, which bounds every point's KKT violation by the same amount.

use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::style::Pole;
use crate::{Error, Result};

const TAU: f64 = 1e-12;
/// Upper bound on cached kernel entries (8 bytes each).
const CACHE_ENTRIES: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                libm::exp(-gamma * d2)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub kernel: Kernel,
    /// Box constraint C.
    pub c: f64,
    /// Stopping tolerance on the KKT violation gap.
    pub tolerance: f64,
    /// Iteration budget, in multiples of the training set size.
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            kernel: Kernel::Linear,
            c: 1.0,
            tolerance: 1e-3,
            max_passes: 1000,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "SVM penalty C must be positive, got {}",
                self.c
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("SVM tolerance must be positive".into()));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidConfig("SVM max_passes must be at least 1".into()));
        }
        if let Kernel::Rbf { gamma } = self.kernel {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::InvalidConfig("rbf gamma must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Solution of the dual problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Bias `b` in `f(x) = Σ αᵢ yᵢ K(xᵢ, x) + b`.
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Fitted decision function: support vectors with their `αᵢ yᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub support_vectors: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }
}

struct KernelRows<'a> {
    x: &'a [Vec<f64>],
    kernel: Kernel,
    rows: Vec<Option<Rc<[f64]>>>,
    cached: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a [Vec<f64>], kernel: Kernel) -> Self {
        Self {
            x,
            kernel,
            rows: vec![None; x.len()],
            cached: 0,
        }
    }

    fn row(&mut self, i: usize) -> Rc<[f64]> {
        if let Some(r) = &self.rows[i] {
            return Rc::clone(r);
        }
        let r: Rc<[f64]> = self.x.iter().map(|xt| self.kernel.eval(&self.x[i], xt)).collect();
        if self.cached + r.len() <= CACHE_ENTRIES {
            self.cached += r.len();
            self.rows[i] = Some(Rc::clone(&r));
        }
        r
    }
}

fn sign(p: Pole) -> f64 {
    p.sign()
}

/// Solves the dual on already-scaled rows.
pub fn solve_dual(x: &[Vec<f64>], y: &[Pole], config: &SvmConfig) -> Result<DualSolution> {
    config.validate()?;
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    super::require_both_classes(y)?;
    let n = x.len();
    let c = config.c;
    let ys: Vec<f64> = y.iter().map(|&p| sign(p)).collect();
    let diag: Vec<f64> = x.iter().map(|xi| config.kernel.eval(xi, xi)).collect();
    let mut kernel = KernelRows::new(x, config.kernel);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let budget = config.max_passes.saturating_mul(n.max(1));
    let mut iterations = 0;
    let mut converged = false;

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    while iterations < budget {
        // i: maximal -y G over the up set
        let mut i = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        for t in 0..n {
            if in_up(alpha[t], ys[t]) {
                let v = -ys[t] * grad[t];
                if v > g_max {
                    g_max = v;
                    i = t;
                }
            }
        }
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            if in_low(alpha[t], ys[t]) {
                g_min = g_min.min(-ys[t] * grad[t]);
            }
        }
        if i == usize::MAX || g_max - g_min < config.tolerance {
            converged = true;
            break;
        }
        let k_i = kernel.row(i);
        // j: second-order choice among violating low-set points
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], ys[t]) {
                continue;
            }
            let b = g_max + ys[t] * grad[t];
            if b > 0.0 {
                let mut a = diag[i] + diag[t] - 2.0 * k_i[t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj < best {
                    best = obj;
                    j = t;
                }
            }
        }
        if j == usize::MAX {
            converged = true;
            break;
        }
        let k_j = kernel.row(j);
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let q_ij = ys[i] * ys[j] * k_i[j];
        if ys[i] != ys[j] {
            let mut quad = diag[i] + diag[j] + 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = diag[i] + diag[j] - 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let d_i = alpha[i] - old_i;
        let d_j = alpha[j] - old_j;
        for t in 0..n {
            grad[t] += ys[i] * ys[t] * k_i[t] * d_i + ys[j] * ys[t] * k_j[t] * d_j;
        }
    }

    // bias from free vectors, or the middle of the feasible interval
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..n {
        let yg = ys[t] * grad[t];
        if alpha[t] >= c {
            if ys[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if ys[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (upper + lower) / 2.0
    };
    Ok(DualSolution {
        alpha,
        bias: -rho,
        iterations,
        converged,
    })
}

/// Largest KKT violation of a dual solution, measured on `y f(x) − 1`.
pub fn max_kkt_violation(x: &[Vec<f64>], y: &[Pole], sol: &DualSolution, config: &SvmConfig) -> f64 {
    let c = config.c;
    let mut worst: f64 = 0.0;
    for (i, xi) in x.iter().enumerate() {
        let f: f64 = x
            .iter()
            .zip(y)
            .zip(&sol.alpha)
            .map(|((xt, &yt), &a)| a * sign(yt) * config.kernel.eval(xt, xi))
            .sum::<f64>()
            + sol.bias;
        let margin = sign(y[i]) * f - 1.0;
        let a = sol.alpha[i];
        let v = if a <= 0.0 {
            (-margin).max(0.0)
        } else if a >= c {
            margin.max(0.0)
        } else {
            margin.abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Fits on scaled rows. The flag is false when the iteration budget ran out;
/// the model is then the last iterate.
pub fn fit(x: &[Vec<f64>], y: &[Pole], config: &SvmConfig) -> Result<(SvmModel, bool)> {
    let sol = solve_dual(x, y, config)?;
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for ((xi, &yi), &a) in x.iter().zip(y).zip(&sol.alpha) {
        if a > 0.0 {
            support_vectors.push(xi.clone());
            coefficients.push(a * sign(yi));
        }
    }
    Ok((
        SvmModel {
            kernel: config.kernel,
            support_vectors,
            coefficients,
            bias: sol.bias,
        },
        sol.converged,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_point_problem_matches_analytic_dual() {
        // maximize 2a - 2a^2  =>  a = 0.5, w = 1, b = 0
        let x = vec![vec![-1.0], vec![1.0]];
        let y = vec![Pole::Second, Pole::First];
        let sol = solve_dual(&x, &y, &SvmConfig::default()).unwrap();
        assert_abs_diff_eq!(sol.alpha[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.alpha[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.bias, 0.0, epsilon = 1e-12);
        let (m, ok) = fit(&x, &y, &SvmConfig::default()).unwrap();
        assert!(ok);
        assert_abs_diff_eq!(m.decision(&[0.5]), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn xor_with_rbf() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = vec![Pole::First, Pole::First, Pole::Second, Pole::Second];
        let cfg = SvmConfig {
            kernel: Kernel::Rbf { gamma: 1.0 },
            ..SvmConfig::default()
        };
        let (m, ok) = fit(&x, &y, &cfg).unwrap();
        assert!(ok);
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(Pole::from_score(m.decision(xi)), *yi);
        }
    }

    #[test]
    fn separable_blobs_fit_perfectly_and_satisfy_kkt() {
        let (x, y) = crate::learners::testdata::blobs(40, 5);
        let cfg = SvmConfig::default();
        let sol = solve_dual(&x, &y, &cfg).unwrap();
        assert!(sol.converged);
        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, p)| a * p.sign()).sum();
        assert!(balance.abs() <= 1e-10);
        assert!(sol.alpha.iter().all(|&a| (0.0..=cfg.c).contains(&a)));
        assert!(max_kkt_violation(&x, &y, &sol, &cfg) <= cfg.tolerance);
        let (m, _) = fit(&x, &y, &cfg).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(Pole::from_score(m.decision(xi)), *yi);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        let y = vec![Pole::First, Pole::First];
        assert_eq!(
            solve_dual(&x, &y, &SvmConfig::default()).unwrap_err(),
            Error::SingleClass
        );
    }

    #[test]
    fn tiny_budget_reports_non_convergence() {
        let mut rng = crate::rng::Rng::new(6);
        let x: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.uniform(), rng.uniform()]).collect();
        let y: Vec<Pole> = (0..40)
            .map(|_| if rng.uniform() < 0.5 { Pole::First } else { Pole::Second })
            .collect();
        let cfg = SvmConfig {
            max_passes: 1,
            tolerance: 1e-12,
            c: 100.0,
            ..SvmConfig::default()
        };
        // one pass is 40 iterations; not enough for 1e-12 on noise labels
        let sol = solve_dual(&x, &y, &cfg).unwrap();
        assert!(!sol.converged);
        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, p)| a * p.sign()).sum();
        assert!(balance.abs() <= 1e-10);
    }

    #[test]
    fn bad_penalty_is_config_error() {
        let cfg = SvmConfig {
            c: 0.0,
            ..SvmConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }
}
