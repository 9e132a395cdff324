//! One-hidden-layer perceptron: tanh hidden units, sigmoid output, mean
//! log-loss, full-batch gradient descent.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::style::Pole;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: 16,
            learning_rate: 0.5,
            epochs: 500,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::InvalidConfig("MLP needs at least one hidden unit".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("MLP learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Weights of the network. `w1` is row-major `hidden × inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub inputs: usize,
    pub hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpParams {
    /// Every weight and bias uniform in `[-0.5, 0.5)`, drawn in the order
    /// `w1` (row-major), `b1`, `w2`, `b2`.
    pub fn init(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        let mut draw = |k: usize| (0..k).map(|_| rng.uniform_range(-0.5, 0.5)).collect::<Vec<f64>>();
        let w1 = draw(hidden * inputs);
        let b1 = draw(hidden);
        let w2 = draw(hidden);
        let b2 = draw(1)[0];
        Self {
            inputs,
            hidden,
            w1,
            b1,
            w2,
            b2,
        }
    }

    pub fn len(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat view in the initialization order.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.w1);
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn set_from(&mut self, flat: &[f64]) {
        let (a, rest) = flat.split_at(self.w1.len());
        let (b, rest) = rest.split_at(self.b1.len());
        let (c, rest) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(a);
        self.b1.copy_from_slice(b);
        self.w2.copy_from_slice(c);
        self.b2 = rest[0];
    }

    fn hidden_activations(&self, x: &[f64], out: &mut [f64]) {
        for (h, a) in out.iter_mut().enumerate() {
            let row = &self.w1[h * self.inputs..(h + 1) * self.inputs];
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[h];
            *a = libm::tanh(z);
        }
    }

    /// Output pre-activation; positive means the first pole.
    pub fn logit(&self, x: &[f64]) -> f64 {
        let mut a = alloc::vec![0.0; self.hidden];
        self.hidden_activations(x, &mut a);
        a.iter().zip(&self.w2).map(|(a, w)| a * w).sum::<f64>() + self.b2
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Mean log-loss of `params` on `(x, y)` (target 1 for the first pole) and
/// its gradient, flattened like [`MlpParams::to_vec`].
pub fn loss_and_gradient(params: &MlpParams, x: &[Vec<f64>], y: &[Pole]) -> (f64, Vec<f64>) {
    let n = x.len() as f64;
    let (d, h) = (params.inputs, params.hidden);
    let mut g_w1 = alloc::vec![0.0; h * d];
    let mut g_b1 = alloc::vec![0.0; h];
    let mut g_w2 = alloc::vec![0.0; h];
    let mut g_b2 = 0.0;
    let mut loss = 0.0;
    let mut a = alloc::vec![0.0; h];
    for (row, pole) in x.iter().zip(y) {
        params.hidden_activations(row, &mut a);
        let z: f64 = a.iter().zip(&params.w2).map(|(a, w)| a * w).sum::<f64>() + params.b2;
        let t = if *pole == Pole::First { 1.0 } else { 0.0 };
        loss += softplus(z) - t * z;
        let dz = (sigmoid(z) - t) / n;
        g_b2 += dz;
        for k in 0..h {
            g_w2[k] += dz * a[k];
            let dh = dz * params.w2[k] * (1.0 - a[k] * a[k]);
            g_b1[k] += dh;
            for (g, v) in g_w1[k * d..(k + 1) * d].iter_mut().zip(row) {
                *g += dh * v;
            }
        }
    }
    let mut grad = g_w1;
    grad.extend(g_b1);
    grad.extend(g_w2);
    grad.push(g_b2);
    (loss / n, grad)
}

pub fn fit(x: &[Vec<f64>], y: &[Pole], config: &MlpConfig) -> Result<MlpParams> {
    config.validate()?;
    super::require_both_classes(y)?;
    let d = x.first().map_or(0, Vec::len);
    let mut params = MlpParams::init(d, config.hidden, config.seed);
    let mut flat = params.to_vec();
    for epoch in 0..config.epochs {
        let (loss, grad) = loss_and_gradient(&params, x, y);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        for (p, g) in flat.iter_mut().zip(&grad) {
            *p -= config.learning_rate * g;
        }
        params.set_from(&flat);
    }
    if flat.iter().any(|p| !p.is_finite()) {
        return Err(Error::Diverged { epoch: config.epochs });
    }
    Ok(params)
}
