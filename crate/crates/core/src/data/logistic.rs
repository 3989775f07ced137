//! Logistic score model: full-batch gradient descent on mean cross-entropy
//! with L2 on the weights (intercept unpenalized). Scores are raw logits;
//! thresholds operate in logit space.

use serde::{Deserialize, Serialize};

use crate::data::encode::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub step: f64,
    pub iterations: usize,
    pub l2: f64,
    /// Loss is recorded every this many iterations (and at the end).
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            step: 0.1,
            iterations: 2000,
            l2: 1e-3,
            checkpoint_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub iterations: usize,
    pub l2: f64,
    pub final_loss: f64,
    pub loss_checkpoints: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub meta: TrainMeta,
}

/// Mean logistic loss with L2 on weights, plus its gradient.
/// Loss terms use the stable form max(z,0) - y z + ln(1 + exp(-|z|)).
pub fn loss_and_gradient(
    weights: &[f64],
    intercept: f64,
    x: &FeatureMatrix,
    y: &[u8],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let m = x.rows() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for i in 0..x.rows() {
        let row = x.row(i);
        let z: f64 = intercept + row.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>();
        let yi = f64::from(y[i]);
        loss += z.max(0.0) - yi * z + (-z.abs()).exp().ln_1p();
        let p = 1.0 / (1.0 + (-z).exp());
        let err = p - yi;
        for (g, a) in grad_w.iter_mut().zip(row) {
            *g += err * a;
        }
        grad_b += err;
    }
    loss /= m;
    grad_b /= m;
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / m + l2 * w;
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad_w, grad_b)
}

pub fn train_score_model(x: &FeatureMatrix, y: &[u8], cfg: &TrainConfig) -> Result<ScoreModel> {
    if y.len() != x.rows() {
        return Err(Error::Training(format!(
            "{} labels for {} rows",
            y.len(),
            x.rows()
        )));
    }
    if cfg.step <= 0.0 || cfg.iterations == 0 || cfg.l2 < 0.0 || cfg.checkpoint_every == 0 {
        return Err(Error::Training(
            "step and checkpoint_every must be positive, l2 non-negative".into(),
        ));
    }
    let mut weights = vec![0.0; x.cols()];
    let mut intercept = 0.0;
    let mut checkpoints = Vec::new();
    let mut final_loss = f64::NAN;
    for it in 0..cfg.iterations {
        let (loss, grad_w, grad_b) = loss_and_gradient(&weights, intercept, x, y, cfg.l2);
        if !loss.is_finite() {
            return Err(Error::Training(format!(
                "non-finite loss at iteration {it}"
            )));
        }
        if it % cfg.checkpoint_every == 0 {
            checkpoints.push(loss);
        }
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= cfg.step * g;
        }
        intercept -= cfg.step * grad_b;
        final_loss = loss;
    }
    let (loss, _, _) = loss_and_gradient(&weights, intercept, x, y, cfg.l2);
    checkpoints.push(loss);
    final_loss = loss.min(final_loss);
    if weights.iter().any(|w| !w.is_finite()) || !intercept.is_finite() {
        return Err(Error::Training(
            "non-finite parameters after training".into(),
        ));
    }
    Ok(ScoreModel {
        weights,
        intercept,
        meta: TrainMeta {
            iterations: cfg.iterations,
            l2: cfg.l2,
            final_loss,
            loss_checkpoints: checkpoints,
        },
    })
}

/// Logits s_k = w·x_k + b for every row.
pub fn score_rows(model: &ScoreModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    if model.weights.len() != x.cols() {
        return Err(Error::Training(format!(
            "model has {} weights but matrix has {} columns",
            model.weights.len(),
            x.cols()
        )));
    }
    Ok((0..x.rows())
        .map(|i| {
            model.intercept
                + x.row(i)
                    .iter()
                    .zip(&model.weights)
                    .map(|(a, w)| a * w)
                    .sum::<f64>()
        })
        .collect())
}
