//! Logistic head trained on frozen embeddings by full-batch gradient
//! descent.

use crate::rng::Rng;

use super::DetectorError;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticHead {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Training hyperparameters. The convergence rule is fixed: stop when the
/// relative loss change drops below `tol` or after `max_epochs` epochs.
#[derive(Debug, Clone, Copy)]
pub struct TrainParams {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub tol: f64,
    /// L2 penalty on the weights; keeps the head from chasing noise on
    /// null data.
    pub l2: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            learning_rate: 2.0,
            max_epochs: 500,
            tol: 1e-6,
            l2: 1e-3,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl LogisticHead {
    /// Probability that `x` belongs to the positive (AI) class.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let z: f64 = self
            .weights
            .iter()
            .zip(x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.bias;
        sigmoid(z)
    }

    /// Fit by full-batch gradient descent. `y` holds 1.0 for AI and 0.0
    /// for human. Deterministic for a fixed seed.
    pub fn fit(
        x: &[Vec<f64>],
        y: &[f64],
        seed: u64,
        params: &TrainParams,
    ) -> Result<LogisticHead, DetectorError> {
        assert_eq!(x.len(), y.len());
        assert!(!x.is_empty());
        let dim = x[0].len();
        let n = x.len() as f64;
        let mut rng = Rng::new(seed);
        let mut weights: Vec<f64> = (0..dim).map(|_| (rng.next_f64() - 0.5) * 0.02).collect();
        let mut bias = 0.0f64;

        let mut prev_loss = f64::INFINITY;
        for epoch in 0..params.max_epochs {
            let mut grad_w = vec![0.0f64; dim];
            let mut grad_b = 0.0f64;
            let mut loss = 0.0f64;
            for (xi, &yi) in x.iter().zip(y) {
                let z: f64 =
                    weights.iter().zip(xi).map(|(w, v)| w * v).sum::<f64>() + bias;
                let p = sigmoid(z);
                // Numerically safe BCE via log-sum-exp.
                loss += softplus(z) - yi * z;
                let err = p - yi;
                for (g, v) in grad_w.iter_mut().zip(xi) {
                    *g += err * v;
                }
                grad_b += err;
            }
            loss /= n;
            loss += 0.5 * params.l2 * weights.iter().map(|w| w * w).sum::<f64>();
            if !loss.is_finite() {
                return Err(DetectorError::NonFiniteLoss { epoch });
            }
            for (w, g) in weights.iter_mut().zip(&grad_w) {
                *w -= params.learning_rate * (g / n + params.l2 * *w);
            }
            bias -= params.learning_rate * grad_b / n;

            let rel = (prev_loss - loss).abs() / prev_loss.abs().max(1e-12);
            if epoch > 0 && rel < params.tol {
                break;
            }
            prev_loss = loss;
        }
        Ok(LogisticHead { weights, bias })
    }
}

/// log(1 + exp(z)) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else if z < -30.0 {
        0.0
    } else {
        (1.0 + z.exp()).ln()
    }
}
