//! Soft-margin linear SVM trained on the dual by sequential minimal
//! optimization.
//!
//! Dual problem, with labels mapped to y ∈ {−1, +1}:
//!
//! ```text
//! min ½ αᵀQα − Σα   s.t.  0 ≤ α ≤ C,  yᵀα = 0,   Q_ij = y_i y_j ⟨x_i, x_j⟩
//! ```
//!
//! Each step updates the maximal-violating pair chosen with second-order
//! gain; scanning order is a seeded permutation, which decides ties. Training
//! stops once the violation gap `m(α) − M(α)` falls under the KKT tolerance.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_binary_labels, ClassifierError};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kkt_tolerance: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, kkt_tolerance: 1e-3, max_iter: 10_000_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    /// Dual coefficients, one per training row, each in `[0, C]`.
    pub support_alphas: Vec<f64>,
    pub kkt_tolerance: f64,
    pub iterations: usize,
}

impl SvmModel {
    pub fn decision(&self, query: &[f64]) -> Result<f64, ClassifierError> {
        if query.len() != self.weights.len() {
            return Err(ClassifierError::DimensionMismatch { got: query.len(), want: self.weights.len() });
        }
        Ok(self.weights.iter().zip(query).map(|(w, x)| w * x).sum::<f64>() + self.bias)
    }

    /// `sign(w·x + b)` mapped to {0, 1}; a zero decision value maps to 1.
    pub fn predict(&self, query: &[f64]) -> Result<u8, ClassifierError> {
        Ok(u8::from(self.decision(query)? >= 0.0))
    }
}

pub fn signed_labels(labels: &[u8]) -> Vec<f64> {
    labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
}

/// Dual objective `Σα − ½ αᵀQα` (the quantity SMO maximizes).
pub fn dual_objective(x: ArrayView2<'_, f64>, labels: &[u8], alphas: &[f64]) -> f64 {
    let y = signed_labels(labels);
    let mut w = vec![0.0; x.ncols()];
    for (i, row) in x.rows().into_iter().enumerate() {
        let coef = alphas[i] * y[i];
        for (wj, xj) in w.iter_mut().zip(row) {
            *wj += coef * xj;
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * w.iter().map(|v| v * v).sum::<f64>()
}

pub fn svm_fit(x: ArrayView2<'_, f64>, labels: &[u8], params: &SvmParams) -> Result<SvmModel, ClassifierError> {
    check_binary_labels(x.nrows(), labels)?;
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(ClassifierError::InvalidHyperparameter(format!("svm C must be positive, got {}", params.c)));
    }
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(ClassifierError::SingleClassError);
    }
    let n = x.nrows();
    let c = params.c;
    let y = signed_labels(labels);
    let kernel: Array2<f64> = x.dot(&x.t());

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));

    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα − Σα
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iterations = 0;
    loop {
        // working-set selection
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for &t in &order {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_gain = f64::INFINITY;
        if let Some(i) = i_sel {
            for &t in &order {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                let yg = y[t] * grad[t];
                if yg > gmax2 {
                    gmax2 = yg;
                }
                let b = gmax + yg;
                if b > 0.0 {
                    let a = kernel[[i, i]] + kernel[[t, t]] - 2.0 * kernel[[i, t]];
                    let gain = -(b * b) / if a > 0.0 { a } else { TAU };
                    if gain < best_gain {
                        best_gain = gain;
                        j_sel = Some(t);
                    }
                }
            }
        }
        if gmax + gmax2 < params.kkt_tolerance {
            break;
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else { break };
        iterations += 1;
        if iterations > params.max_iter {
            return Err(ClassifierError::ConvergenceError { iterations });
        }

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = {
            let q = kernel[[i, i]] + kernel[[j, j]] - 2.0 * kernel[[i, j]];
            if q > 0.0 {
                q
            } else {
                TAU
            }
        };
        if y[i] != y[j] {
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
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * kernel[[t, i]] * di + y[j] * kernel[[t, j]] * dj);
        }
    }

    // offset ρ: mean of y·∇ over free vectors, else midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 { free_sum / free_count as f64 } else { 0.5 * (ub + lb) };

    let mut weights = vec![0.0; x.ncols()];
    for (t, row) in x.rows().into_iter().enumerate() {
        if alpha[t] != 0.0 {
            let coef = alpha[t] * y[t];
            for (w, v) in weights.iter_mut().zip(row) {
                *w += coef * v;
            }
        }
    }
    Ok(SvmModel { weights, bias: -rho, c, support_alphas: alpha, kkt_tolerance: params.kkt_tolerance, iterations })
}
