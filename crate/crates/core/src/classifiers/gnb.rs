use std::f64::consts::PI;

use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{check_binary_labels, ClassifierError};

/// Relative variance floor: `var_floor = VAR_FLOOR_RATIO * max feature variance`.
pub const VAR_FLOOR_RATIO: f64 = 1e-9;

/// Gaussian naive Bayes for labels {0, 1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub var_floor: f64,
}

impl GnbModel {
    pub fn fit(x: ArrayView2<'_, f64>, labels: &[u8]) -> Result<Self, ClassifierError> {
        check_binary_labels(x.nrows(), labels)?;
        let counts = [0u8, 1].map(|c| labels.iter().filter(|&&l| l == c).count());
        if counts.contains(&0) {
            return Err(ClassifierError::SingleClassError);
        }
        let n = labels.len() as f64;
        let max_var = x.var_axis(Axis(0), 0.0).iter().copied().fold(0.0, f64::max);
        // all-constant features: fall back to an absolute floor
        let var_floor = if max_var > 0.0 { VAR_FLOOR_RATIO * max_var } else { VAR_FLOOR_RATIO };

        let stats = |class: u8| {
            let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
            let sub = x.select(Axis(0), &rows);
            let mean = sub.mean_axis(Axis(0)).expect("non-empty class").to_vec();
            let var = sub.var_axis(Axis(0), 0.0).iter().map(|&v| v.max(var_floor)).collect();
            (mean, var)
        };
        let (m0, v0) = stats(0);
        let (m1, v1) = stats(1);
        Ok(GnbModel {
            priors: [counts[0] as f64 / n, counts[1] as f64 / n],
            means: [m0, m1],
            variances: [v0, v1],
            var_floor,
        })
    }

    pub fn n_features(&self) -> usize {
        self.means[0].len()
    }

    /// Per-class log joint density `ln p(c) + Σ ln N(x_j; μ_cj, σ²_cj)`.
    pub fn log_joint(&self, query: &[f64]) -> Result<[f64; 2], ClassifierError> {
        if query.len() != self.n_features() {
            return Err(ClassifierError::DimensionMismatch { got: query.len(), want: self.n_features() });
        }
        Ok([0, 1].map(|c| {
            let mut lj = self.priors[c].ln();
            for ((&x, &mu), &var) in query.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                let d = x - mu;
                lj -= 0.5 * (2.0 * PI * var).ln() + d * d / (2.0 * var);
            }
            lj
        }))
    }

    /// Predicted label and normalized posterior `[p(0|x), p(1|x)]`.
    pub fn predict_proba(&self, query: &[f64]) -> Result<(u8, [f64; 2]), ClassifierError> {
        let lj = self.log_joint(query)?;
        let top = lj[0].max(lj[1]);
        let lse = top + ((lj[0] - top).exp() + (lj[1] - top).exp()).ln();
        let post = [(lj[0] - lse).exp(), (lj[1] - lse).exp()];
        let label = u8::from(lj[1] >= lj[0]);
        Ok((label, post))
    }

    pub fn predict(&self, query: &[f64]) -> Result<u8, ClassifierError> {
        Ok(self.predict_proba(query)?.0)
    }
}
