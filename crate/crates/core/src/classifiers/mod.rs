//! Binary classifiers over feature matrices, with a shared train/predict
//! contract and a serializable model bundle.

pub mod gnb;
pub mod knn;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gnb::GnbModel;
pub use knn::KnnModel;
pub use svm::{svm_fit, SvmModel, SvmParams};

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifierError {
    #[error("feature dimension mismatch: got {got}, model expects {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("training labels contain a single class")]
    SingleClassError,
    #[error("optimizer did not converge after {iterations} iterations")]
    ConvergenceError { iterations: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("labels must be 0 or 1 (found {0})")]
    LabelError(u8),
    #[error("{rows} rows but {labels} labels")]
    LabelCount { rows: usize, labels: usize },
    #[error("unknown classifier {0:?}")]
    UnknownClassifier(String),
}

pub(crate) fn check_binary_labels(rows: usize, labels: &[u8]) -> Result<(), ClassifierError> {
    if rows != labels.len() {
        return Err(ClassifierError::LabelCount { rows, labels: labels.len() });
    }
    if rows == 0 {
        return Err(ClassifierError::SingleClassError);
    }
    match labels.iter().find(|&&l| l > 1) {
        Some(&l) => Err(ClassifierError::LabelError(l)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierId {
    Knn,
    Svm,
    Nb,
}

impl ClassifierId {
    pub const ALL: [ClassifierId; 3] = [ClassifierId::Knn, ClassifierId::Svm, ClassifierId::Nb];

    /// Whether features are z-scored before fitting when standardization is on.
    pub fn uses_standardization(self) -> bool {
        !matches!(self, ClassifierId::Nb)
    }
}

impl fmt::Display for ClassifierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierId::Knn => "knn",
            ClassifierId::Svm => "svm",
            ClassifierId::Nb => "nb",
        })
    }
}

impl FromStr for ClassifierId {
    type Err = ClassifierError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "knn" => Ok(ClassifierId::Knn),
            "svm" => Ok(ClassifierId::Svm),
            "nb" | "gnb" | "naive_bayes" => Ok(ClassifierId::Nb),
            _ => Err(ClassifierError::UnknownClassifier(s.to_string())),
        }
    }
}

/// Per-column z-scoring with statistics from the training rows. Zero-spread
/// columns keep a unit scale so they map to zero instead of NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<'_, f64>) -> Self {
        let mean = x.mean_axis(Axis(0)).map(|m| m.to_vec()).unwrap_or_else(|| vec![0.0; x.ncols()]);
        let std = x.std_axis(Axis(0), 0.0).iter().map(|&s| if s > 0.0 && s.is_finite() { s } else { 1.0 }).collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>, ClassifierError> {
        if x.ncols() != self.mean.len() {
            return Err(ClassifierError::DimensionMismatch { got: x.ncols(), want: self.mean.len() });
        }
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub knn_k: usize,
    pub svm_c: f64,
    pub standardize: bool,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters { knn_k: 5, svm_c: 1.0, standardize: true, seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedModel {
    Knn(KnnModel),
    Svm(SvmModel),
    Nb(GnbModel),
}

/// Everything needed to reapply a trained classifier to new feature rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub classifier: ClassifierId,
    pub hyperparameters: Hyperparameters,
    pub standardization: Option<Standardizer>,
    pub model: TrainedModel,
    pub config_digest: String,
    pub seed: u64,
}

pub fn train(
    id: ClassifierId,
    x: ArrayView2<'_, f64>,
    labels: &[u8],
    hp: &Hyperparameters,
) -> Result<ModelBundle, ClassifierError> {
    check_binary_labels(x.nrows(), labels)?;
    let standardization = (hp.standardize && id.uses_standardization()).then(|| Standardizer::fit(x));
    let scaled;
    let xs = match &standardization {
        Some(s) => {
            scaled = s.apply(x)?;
            scaled.view()
        }
        None => x,
    };
    let model = match id {
        ClassifierId::Knn => TrainedModel::Knn(KnnModel::fit(xs, labels, hp.knn_k)?),
        ClassifierId::Nb => TrainedModel::Nb(GnbModel::fit(xs, labels)?),
        ClassifierId::Svm => {
            let params = SvmParams { c: hp.svm_c, seed: hp.seed, ..SvmParams::default() };
            TrainedModel::Svm(svm_fit(xs, labels, &params)?)
        }
    };
    Ok(ModelBundle {
        format_version: BUNDLE_FORMAT_VERSION,
        classifier: id,
        hyperparameters: hp.clone(),
        standardization,
        model,
        config_digest: String::new(),
        seed: hp.seed,
    })
}

impl ModelBundle {
    pub fn n_features(&self) -> usize {
        match &self.model {
            TrainedModel::Knn(m) => m.n_features,
            TrainedModel::Svm(m) => m.weights.len(),
            TrainedModel::Nb(m) => m.n_features(),
        }
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<u8>, ClassifierError> {
        if x.ncols() != self.n_features() {
            return Err(ClassifierError::DimensionMismatch { got: x.ncols(), want: self.n_features() });
        }
        let scaled;
        let xs = match &self.standardization {
            Some(s) => {
                scaled = s.apply(x)?;
                scaled.view()
            }
            None => x,
        };
        xs.rows()
            .into_iter()
            .map(|row| {
                let q = row.to_vec();
                match &self.model {
                    TrainedModel::Knn(m) => m.predict(&q),
                    TrainedModel::Svm(m) => m.predict(&q),
                    TrainedModel::Nb(m) => m.predict(&q),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn toy() -> (Array2<f64>, Vec<u8>) {
        let x = array![[0.0, 100.0], [0.2, 110.0], [0.1, 90.0], [1.0, 400.0], [1.1, 410.0], [0.9, 390.0],];
        (x, vec![0, 0, 0, 1, 1, 1])
    }

    #[test]
    fn every_classifier_fits_toy_problem() {
        let (x, labels) = toy();
        let hp = Hyperparameters { knn_k: 3, ..Default::default() };
        for id in ClassifierId::ALL {
            let b = train(id, x.view(), &labels, &hp).unwrap();
            assert_eq!(b.predict(x.view()).unwrap(), labels, "{id}");
            assert_eq!(b.standardization.is_some(), id != ClassifierId::Nb);
        }
    }

    #[test]
    fn bundle_json_round_trip() {
        let (x, labels) = toy();
        let hp = Hyperparameters { knn_k: 3, ..Default::default() };
        for id in ClassifierId::ALL {
            let b = train(id, x.view(), &labels, &hp).unwrap();
            let json = serde_json::to_string(&b).unwrap();
            let back: ModelBundle = serde_json::from_str(&json).unwrap();
            assert_eq!(back, b);
        }
    }

    #[test]
    fn standardizer_handles_constant_column() {
        let x = array![[1.0, 3.0], [2.0, 3.0], [3.0, 3.0]];
        let s = Standardizer::fit(x.view());
        assert_eq!(s.std[1], 1.0);
        let z = s.apply(x.view()).unwrap();
        assert!(z.column(1).iter().all(|&v| v == 0.0));
        assert!((z.column(0).sum()).abs() < 1e-12);
    }

    #[test]
    fn classifier_id_parsing() {
        for id in ClassifierId::ALL {
            assert_eq!(id.to_string().parse::<ClassifierId>().unwrap(), id);
        }
        assert!("forest".parse::<ClassifierId>().is_err());
    }

    #[test]
    fn dimension_mismatch_at_predict() {
        let (x, labels) = toy();
        let b = train(ClassifierId::Nb, x.view(), &labels, &Hyperparameters::default()).unwrap();
        assert_eq!(b.predict(array![[1.0]].view()), Err(ClassifierError::DimensionMismatch { got: 1, want: 2 }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        // Positive affine rescaling of a feature column leaves standardized
        // classifiers unchanged.
        #[test]
        fn standardized_predictions_scale_invariant(
            seed in 0u64..1000,
            scale in 0.01f64..100.0,
            shift in -50.0f64..50.0,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x = Array2::from_shape_fn((30, 3), |(i, _)| rng.random_range(-1.0..1.0) + (i % 2) as f64);
            let labels: Vec<u8> = (0..30).map(|i| (i % 2) as u8).collect();
            let q = Array2::from_shape_fn((10, 3), |_| rng.random_range(-1.0..2.0));
            let mut x2 = x.clone();
            let mut q2 = q.clone();
            x2.column_mut(1).mapv_inplace(|v| v * scale + shift);
            q2.column_mut(1).mapv_inplace(|v| v * scale + shift);
            let hp = Hyperparameters::default();
            let a = train(ClassifierId::Knn, x.view(), &labels, &hp).unwrap();
            let b = train(ClassifierId::Knn, x2.view(), &labels, &hp).unwrap();
            prop_assert_eq!(a.predict(q.view()).unwrap(), b.predict(q2.view()).unwrap());
        }

        #[test]
        fn predictions_are_binary(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x = Array2::from_shape_fn((20, 2), |_| rng.random_range(-1.0..1.0));
            let labels: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
            for id in ClassifierId::ALL {
                let b = train(id, x.view(), &labels, &Hyperparameters::default()).unwrap();
                let p = b.predict(x.view()).unwrap();
                prop_assert_eq!(p.len(), 20);
                prop_assert!(p.iter().all(|&l| l <= 1));
            }
        }
    }
}
