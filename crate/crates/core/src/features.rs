//! Fixed-width feature vectors from wavelet decompositions.
//!
//! Two extractors are available and never mixed:
//! * `pca_max_fusion`: per-band PCA scores (top k components, fitted on the
//!   training rows) fused by an elementwise maximum across bands, giving k features.
//! * `stats7`: seven summary statistics of every band, giving 7 × bands features.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dwt::{BandId, WaveletDecomposition, WaveletFamily};
use crate::pca::{self, PcaError, PcaModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("inconsistent decompositions: {0}")]
    InconsistentDecomposition(String),
    #[error("need at least {need} segments, got {got}")]
    TooFewSegments { need: usize, got: usize },
    #[error("{labels} labels for {rows} rows")]
    LabelMismatch { rows: usize, labels: usize },
    #[error("matrix shapes differ: {0}")]
    DimensionMismatch(String),
    #[error("fusion needs at least two score matrices, got {0}")]
    NotEnoughBands(usize),
    #[error("band {0} not present in band set")]
    UnknownBand(BandId),
    #[error("band of length {0} is too short for statistics (need at least 2)")]
    SignalTooShort(usize),
    #[error("feature matrix contains non-finite values")]
    NonFinite,
    #[error("unknown extractor `{0}` (expected pca_max_fusion or stats7)")]
    UnknownExtractor(String),
    #[error("band {band}: {source}")]
    Pca { band: BandId, source: PcaError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractorId {
    PcaMaxFusion,
    Stats7,
}

impl fmt::Display for ExtractorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtractorId::PcaMaxFusion => "pca_max_fusion",
            ExtractorId::Stats7 => "stats7",
        })
    }
}

impl FromStr for ExtractorId {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "pca_max_fusion" | "pca" => Ok(ExtractorId::PcaMaxFusion),
            "stats7" | "stats" => Ok(ExtractorId::Stats7),
            _ => Err(FeatureError::UnknownExtractor(s.to_string())),
        }
    }
}

/// One `segments x coefficients` matrix per band, rows aligned across bands.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrixSet {
    pub family: WaveletFamily,
    pub bands: Vec<(BandId, Array2<f64>)>,
    pub labels: Vec<u8>,
}

impl BandMatrixSet {
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn band(&self, id: BandId) -> Option<&Array2<f64>> {
        self.bands.iter().find(|(b, _)| *b == id).map(|(_, m)| m)
    }

    pub fn band_ids(&self) -> Vec<BandId> {
        self.bands.iter().map(|(b, _)| *b).collect()
    }

    pub fn select_rows(&self, indices: &[usize]) -> BandMatrixSet {
        BandMatrixSet {
            family: self.family,
            bands: self.bands.iter().map(|(b, m)| (*b, m.select(Axis(0), indices))).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

pub fn assemble_band_matrices(
    decompositions: &[WaveletDecomposition],
    labels: &[u8],
) -> Result<BandMatrixSet, FeatureError> {
    if decompositions.len() < 2 {
        return Err(FeatureError::TooFewSegments { need: 2, got: decompositions.len() });
    }
    if labels.len() != decompositions.len() {
        return Err(FeatureError::LabelMismatch { rows: decompositions.len(), labels: labels.len() });
    }
    let first = &decompositions[0];
    let layout: Vec<(BandId, usize)> = first.bands().map(|(b, v)| (b, v.len())).collect();
    for (i, dec) in decompositions.iter().enumerate().skip(1) {
        if dec.family() != first.family() || dec.levels() != first.levels() {
            return Err(FeatureError::InconsistentDecomposition(format!(
                "segment {i} is {} level {}, segment 0 is {} level {}",
                dec.family(),
                dec.levels(),
                first.family(),
                first.levels()
            )));
        }
        let this: Vec<(BandId, usize)> = dec.bands().map(|(b, v)| (b, v.len())).collect();
        if this != layout {
            return Err(FeatureError::InconsistentDecomposition(format!(
                "segment {i} band layout {this:?} differs from {layout:?}"
            )));
        }
    }
    let n = decompositions.len();
    let bands = layout
        .iter()
        .map(|&(id, len)| {
            let mut m = Array2::zeros((n, len));
            for (row, dec) in decompositions.iter().enumerate() {
                m.row_mut(row).assign(&ndarray::ArrayView1::from(dec.band(id).unwrap()));
            }
            (id, m)
        })
        .collect();
    Ok(BandMatrixSet { family: first.family(), bands, labels: labels.to_vec() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: Array2<f64>,
    pub labels: Vec<u8>,
    pub feature_names: Vec<String>,
    pub extractor: ExtractorId,
}

impl FeatureMatrix {
    pub fn new(
        values: Array2<f64>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
        extractor: ExtractorId,
    ) -> Result<Self, FeatureError> {
        if labels.len() != values.nrows() {
            return Err(FeatureError::LabelMismatch { rows: values.nrows(), labels: labels.len() });
        }
        if feature_names.len() != values.ncols() {
            return Err(FeatureError::DimensionMismatch(format!(
                "{} names for {} columns",
                feature_names.len(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite);
        }
        Ok(FeatureMatrix { values, labels, feature_names, extractor })
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }
}

/// Elementwise maximum across a list of equally shaped score matrices.
pub fn fuse_max(scores: &[ArrayView2<'_, f64>]) -> Result<Array2<f64>, FeatureError> {
    if scores.len() < 2 {
        return Err(FeatureError::NotEnoughBands(scores.len()));
    }
    let shape = scores[0].dim();
    if let Some(bad) = scores.iter().find(|s| s.dim() != shape) {
        return Err(FeatureError::DimensionMismatch(format!("{:?} vs {:?}", bad.dim(), shape)));
    }
    let mut out = scores[0].to_owned();
    for s in &scores[1..] {
        out.zip_mut_with(s, |o, &v| {
            if v > *o {
                *o = v
            }
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaFusionOptions {
    pub k: usize,
    pub zscore: bool,
    pub allow_rank_truncation: bool,
    /// Bands to fit and fuse; `None` means every band of the set.
    pub bands: Option<Vec<BandId>>,
}

impl Default for PcaFusionOptions {
    fn default() -> Self {
        PcaFusionOptions { k: 50, zscore: false, allow_rank_truncation: false, bands: None }
    }
}

/// Per-band PCA models ready to turn band matrices into fused features.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaFusion {
    pub models: Vec<(BandId, PcaModel)>,
    pub k: usize,
    /// `(requested, used)` when the component count had to be clamped.
    pub truncated: Option<(usize, usize)>,
}

impl PcaFusion {
    pub fn fit(set: &BandMatrixSet, opts: &PcaFusionOptions) -> Result<PcaFusion, FeatureError> {
        let ids = match &opts.bands {
            Some(ids) => ids.clone(),
            None => set.band_ids(),
        };
        let mut selected = Vec::with_capacity(ids.len());
        for id in ids {
            selected.push((id, set.band(id).ok_or(FeatureError::UnknownBand(id))?));
        }
        let feasible = selected.iter().map(|(_, m)| pca::max_rank(m.nrows(), m.ncols())).min().unwrap_or(0);
        let (k, truncated) = if opts.allow_rank_truncation && opts.k > feasible && feasible > 0 {
            (feasible, Some((opts.k, feasible)))
        } else {
            (opts.k, None)
        };
        let models = selected
            .into_iter()
            .map(|(id, m)| {
                pca::pca_fit_with(m.view(), k, opts.zscore)
                    .map(|model| (id, model))
                    .map_err(|source| FeatureError::Pca { band: id, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PcaFusion { models, k, truncated })
    }

    pub fn feature_names(&self) -> Vec<String> {
        match self.models.as_slice() {
            [(band, _)] => (1..=self.k).map(|i| format!("{band}.pc{i}")).collect(),
            _ => (1..=self.k).map(|i| format!("pc{i}")).collect(),
        }
    }

    pub fn transform(&self, set: &BandMatrixSet) -> Result<FeatureMatrix, FeatureError> {
        let scores = self
            .models
            .iter()
            .map(|(id, model)| {
                let m = set.band(*id).ok_or(FeatureError::UnknownBand(*id))?;
                pca::pca_transform(model, m.view()).map_err(|source| FeatureError::Pca { band: *id, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let values = if scores.len() == 1 {
            scores.into_iter().next().unwrap()
        } else {
            let views: Vec<_> = scores.iter().map(|s| s.view()).collect();
            fuse_max(&views)?
        };
        FeatureMatrix::new(values, set.labels.clone(), self.feature_names(), ExtractorId::PcaMaxFusion)
    }
}

/// Fit per-band PCA on the training rows, project both sets, fuse by max.
pub fn extract_pca_max_features(
    train: &BandMatrixSet,
    test: &BandMatrixSet,
    opts: &PcaFusionOptions,
) -> Result<(FeatureMatrix, FeatureMatrix, PcaFusion), FeatureError> {
    let fusion = PcaFusion::fit(train, opts)?;
    let train_features = fusion.transform(train)?;
    let test_features = fusion.transform(test)?;
    Ok((train_features, test_features, fusion))
}

pub const STAT_NAMES: [&str; 7] = ["mean", "std", "min", "max", "median", "skewness", "kurtosis"];

/// Below this standard deviation skewness and kurtosis are reported as 0.
const DEGENERATE_STD: f64 = 1e-12;

/// `[mean, std (n-1), min, max, median, skewness, excess kurtosis]`.
///
/// Skewness and kurtosis use the moment estimators `m3 / m2^1.5` and
/// `m4 / m2^2 - 3` with population central moments.
pub fn stats7(band: &[f64]) -> Result<[f64; 7], FeatureError> {
    let n = band.len();
    if n < 2 {
        return Err(FeatureError::SignalTooShort(n));
    }
    let nf = n as f64;
    let mean = band.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in band {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let std = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let (skew, kurt) = if std < DEGENERATE_STD { (0.0, 0.0) } else { (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0) };
    let min = band.iter().copied().fold(f64::INFINITY, f64::min);
    let max = band.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sorted = band.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    Ok([mean, std, min, max, median, skew, kurt])
}

pub fn stats_feature_names(bands: &[BandId]) -> Vec<String> {
    bands.iter().flat_map(|b| STAT_NAMES.iter().map(move |s| format!("{b}.{s}"))).collect()
}

/// Seven statistics of every band, concatenated band-major.
pub fn extract_stats_features(set: &BandMatrixSet) -> Result<FeatureMatrix, FeatureError> {
    let n = set.n_rows();
    let width = 7 * set.bands.len();
    let mut values = Array2::zeros((n, width));
    for (b, (_, m)) in set.bands.iter().enumerate() {
        for (row, coeffs) in m.rows().into_iter().enumerate() {
            let coeffs = coeffs.to_vec();
            let s = stats7(&coeffs)?;
            for (j, v) in s.into_iter().enumerate() {
                values[[row, 7 * b + j]] = v;
            }
        }
    }
    FeatureMatrix::new(values, set.labels.clone(), stats_feature_names(&set.band_ids()), ExtractorId::Stats7)
}
