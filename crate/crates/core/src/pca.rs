//! Principal component analysis of one coefficient band.
//!
//! Fitting centres the training rows (optionally z-scores them) and keeps the
//! top-k eigenvectors of the sample covariance (divisor `n - 1`). When a band
//! has more columns than rows the `n x n` Gram matrix is diagonalized instead
//! and its eigenvectors are mapped back through the data; any components past
//! the numerical rank are completed with an orthonormal basis of the null
//! space (eigenvalue 0).

use std::fmt::Write as _;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use thiserror::Error;

use crate::linalg::{self, LinalgError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PcaError {
    #[error("k = {k} is outside the feasible range 1..={max} (d = {d}, n = {n})")]
    RankError { k: usize, max: usize, d: usize, n: usize },
    #[error("input matrix contains non-finite values")]
    NonFiniteInput,
    #[error("eigen-solver did not converge after {iterations} iterations")]
    ConvergenceError { iterations: usize },
    #[error("matrix has {got} columns, model expects {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("malformed PCA artifact: {0}")]
    Artifact(String),
}

impl From<LinalgError> for PcaError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::ConvergenceError { iterations } => PcaError::ConvergenceError { iterations },
            LinalgError::NonFinite => PcaError::NonFiniteInput,
            LinalgError::NotSquare { rows, cols } => PcaError::DimensionMismatch { got: cols, want: rows },
        }
    }
}

/// Entries smaller than this do not decide a component's sign.
const SIGN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// Per-column divisor applied after centring; `None` when fitting did not z-score.
    pub scale: Option<Array1<f64>>,
    /// `k x d`, rows orthonormal.
    pub components: Array2<f64>,
    /// Non-increasing, clamped at 0.
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.components.nrows()
    }

    pub fn d(&self) -> usize {
        self.components.ncols()
    }

    fn standardize(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut centred = &x - &self.mean;
        if let Some(scale) = &self.scale {
            centred /= scale;
        }
        centred
    }

    /// Map scores back to the input space: `scores · components (· scale) + mean`.
    pub fn inverse_transform(&self, scores: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut x = scores.dot(&self.components);
        if let Some(scale) = &self.scale {
            x *= scale;
        }
        x + &self.mean
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let row = |out: &mut String, name: &str, vals: &mut dyn Iterator<Item = f64>| {
            out.push_str(name);
            for v in vals {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        };
        let _ = writeln!(out, "k,{}", self.k());
        let _ = writeln!(out, "d,{}", self.d());
        row(&mut out, "mean", &mut self.mean.iter().copied());
        if let Some(scale) = &self.scale {
            row(&mut out, "scale", &mut scale.iter().copied());
        }
        row(&mut out, "eigenvalues", &mut self.eigenvalues.iter().copied());
        for comp in self.components.rows() {
            row(&mut out, "component", &mut comp.iter().copied());
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, PcaError> {
        let bad = |m: &str| PcaError::Artifact(m.to_string());
        let mut k = None;
        let mut d = None;
        let mut mean = None;
        let mut scale = None;
        let mut eigenvalues = None;
        let mut comps: Vec<Vec<f64>> = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let mut fields = line.split(',');
            let key = fields.next().unwrap_or_default();
            let parse_all = |fields: std::str::Split<'_, char>| -> Result<Vec<f64>, PcaError> {
                fields.map(|f| f.trim().parse::<f64>().map_err(|_| bad("unparsable number"))).collect()
            };
            match key {
                "k" | "d" => {
                    let v: usize =
                        fields.next().and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad("bad dimension line"))?;
                    if key == "k" {
                        k = Some(v)
                    } else {
                        d = Some(v)
                    }
                }
                "mean" => mean = Some(parse_all(fields)?),
                "scale" => scale = Some(parse_all(fields)?),
                "eigenvalues" => eigenvalues = Some(parse_all(fields)?),
                "component" => comps.push(parse_all(fields)?),
                _ => return Err(bad("unknown row")),
            }
        }
        let (k, d) = (k.ok_or_else(|| bad("missing k"))?, d.ok_or_else(|| bad("missing d"))?);
        let mean = mean.ok_or_else(|| bad("missing mean"))?;
        let eigenvalues = eigenvalues.ok_or_else(|| bad("missing eigenvalues"))?;
        if mean.len() != d
            || eigenvalues.len() != k
            || comps.len() != k
            || comps.iter().any(|c| c.len() != d)
            || scale.as_ref().is_some_and(|s| s.len() != d)
        {
            return Err(bad("inconsistent dimensions"));
        }
        let components = Array2::from_shape_vec((k, d), comps.concat()).map_err(|_| bad("shape"))?;
        Ok(PcaModel { mean: Array1::from(mean), scale: scale.map(Array1::from), components, eigenvalues })
    }
}

/// Largest k a fit on an `n x d` matrix supports.
pub fn max_rank(n: usize, d: usize) -> usize {
    d.min(n.saturating_sub(1))
}

pub fn pca_fit(x: ArrayView2<'_, f64>, k: usize) -> Result<PcaModel, PcaError> {
    pca_fit_with(x, k, false)
}

/// Fit with optional per-column z-scoring (columns with zero spread keep scale 1).
pub fn pca_fit_with(x: ArrayView2<'_, f64>, k: usize, zscore: bool) -> Result<PcaModel, PcaError> {
    let (n, d) = x.dim();
    let max = max_rank(n, d);
    if k == 0 || k > max {
        return Err(PcaError::RankError { k, max, d, n });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(PcaError::NonFiniteInput);
    }
    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let mut centred = &x - &mean;
    let scale = if zscore {
        let sd = centred.map_axis(Axis(0), |col| {
            let ss: f64 = col.iter().map(|v| v * v).sum();
            let s = (ss / (n - 1) as f64).sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        });
        centred /= &sd;
        Some(sd)
    } else {
        None
    };

    let denom = (n - 1) as f64;
    let (mut eigenvalues, mut components) = if d <= n {
        let cov = linalg::gram_columns(&centred) / denom;
        let eig = linalg::symmetric_eigen(&cov)?;
        let comps = eig.vectors.slice(ndarray::s![.., ..k]).t().to_owned();
        (eig.values[..k].to_vec(), comps)
    } else {
        gram_route(&centred, k, denom)?
    };

    for (i, mut row) in components.rows_mut().into_iter().enumerate() {
        if let Some(first) = row.iter().find(|v| v.abs() > SIGN_EPS) {
            if *first < 0.0 {
                row.mapv_inplace(|v| -v);
            }
        }
        if eigenvalues[i] < 0.0 {
            eigenvalues[i] = 0.0;
        }
    }
    Ok(PcaModel { mean, scale, components, eigenvalues })
}

/// Top-k covariance eigenpairs via the `n x n` Gram matrix of the centred rows.
fn gram_route(centred: &Array2<f64>, k: usize, denom: f64) -> Result<(Vec<f64>, Array2<f64>), PcaError> {
    let d = centred.ncols();
    let gram = linalg::gram_rows(centred) / denom;
    let eig = linalg::symmetric_eigen(&gram)?;
    let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = top * 1e-12 * gram.nrows() as f64;

    // every vector Xᵀu/√((n−1)λ) with λ above the cutoff spans the row space
    let mut basis: Vec<Array1<f64>> = Vec::new();
    let mut values = Vec::new();
    for (j, &lambda) in eig.values.iter().enumerate() {
        if lambda <= cutoff || lambda <= 0.0 {
            break;
        }
        let u = eig.vectors.column(j);
        let mut v = centred.t().dot(&u) / (denom * lambda).sqrt();
        if orthonormalize_against(&mut v, &basis) {
            basis.push(v);
            values.push(lambda);
        }
    }
    let row_space = basis.len();
    // null-space completion from the standard basis, deterministic in column order
    let mut col = 0;
    while basis.len() < k && col < d {
        let mut v = Array1::zeros(d);
        v[col] = 1.0;
        if orthonormalize_against(&mut v, &basis) {
            basis.push(v);
            values.push(0.0);
        }
        col += 1;
    }
    debug_assert!(basis.len() >= k, "row space {row_space} + completion < {k}");
    let mut comps = Array2::zeros((k, d));
    for (i, v) in basis.iter().take(k).enumerate() {
        comps.row_mut(i).assign(v);
    }
    values.truncate(k);
    Ok((values, comps))
}

/// Two passes of Gram-Schmidt, then normalize. Returns false when `v` lies in
/// the span of `basis`.
fn orthonormalize_against(v: &mut Array1<f64>, basis: &[Array1<f64>]) -> bool {
    let original = v.dot(v).sqrt();
    if original == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis {
            let proj = b.dot(v);
            v.scaled_add(-proj, b);
        }
    }
    let norm = v.dot(v).sqrt();
    if norm <= 1e-8 * original {
        return false;
    }
    *v /= norm;
    true
}

pub fn pca_transform(model: &PcaModel, x: ArrayView2<'_, f64>) -> Result<Array2<f64>, PcaError> {
    if x.ncols() != model.d() {
        return Err(PcaError::DimensionMismatch { got: x.ncols(), want: model.d() });
    }
    Ok(model.standardize(x).dot(&model.components.t()))
}
