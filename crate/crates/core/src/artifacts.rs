//! On-disk stage artifacts. Every file carries the config digest and seed:
//! CSV files in a leading `# key=value ...` comment line, JSON files as fields.
//!
//! Layout under `<output_dir>/<case>/`:
//!
//! ```text
//! bands/<band>.csv            segment,label,c1..cN      (decompose)
//! split.json                  train/test indices        (decompose)
//! features_train.csv          <feature names>,label     (features)
//! features_test.csv
//! pca/<band>.csv              fitted PCA per band       (features, PCA extractor only)
//! model_<classifier>.json     trained model bundle      (train)
//! report_<classifier>.json    evaluation report         (evaluate)
//! ```
//!
//! Floats are written in shortest round-trip form, so reading an artifact
//! back gives bit-identical values.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{ClassifierId, ModelBundle};
use crate::config::RunConfig;
use crate::dataset::{BinaryCase, SplitPlan};
use crate::dwt::BandId;
use crate::eval::{CellFeatures, EvaluationReport, PreparedCase};
use crate::features::{BandMatrixSet, ExtractorId, FeatureMatrix};

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("{stage}: missing upstream artifact {path}")]
    Missing { stage: &'static str, path: PathBuf },
    #[error("{path}: {detail}")]
    Malformed { path: PathBuf, detail: String },
    #[error("{path} was produced with config digest {found}, current config is {want}")]
    Stale { path: PathBuf, found: String, want: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

pub type Meta = BTreeMap<String, String>;

pub fn case_dir(output_dir: &Path, case: BinaryCase) -> PathBuf {
    output_dir.join(case.to_string())
}

pub fn model_path(dir: &Path, classifier: ClassifierId) -> PathBuf {
    dir.join(format!("model_{classifier}.json"))
}

pub fn report_path(dir: &Path, classifier: ClassifierId) -> PathBuf {
    dir.join(format!("report_{classifier}.json"))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> ArtifactError + '_ {
    move |e| ArtifactError::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn malformed(path: &Path, detail: impl ToString) -> ArtifactError {
    ArtifactError::Malformed { path: path.to_path_buf(), detail: detail.to_string() }
}

fn read_upstream(stage: &'static str, path: &Path) -> Result<String, ArtifactError> {
    if !path.exists() {
        return Err(ArtifactError::Missing { stage, path: path.to_path_buf() });
    }
    fs::read_to_string(path).map_err(io_err(path))
}

fn write_file(path: &Path, text: &str) -> Result<(), ArtifactError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

fn base_meta(cfg: &RunConfig, case: BinaryCase) -> Meta {
    Meta::from([
        ("digest".to_string(), cfg.digest()),
        ("seed".to_string(), cfg.seed.to_string()),
        ("case".to_string(), case.to_string()),
    ])
}

fn meta_line(meta: &Meta) -> String {
    let fields: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("# {}\n", fields.join(" "))
}

/// Split a CSV artifact into its metadata comment and the table body.
fn split_meta<'a>(path: &Path, text: &'a str) -> Result<(Meta, &'a str), ArtifactError> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    let fields = first.strip_prefix('#').ok_or_else(|| malformed(path, "missing `# digest=...` header line"))?;
    let meta = fields
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    Ok((meta, body))
}

fn check_digest(path: &Path, found: &str, cfg: &RunConfig) -> Result<(), ArtifactError> {
    let want = cfg.digest();
    if found != want {
        return Err(ArtifactError::Stale { path: path.to_path_buf(), found: found.to_string(), want });
    }
    Ok(())
}

fn check_meta(path: &Path, meta: &Meta, cfg: &RunConfig) -> Result<(), ArtifactError> {
    let found = meta.get("digest").ok_or_else(|| malformed(path, "no digest in header"))?;
    check_digest(path, found, cfg)
}

fn write_table(
    path: &Path,
    meta: &Meta,
    header: &[String],
    rows: &mut dyn Iterator<Item = Vec<String>>,
) -> Result<(), ArtifactError> {
    let mut buf = meta_line(meta).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let csv_err = |e: csv::Error| malformed(path, e);
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(io_err(path))?;
    }
    write_file(path, &String::from_utf8(buf).expect("utf-8 csv"))
}

fn read_table(path: &Path, body: &str) -> Result<(Vec<String>, Vec<csv::StringRecord>), ArtifactError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(body.as_bytes());
    let header = r.headers().map_err(|e| malformed(path, e))?.iter().map(String::from).collect();
    let rows = r.records().collect::<Result<Vec<_>, _>>().map_err(|e| malformed(path, e))?;
    Ok((header, rows))
}

fn parse_f64(path: &Path, s: &str) -> Result<f64, ArtifactError> {
    s.trim().parse().map_err(|_| malformed(path, format!("not a number: `{s}`")))
}

fn parse_label(path: &Path, s: &str) -> Result<u8, ArtifactError> {
    match s.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(malformed(path, format!("bad label `{other}`"))),
    }
}

pub fn write_bands(dir: &Path, prep: &PreparedCase, cfg: &RunConfig) -> Result<(), ArtifactError> {
    let mut meta = base_meta(cfg, prep.case);
    meta.insert("family".into(), prep.bands.family.to_string());
    meta.insert("levels".into(), cfg.levels.to_string());
    for (band, m) in &prep.bands.bands {
        let path = dir.join("bands").join(format!("{band}.csv"));
        let mut header = vec!["segment".to_string(), "label".to_string()];
        header.extend((1..=m.ncols()).map(|i| format!("c{i}")));
        let mut rows = m.rows().into_iter().enumerate().map(|(i, row)| {
            let mut rec = vec![prep.segment_names[i].clone(), prep.bands.labels[i].to_string()];
            rec.extend(row.iter().map(f64::to_string));
            rec
        });
        write_table(&path, &meta, &header, &mut rows)?;
    }
    Ok(())
}

pub fn read_bands(dir: &Path, case: BinaryCase, cfg: &RunConfig) -> Result<PreparedCase, ArtifactError> {
    let mut bands = Vec::new();
    let mut names: Option<Vec<String>> = None;
    let mut labels: Option<Vec<u8>> = None;
    for band in BandId::canonical(cfg.levels) {
        let path = dir.join("bands").join(format!("{band}.csv"));
        let text = read_upstream("features", &path)?;
        let (meta, body) = split_meta(&path, &text)?;
        check_meta(&path, &meta, cfg)?;
        let (header, rows) = read_table(&path, body)?;
        let width = header.len().saturating_sub(2);
        let mut values = Vec::with_capacity(rows.len() * width);
        let mut seg_names = Vec::with_capacity(rows.len());
        let mut seg_labels = Vec::with_capacity(rows.len());
        for rec in &rows {
            if rec.len() != width + 2 {
                return Err(malformed(&path, "ragged row"));
            }
            seg_names.push(rec[0].to_string());
            seg_labels.push(parse_label(&path, &rec[1])?);
            for f in rec.iter().skip(2) {
                values.push(parse_f64(&path, f)?);
            }
        }
        if names.as_ref().is_some_and(|n| *n != seg_names) || labels.as_ref().is_some_and(|l| *l != seg_labels) {
            return Err(malformed(&path, "row order differs from other bands"));
        }
        names = Some(seg_names);
        labels = Some(seg_labels);
        let m = Array2::from_shape_vec((rows.len(), width), values).map_err(|e| malformed(&path, e))?;
        bands.push((band, m));
    }
    Ok(PreparedCase {
        case,
        segment_names: names.unwrap_or_default(),
        bands: BandMatrixSet { family: cfg.family, bands, labels: labels.unwrap_or_default() },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitArtifact {
    pub case: String,
    pub config_digest: String,
    pub seed: u64,
    pub plan: SplitPlan,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ArtifactError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| malformed(path, e))?;
    write_file(path, &(text + "\n"))
}

fn read_json<T: DeserializeOwned>(stage: &'static str, path: &Path) -> Result<T, ArtifactError> {
    let text = read_upstream(stage, path)?;
    serde_json::from_str(&text).map_err(|e| malformed(path, e))
}

pub fn write_split(dir: &Path, case: BinaryCase, plan: &SplitPlan, cfg: &RunConfig) -> Result<(), ArtifactError> {
    let art = SplitArtifact { case: case.to_string(), config_digest: cfg.digest(), seed: cfg.seed, plan: plan.clone() };
    write_json(&dir.join("split.json"), &art)
}

pub fn read_split(stage: &'static str, dir: &Path, cfg: &RunConfig) -> Result<SplitPlan, ArtifactError> {
    let path = dir.join("split.json");
    let art: SplitArtifact = read_json(stage, &path)?;
    check_digest(&path, &art.config_digest, cfg)?;
    Ok(art.plan)
}

fn write_feature_matrix(path: &Path, fm: &FeatureMatrix, meta: &Meta) -> Result<(), ArtifactError> {
    let mut header = fm.feature_names.clone();
    header.push("label".into());
    let mut rows = fm.values.rows().into_iter().zip(&fm.labels).map(|(row, l)| {
        let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
        rec.push(l.to_string());
        rec
    });
    write_table(path, meta, &header, &mut rows)
}

pub fn read_feature_matrix(stage: &'static str, path: &Path, cfg: &RunConfig) -> Result<FeatureMatrix, ArtifactError> {
    let text = read_upstream(stage, path)?;
    let (meta, body) = split_meta(path, &text)?;
    check_meta(path, &meta, cfg)?;
    let extractor: ExtractorId = meta
        .get("extractor")
        .ok_or_else(|| malformed(path, "no extractor in header"))?
        .parse()
        .map_err(|e| malformed(path, e))?;
    let (mut header, rows) = read_table(path, body)?;
    if header.pop().as_deref() != Some("label") {
        return Err(malformed(path, "last column must be `label`"));
    }
    let f = header.len();
    let mut values = Vec::with_capacity(rows.len() * f);
    let mut labels = Vec::with_capacity(rows.len());
    for rec in &rows {
        if rec.len() != f + 1 {
            return Err(malformed(path, "ragged row"));
        }
        for v in rec.iter().take(f) {
            values.push(parse_f64(path, v)?);
        }
        labels.push(parse_label(path, &rec[f])?);
    }
    let values = Array2::from_shape_vec((rows.len(), f), values).map_err(|e| malformed(path, e))?;
    FeatureMatrix::new(values, labels, header, extractor).map_err(|e| malformed(path, e))
}

pub fn write_features(
    dir: &Path,
    case: BinaryCase,
    feats: &CellFeatures,
    cfg: &RunConfig,
) -> Result<(), ArtifactError> {
    let mut meta = base_meta(cfg, case);
    meta.insert("extractor".into(), feats.train.extractor.to_string());
    for (name, fm) in [("features_train.csv", &feats.train), ("features_test.csv", &feats.test)] {
        let mut m = meta.clone();
        m.insert("part".into(), name.trim_start_matches("features_").trim_end_matches(".csv").into());
        write_feature_matrix(&dir.join(name), fm, &m)?;
    }
    if let Some(fusion) = &feats.fusion {
        for (band, model) in &fusion.models {
            let path = dir.join("pca").join(format!("{band}.csv"));
            write_file(&path, &(meta_line(&meta) + &model.to_csv()))?;
        }
    }
    Ok(())
}

pub fn write_model(dir: &Path, bundle: &ModelBundle) -> Result<(), ArtifactError> {
    write_json(&model_path(dir, bundle.classifier), bundle)
}

pub fn read_model(
    stage: &'static str,
    dir: &Path,
    classifier: ClassifierId,
    cfg: &RunConfig,
) -> Result<ModelBundle, ArtifactError> {
    let path = model_path(dir, classifier);
    let bundle: ModelBundle = read_json(stage, &path)?;
    check_digest(&path, &bundle.config_digest, cfg)?;
    Ok(bundle)
}

/// Write a report after re-deriving its metrics from the stored labels.
pub fn write_report(path: &Path, report: &EvaluationReport) -> Result<(), ArtifactError> {
    report.check_consistency().map_err(|e| malformed(path, e))?;
    write_json(path, report)
}

pub fn read_report(path: &Path) -> Result<EvaluationReport, ArtifactError> {
    read_json("evaluate", path)
}
