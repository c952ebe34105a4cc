//! Confusion-matrix metrics, the per-cell pipeline and the grid runner.
//!
//! A cell is one (case, classifier, seed) triple. Every stage of a cell is a
//! public function so that the staged CLI commands and the single-shot grid
//! go through exactly the same code.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{self, ClassifierId, ModelBundle};
use crate::config::RunConfig;
use crate::dataset::{self, BinaryCase, CasePool, EegSegment, SetLetter, SplitPlan};
use crate::dwt::{build_filters, wavedec, BandId};
use crate::features::{
    assemble_band_matrices, extract_pca_max_features, extract_stats_features, BandMatrixSet, ExtractorId,
    FeatureMatrix, PcaFusion,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{truth} true labels but {pred} predictions")]
    DimensionMismatch { truth: usize, pred: usize },
    #[error("labels must be 0 or 1 (found {0})")]
    LabelError(u8),
    #[error("no items to evaluate")]
    EmptyEvaluation,
    #[error("report inconsistent: {0}")]
    Inconsistent(String),
}

/// Counts with label 1 (the epileptic set) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, fn_: usize, tn: usize, fp: usize) -> Self {
        ConfusionMatrix { tp, fn_, tn, fp }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.tn + self.fp
    }
}

pub fn confusion(truth: &[u8], pred: &[u8]) -> Result<ConfusionMatrix, EvalError> {
    if truth.len() != pred.len() {
        return Err(EvalError::DimensionMismatch { truth: truth.len(), pred: pred.len() });
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in truth.iter().zip(pred) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (1, 0) => cm.fn_ += 1,
            (0, 0) => cm.tn += 1,
            (0, 1) => cm.fp += 1,
            _ => return Err(EvalError::LabelError(t.max(p))),
        }
    }
    Ok(cm)
}

/// Percentages except `f_measure`, which is on the unit scale. A ratio with a
/// zero denominator is reported as 0 and its name recorded in `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

impl MetricSet {
    pub const NAMES: [&'static str; 6] = ["accuracy", "sensitivity", "specificity", "precision", "recall", "f_measure"];

    pub fn values(&self) -> [f64; 6] {
        [self.accuracy, self.sensitivity, self.specificity, self.precision, self.recall, self.f_measure]
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricSet, EvalError> {
    let n = cm.total();
    if n == 0 {
        return Err(EvalError::EmptyEvaluation);
    }
    let mut undefined = Vec::new();
    let mut ratio = |name: &str, num: usize, den: usize| {
        if den == 0 {
            undefined.push(name.to_string());
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let sens = ratio("sensitivity", cm.tp, cm.tp + cm.fn_);
    let spec = ratio("specificity", cm.tn, cm.tn + cm.fp);
    let prec = ratio("precision", cm.tp, cm.tp + cm.fp);
    let f_measure = if prec + sens > 0.0 {
        2.0 * prec * sens / (prec + sens)
    } else {
        undefined.push("f_measure".to_string());
        0.0
    };
    Ok(MetricSet {
        accuracy: (cm.tp + cm.tn) as f64 / n as f64 * 100.0,
        sensitivity: sens * 100.0,
        specificity: spec * 100.0,
        precision: prec * 100.0,
        recall: sens * 100.0,
        f_measure,
        undefined,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub case: String,
    pub classifier: ClassifierId,
    pub extractor: ExtractorId,
    pub config_digest: String,
    pub seed: u64,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricSet,
    /// Pool indices of the held-out segments, aligned with `truth` and `predictions`.
    pub test_indices: Vec<usize>,
    pub truth: Vec<u8>,
    pub predictions: Vec<u8>,
    pub duration_secs: f64,
}

impl EvaluationReport {
    /// Recompute counts and metrics from the stored labels.
    pub fn check_consistency(&self) -> Result<(), EvalError> {
        let cm = confusion(&self.truth, &self.predictions)?;
        if cm != self.confusion {
            return Err(EvalError::Inconsistent(format!("{cm:?} != stored {:?}", self.confusion)));
        }
        if metrics(&cm)? != self.metrics {
            return Err(EvalError::Inconsistent("metrics differ from stored counts".into()));
        }
        if self.test_indices.len() != self.truth.len() {
            return Err(EvalError::Inconsistent("test index count".into()));
        }
        Ok(())
    }

    pub fn without_timing(&self) -> EvaluationReport {
        EvaluationReport { duration_secs: 0.0, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Load,
    Split,
    Decompose,
    Extract,
    Fit,
    Predict,
    Metrics,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(String::from));
        f.write_str(s.as_deref().unwrap_or("?"))
    }
}

/// Failure of one cell, tagged with the stage that failed.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[error("{stage} stage: {message}")]
pub struct CellError {
    pub stage: Stage,
    pub message: String,
}

pub(crate) fn fail<E: fmt::Display>(stage: Stage) -> impl Fn(E) -> CellError {
    move |e| CellError { stage, message: e.to_string() }
}

/// Band matrices for a whole case pool, rows in pool order.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedCase {
    pub case: BinaryCase,
    pub segment_names: Vec<String>,
    pub bands: BandMatrixSet,
}

pub fn decompose_pool(pool: &CasePool, cfg: &RunConfig) -> Result<PreparedCase, CellError> {
    let bank = build_filters(cfg.family);
    let decs = pool
        .segments
        .iter()
        .map(|s| wavedec(&s.samples, &bank, cfg.levels))
        .collect::<Result<Vec<_>, _>>()
        .map_err(fail(Stage::Decompose))?;
    let bands = assemble_band_matrices(&decs, &pool.labels).map_err(fail(Stage::Decompose))?;
    Ok(PreparedCase { case: pool.case, segment_names: pool.segments.iter().map(EegSegment::name).collect(), bands })
}

pub fn split_for(labels: &[u8], cfg: &RunConfig) -> Result<SplitPlan, CellError> {
    dataset::stratified_split(labels, cfg.seed, cfg.test_fraction).map_err(fail(Stage::Split))
}

pub fn restrict_bands(set: &BandMatrixSet, bands: &[BandId]) -> BandMatrixSet {
    BandMatrixSet {
        family: set.family,
        bands: set.bands.iter().filter(|(b, _)| bands.contains(b)).cloned().collect(),
        labels: set.labels.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFeatures {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    /// Fitted per-band models for the PCA extractor.
    pub fusion: Option<PcaFusion>,
}

/// Fit the extractor on the training rows of the split and apply it to both parts.
pub fn extract_features(bands: &BandMatrixSet, split: &SplitPlan, cfg: &RunConfig) -> Result<CellFeatures, CellError> {
    let train = bands.select_rows(&split.train_indices);
    let test = bands.select_rows(&split.test_indices);
    match cfg.extractor {
        ExtractorId::PcaMaxFusion => {
            let (train, test, fusion) =
                extract_pca_max_features(&train, &test, &cfg.pca_options()).map_err(fail(Stage::Extract))?;
            Ok(CellFeatures { train, test, fusion: Some(fusion) })
        }
        ExtractorId::Stats7 => {
            let selected = cfg.selected_bands();
            let train = extract_stats_features(&restrict_bands(&train, &selected)).map_err(fail(Stage::Extract))?;
            let test = extract_stats_features(&restrict_bands(&test, &selected)).map_err(fail(Stage::Extract))?;
            Ok(CellFeatures { train, test, fusion: None })
        }
    }
}

pub fn train_model(train: &FeatureMatrix, classifier: ClassifierId, cfg: &RunConfig) -> Result<ModelBundle, CellError> {
    let mut bundle = classifiers::train(classifier, train.values.view(), &train.labels, &cfg.hyperparameters())
        .map_err(fail(Stage::Fit))?;
    bundle.config_digest = cfg.digest();
    Ok(bundle)
}

pub fn evaluate_model(
    case: BinaryCase,
    bundle: &ModelBundle,
    test: &FeatureMatrix,
    split: &SplitPlan,
    cfg: &RunConfig,
) -> Result<EvaluationReport, CellError> {
    let predictions = bundle.predict(test.values.view()).map_err(fail(Stage::Predict))?;
    let confusion = confusion(&test.labels, &predictions).map_err(fail(Stage::Metrics))?;
    let metrics = metrics(&confusion).map_err(fail(Stage::Metrics))?;
    Ok(EvaluationReport {
        case: case.to_string(),
        classifier: bundle.classifier,
        extractor: cfg.extractor,
        config_digest: cfg.digest(),
        seed: cfg.seed,
        confusion,
        metrics,
        test_indices: split.test_indices.clone(),
        truth: test.labels.clone(),
        predictions,
        duration_secs: 0.0,
    })
}

pub type CellOutcome = Result<EvaluationReport, CellError>;

/// Loaded recordings per set; a set that failed to load keeps its error text.
pub type SeedCells = (BinaryCase, u64, Vec<(ClassifierId, CellOutcome)>);
type LoadedSets = BTreeMap<SetLetter, Result<Vec<EegSegment>, String>>;

/// Run split, extraction, fit and prediction for every classifier on one prepared case.
pub fn run_prepared(
    prep: &PreparedCase,
    classifiers: &[ClassifierId],
    cfg: &RunConfig,
) -> Vec<(ClassifierId, CellOutcome)> {
    let start = Instant::now();
    let shared = split_for(&prep.bands.labels, cfg)
        .and_then(|split| extract_features(&prep.bands, &split, cfg).map(|f| (split, f)));
    let shared_secs = start.elapsed().as_secs_f64();
    classifiers
        .iter()
        .map(|&clf| {
            let outcome = shared.clone().and_then(|(split, feats)| {
                let t = Instant::now();
                let bundle = train_model(&feats.train, clf, cfg)?;
                let mut report = evaluate_model(prep.case, &bundle, &feats.test, &split, cfg)?;
                report.duration_secs = shared_secs + t.elapsed().as_secs_f64();
                Ok(report)
            });
            (clf, outcome)
        })
        .collect()
}

/// Load, decompose, split, extract, fit and predict one cell from the data directory.
pub fn run_experiment(
    case: BinaryCase,
    classifier: ClassifierId,
    extractor: ExtractorId,
    cfg: &RunConfig,
) -> Result<EvaluationReport, CellError> {
    let start = Instant::now();
    let cfg = RunConfig { extractor, ..cfg.clone() };
    let dir = cfg
        .data_dir
        .as_deref()
        .ok_or_else(|| CellError { stage: Stage::Load, message: "no data directory configured".into() })?;
    let pool = dataset::load_case(dir, case).map_err(fail(Stage::Load))?;
    let prep = decompose_pool(&pool, &cfg)?;
    let (_, outcome) = run_prepared(&prep, &[classifier], &cfg).remove(0);
    outcome.map(|mut r| {
        r.duration_secs = start.elapsed().as_secs_f64();
        r
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub case: BinaryCase,
    pub classifier: ClassifierId,
    pub seed: u64,
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub extractor: ExtractorId,
    pub seeds: Vec<u64>,
    /// Ordered by classifier, then case, then seed.
    pub cells: Vec<GridCell>,
}

impl GridResult {
    pub fn n_errors(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }
}

/// Read every set the configured cases need. A set that fails to load is
/// kept as an error so only the cases that use it fail.
pub fn load_sets_for(dir: &Path, cases: &[BinaryCase]) -> LoadedSets {
    let mut letters: Vec<SetLetter> = cases.iter().flat_map(|c| [c.negative, c.positive]).collect();
    letters.sort();
    letters.dedup();
    letters.into_par_iter().map(|l| (l, dataset::load_set(dir, l).map_err(|e| e.to_string()))).collect()
}

fn thread_pool(cfg: &RunConfig) -> rayon::ThreadPool {
    let jobs = cfg.jobs.unwrap_or(cfg.cases.len()).max(1);
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool")
}

/// Run the grid over `cfg.cases` x `cfg.classifiers` x `seeds` on loaded sets.
pub fn run_grid(sets: &LoadedSets, cfg: &RunConfig, seeds: &[u64]) -> GridResult {
    let pool = thread_pool(cfg);
    let prepared: Vec<(BinaryCase, Result<PreparedCase, CellError>)> = pool.install(|| {
        cfg.cases
            .par_iter()
            .map(|&case| {
                let get = |l: SetLetter| match sets.get(&l) {
                    Some(Ok(segs)) => Ok(segs.clone()),
                    Some(Err(msg)) => Err(CellError { stage: Stage::Load, message: msg.clone() }),
                    None => Err(CellError { stage: Stage::Load, message: format!("set {l} not loaded") }),
                };
                let prep = get(case.negative).and_then(|neg| {
                    let pos = get(case.positive)?;
                    let mut m = BTreeMap::new();
                    m.insert(case.negative, neg);
                    m.insert(case.positive, pos);
                    let pool = dataset::make_case_for(&m, case).map_err(fail(Stage::Load))?;
                    decompose_pool(&pool, cfg)
                });
                (case, prep)
            })
            .collect()
    });

    let jobs: Vec<(usize, u64)> = (0..prepared.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let results: Vec<SeedCells> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, seed)| {
                let (case, prep) = &prepared[i];
                let seeded = cfg.with_seed(seed);
                let outcomes = match prep {
                    Ok(p) => run_prepared(p, &cfg.classifiers, &seeded),
                    Err(e) => cfg.classifiers.iter().map(|&c| (c, Err(e.clone()))).collect(),
                };
                (*case, seed, outcomes)
            })
            .collect()
    });

    let mut cells = Vec::new();
    for &clf in &cfg.classifiers {
        for &case in &cfg.cases {
            for &seed in seeds {
                for (c, s, outs) in &results {
                    if *c != case || *s != seed {
                        continue;
                    }
                    for (id, outcome) in outs {
                        if *id == clf {
                            cells.push(GridCell { case, classifier: clf, seed, outcome: outcome.clone() });
                        }
                    }
                }
            }
        }
    }
    GridResult { extractor: cfg.extractor, seeds: seeds.to_vec(), cells }
}

/// Full grid from the configured data directory.
pub fn reproduce_all(cfg: &RunConfig, seeds: &[u64]) -> GridResult {
    let sets = match &cfg.data_dir {
        Some(dir) => load_sets_for(dir, &cfg.cases),
        None => BTreeMap::new(),
    };
    run_grid(&sets, cfg, seeds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub case: BinaryCase,
    pub classifier: ClassifierId,
    pub seeds: Vec<u64>,
    /// Per-seed accuracy of successful runs.
    pub accuracies: Vec<f64>,
    pub mean: [f64; 6],
    /// Sample standard deviation across seeds; 0 for a single run.
    pub std: [f64; 6],
    pub errors: Vec<(u64, CellError)>,
}

pub fn summarize(grid: &GridResult) -> Vec<CellSummary> {
    let mut order: Vec<(ClassifierId, BinaryCase)> = Vec::new();
    for c in &grid.cells {
        if !order.contains(&(c.classifier, c.case)) {
            order.push((c.classifier, c.case));
        }
    }
    order
        .into_iter()
        .map(|(clf, case)| {
            let cells: Vec<&GridCell> = grid.cells.iter().filter(|c| c.classifier == clf && c.case == case).collect();
            let ok: Vec<[f64; 6]> =
                cells.iter().filter_map(|c| c.outcome.as_ref().ok()).map(|r| r.metrics.values()).collect();
            let n = ok.len() as f64;
            let mut mean = [0.0; 6];
            let mut std = [0.0; 6];
            for j in 0..6 {
                if !ok.is_empty() {
                    mean[j] = ok.iter().map(|v| v[j]).sum::<f64>() / n;
                }
                if ok.len() > 1 {
                    std[j] = (ok.iter().map(|v| (v[j] - mean[j]).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
                }
            }
            CellSummary {
                case,
                classifier: clf,
                seeds: cells.iter().map(|c| c.seed).collect(),
                accuracies: ok.iter().map(|v| v[0]).collect(),
                mean,
                std,
                errors: cells.iter().filter_map(|c| c.outcome.as_ref().err().map(|e| (c.seed, e.clone()))).collect(),
            }
        })
        .collect()
}

/// Published single-split accuracy for each cell of the default pipeline.
pub fn reference_accuracy(case: BinaryCase, classifier: ClassifierId) -> f64 {
    let idx = BinaryCase::ALL.iter().position(|c| *c == case).expect("known case");
    let row: [f64; 6] = match classifier {
        ClassifierId::Knn => [97.5, 95.0, 100.0, 97.5, 92.5, 100.0],
        ClassifierId::Svm => [92.5, 92.5, 100.0, 87.5, 97.5, 100.0],
        ClassifierId::Nb => [87.5, 90.0, 100.0, 95.0, 92.5, 100.0],
    };
    row[idx]
}

/// Minimum per-seed accuracy on the separable cases (at most 1 of 40 wrong).
pub const SEPARABLE_FLOOR: f64 = 97.5;
/// Allowed distance of the multi-seed mean from the reference on the other cases.
pub const BAND_HALF_WIDTH: f64 = 7.5;

#[derive(Debug, Clone, PartialEq)]
pub struct BandCheck {
    pub case: BinaryCase,
    pub classifier: ClassifierId,
    pub reference: f64,
    pub observed_mean: f64,
    pub observed_min: f64,
    pub rule: String,
    pub pass: bool,
}

pub fn band_checks(summaries: &[CellSummary]) -> Vec<BandCheck> {
    summaries
        .iter()
        .map(|s| {
            let reference = reference_accuracy(s.case, s.classifier);
            let min = s.accuracies.iter().copied().fold(f64::INFINITY, f64::min);
            let complete = s.errors.is_empty() && !s.accuracies.is_empty();
            let (rule, pass) = if reference >= 100.0 {
                (format!("every seed >= {SEPARABLE_FLOOR}"), complete && min >= SEPARABLE_FLOOR)
            } else {
                (
                    format!("mean within {reference} +/- {BAND_HALF_WIDTH}"),
                    complete && (s.mean[0] - reference).abs() <= BAND_HALF_WIDTH,
                )
            };
            BandCheck {
                case: s.case,
                classifier: s.classifier,
                reference,
                observed_mean: s.mean[0],
                observed_min: if min.is_finite() { min } else { 0.0 },
                rule,
                pass,
            }
        })
        .collect()
}

pub const CSV_HEADER: &str =
    "case,classifier,extractor,seed,accuracy,sensitivity,specificity,precision,recall,f_measure,tp,fn,tn,fp";

/// One row per cell and seed; failed cells carry `ERROR` in the metric columns.
pub fn grid_csv(grid: &GridResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in &grid.cells {
        let _ = write!(out, "{},{},{},{},", c.case, c.classifier, grid.extractor, c.seed);
        match &c.outcome {
            Ok(r) => {
                let m = &r.metrics;
                let cm = &r.confusion;
                let _ = writeln!(
                    out,
                    "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{},{}",
                    m.accuracy,
                    m.sensitivity,
                    m.specificity,
                    m.precision,
                    m.recall,
                    m.f_measure,
                    cm.tp,
                    cm.fn_,
                    cm.tn,
                    cm.fp
                );
            }
            Err(_) => out.push_str("ERROR,ERROR,ERROR,ERROR,ERROR,ERROR,,,,\n"),
        }
    }
    out
}

pub const SUMMARY_CSV_HEADER: &str = "case,classifier,extractor,seeds,accuracy_mean,accuracy_std,sensitivity_mean,sensitivity_std,specificity_mean,specificity_std,precision_mean,precision_std,recall_mean,recall_std,f_measure_mean,f_measure_std,errors";

pub fn summary_csv(extractor: ExtractorId, summaries: &[CellSummary]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for s in summaries {
        let seeds = s.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
        let _ = write!(out, "{},{},{},{}", s.case, s.classifier, extractor, seeds);
        for j in 0..6 {
            let _ = write!(out, ",{:.6},{:.6}", s.mean[j], s.std[j]);
        }
        let _ = writeln!(out, ",{}", s.errors.len());
    }
    out
}

fn classifier_title(c: ClassifierId) -> &'static str {
    match c {
        ClassifierId::Knn => "KNN",
        ClassifierId::Svm => "SVM",
        ClassifierId::Nb => "NB",
    }
}

/// Aligned text tables, one per classifier, rows per case.
pub fn text_tables(grid: &GridResult, summaries: &[CellSummary]) -> String {
    let multi = grid.seeds.len() > 1;
    let seeds = grid.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    let mut out = String::new();
    let mut classifiers: Vec<ClassifierId> = Vec::new();
    for s in summaries {
        if !classifiers.contains(&s.classifier) {
            classifiers.push(s.classifier);
        }
    }
    let width = if multi { 22 } else { 12 };
    for clf in classifiers {
        let _ = writeln!(
            out,
            "Results with {} ({}, {} {})",
            classifier_title(clf),
            grid.extractor,
            if multi { "mean ± std over seeds" } else { "seed" },
            seeds
        );
        let _ = write!(out, "{:<6}", "Case");
        for h in ["Accuracy", "Sensitivity", "Specificity", "Precision", "Recall", "F-measure"] {
            let _ = write!(out, " {h:>width$}");
        }
        out.push('\n');
        for s in summaries.iter().filter(|s| s.classifier == clf) {
            let _ = write!(out, "{:<6}", s.case.to_string());
            if s.accuracies.is_empty() {
                let _ = writeln!(out, " {:>width$}", "ERROR");
                continue;
            }
            for j in 0..6 {
                let cell =
                    if multi { format!("{:.6} ± {:.6}", s.mean[j], s.std[j]) } else { format!("{:.6}", s.mean[j]) };
                let _ = write!(out, " {cell:>width$}");
            }
            if !s.errors.is_empty() {
                let _ = write!(out, "  ({} failed)", s.errors.len());
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
