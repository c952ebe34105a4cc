//! Command-line front end. Every subcommand resolves a [`RunConfig`] with
//! precedence flags > `--config` file > defaults, then runs one stage or the
//! whole grid.
//!
//! Exit codes: 0 success, 1 a cell failed, 2 bad input (config, data or a
//! missing upstream artifact), 3 a result fell outside its acceptance band.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::artifacts::{self, ArtifactError};
use crate::config::RunConfig;
use crate::dataset::{self, audit_set, DatasetError, DatasetSpec, SetLetter};
use crate::dwt::{build_filters, wavedec};
use crate::eval::{
    self, band_checks, grid_csv, summarize, summary_csv, text_tables, CellError, GridCell, GridResult, Stage,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CELL_ERROR: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;
pub const EXIT_BAND_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "epiwave", version, about = "Wavelet/PCA seizure detection on the Bonn EEG archive")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that all five sets are present with 100 well-formed files each.
    VerifyData(ConfigArgs),
    /// Decompose every segment of each case and write band matrices plus the split.
    Decompose {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Decompose one text file instead and print its band summary.
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
    },
    /// Fit the feature extractor on training rows and write feature matrices.
    Features(ConfigArgs),
    /// Train each configured classifier on the training features.
    Train(ConfigArgs),
    /// Score trained models on the held-out features and write reports.
    Evaluate(ConfigArgs),
    /// Run the full case x classifier grid and write CSV and text tables.
    Reproduce {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Seeds to run, e.g. `42`, `1..10` or `1,2,7..9`. Defaults to `--seed`.
        #[arg(long)]
        seeds: Option<String>,
        /// Report only; do not turn acceptance-band misses into exit code 3.
        #[arg(long)]
        no_bands: bool,
    },
}

/// Flags mirroring the configuration keys. Values are parsed by [`RunConfig::set`].
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory holding the five sets (falls back to EPIWAVE_DATA_DIR).
    #[arg(long)]
    pub data_dir: Option<String>,
    #[arg(long)]
    pub output_dir: Option<String>,
    /// haar, db2 or db4.
    #[arg(long, alias = "family")]
    pub wavelet_family: Option<String>,
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long)]
    pub pca_k: Option<String>,
    /// pca_max_fusion or stats7.
    #[arg(long)]
    pub extractor: Option<String>,
    /// Comma list of knn, svm, nb.
    #[arg(long)]
    pub classifiers: Option<String>,
    /// Comma list of cases such as A-E,B-E.
    #[arg(long, alias = "case")]
    pub cases: Option<String>,
    #[arg(long)]
    pub knn_k: Option<String>,
    #[arg(long)]
    pub svm_c: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub test_fraction: Option<String>,
    #[arg(long, value_name = "BOOL")]
    pub standardize: Option<String>,
    /// Comma list of bands to extract from, or `all`.
    #[arg(long)]
    pub fuse_bands: Option<String>,
    /// Single band evaluation; shorthand for `--fuse-bands <BAND>`.
    #[arg(long, conflicts_with = "fuse_bands")]
    pub band: Option<String>,
    #[arg(long, value_name = "BOOL")]
    pub zscore_before_pca: Option<String>,
    #[arg(long, value_name = "BOOL")]
    pub allow_rank_truncation: Option<String>,
    /// Worker threads for the grid (default: number of cases).
    #[arg(long)]
    pub jobs: Option<String>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig, String> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path).map_err(|e| e.to_string())?;
        }
        let flags = [
            ("data_dir", &self.data_dir),
            ("output_dir", &self.output_dir),
            ("wavelet_family", &self.wavelet_family),
            ("levels", &self.levels),
            ("pca_k", &self.pca_k),
            ("extractor", &self.extractor),
            ("classifiers", &self.classifiers),
            ("cases", &self.cases),
            ("knn_k", &self.knn_k),
            ("svm_c", &self.svm_c),
            ("seed", &self.seed),
            ("test_fraction", &self.test_fraction),
            ("standardize", &self.standardize),
            ("fuse_bands", &self.fuse_bands),
            ("fuse_bands", &self.band),
            ("zscore_before_pca", &self.zscore_before_pca),
            ("allow_rank_truncation", &self.allow_rank_truncation),
            ("jobs", &self.jobs),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| e.to_string())?;
            }
        }
        cfg.resolve_data_dir_from_env();
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

/// Parse `1..10`, `1..=10`, `3` or comma-separated mixtures; ranges are inclusive.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| format!("bad seed `{s}` in `{text}`"));
        match part.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
                if lo > hi {
                    return Err(format!("empty seed range `{part}`"));
                }
                seeds.extend(lo..=hi);
            }
            None => seeds.push(num(part)?),
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(seeds)
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

macro_rules! say {
    ($w:expr, $($arg:tt)*) => {{ let _ = writeln!($w, $($arg)*); }};
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let mut io = Io { out, err };
    let args = match &cli.command {
        Command::VerifyData(a) | Command::Features(a) | Command::Train(a) | Command::Evaluate(a) => a,
        Command::Decompose { cfg, .. } | Command::Reproduce { cfg, .. } => cfg,
    };
    let cfg = match args.resolve() {
        Ok(c) => c,
        Err(msg) => {
            say!(io.err, "error: {msg}");
            return EXIT_INPUT_ERROR;
        }
    };
    match &cli.command {
        Command::VerifyData(_) => cmd_verify_data(&cfg, &mut io),
        Command::Decompose { input: Some(path), .. } => cmd_decompose_file(path, &cfg, &mut io),
        Command::Decompose { .. } => cmd_decompose(&cfg, &mut io),
        Command::Features(_) => cmd_features(&cfg, &mut io),
        Command::Train(_) => cmd_train(&cfg, &mut io),
        Command::Evaluate(_) => cmd_evaluate(&cfg, &mut io),
        Command::Reproduce { seeds, no_bands, .. } => {
            let seeds = match seeds.as_deref().map(parse_seeds).unwrap_or(Ok(vec![cfg.seed])) {
                Ok(s) => s,
                Err(msg) => {
                    say!(io.err, "error: {msg}");
                    return EXIT_INPUT_ERROR;
                }
            };
            cmd_reproduce(&cfg, &seeds, !no_bands, &mut io)
        }
    }
}

fn data_dir<'a>(cfg: &'a RunConfig, io: &mut Io<'_>) -> Option<&'a Path> {
    match cfg.data_dir.as_deref() {
        None => {
            say!(io.err, "error: no data directory (use --data-dir or set EPIWAVE_DATA_DIR)");
            None
        }
        Some(dir) if !dir.is_dir() => {
            say!(io.err, "error: {}", DatasetError::DirectoryNotFound(dir.to_path_buf()));
            None
        }
        Some(dir) => Some(dir),
    }
}

fn cmd_verify_data(cfg: &RunConfig, io: &mut Io<'_>) -> i32 {
    let Some(dir) = data_dir(cfg, io) else {
        return EXIT_INPUT_ERROR;
    };
    let spec = DatasetSpec::bonn();
    let (mut files, mut valid, mut ok) = (0, 0, true);
    for letter in SetLetter::ALL {
        match audit_set(dir, letter, &spec) {
            Ok(a) => {
                files += a.files_found;
                valid += a.valid_files;
                say!(
                    io.out,
                    "set {letter} ({}): {} files, {} valid",
                    letter.file_prefix(),
                    a.files_found,
                    a.valid_files
                );
                for p in &a.problems {
                    say!(io.out, "  {p}");
                }
                ok &= a.problems.is_empty() && a.valid_files == spec.segments_per_set;
            }
            Err(e) => {
                say!(io.out, "set {letter} ({}): {e}", letter.file_prefix());
                ok = false;
            }
        }
    }
    let verdict = if ok { "OK" } else { "INVALID" };
    say!(io.out, "5 sets, {files} files, {valid} valid, {verdict}");
    if ok {
        EXIT_OK
    } else {
        EXIT_INPUT_ERROR
    }
}

fn cmd_decompose_file(path: &Path, cfg: &RunConfig, io: &mut Io<'_>) -> i32 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            say!(io.err, "error: {}: {e}", path.display());
            return EXIT_INPUT_ERROR;
        }
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let n = text.lines().filter(|l| !l.trim().is_empty()).count();
    let samples = match dataset::parse_segment_text(&name, &text, n) {
        Ok(s) => s,
        Err(e) => {
            say!(io.err, "error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    match wavedec(&samples, &build_filters(cfg.family), cfg.levels) {
        Ok(dec) => {
            say!(io.out, "{name}: {} samples, {} {} levels", samples.len(), cfg.family, cfg.levels);
            say!(io.out, "band,length,min,max,energy");
            for (band, c) in dec.bands() {
                let min = c.iter().copied().fold(f64::INFINITY, f64::min);
                let max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let energy: f64 = c.iter().map(|v| v * v).sum();
                say!(io.out, "{band},{},{min},{max},{energy}", c.len());
            }
            EXIT_OK
        }
        Err(e) => {
            say!(io.err, "error: {e}");
            EXIT_INPUT_ERROR
        }
    }
}

fn cell_exit(e: &CellError) -> i32 {
    if e.stage == Stage::Load {
        EXIT_INPUT_ERROR
    } else {
        EXIT_CELL_ERROR
    }
}

fn artifact_exit(e: &ArtifactError, io: &mut Io<'_>) -> i32 {
    say!(io.err, "error: {e}");
    EXIT_INPUT_ERROR
}

fn cmd_decompose(cfg: &RunConfig, io: &mut Io<'_>) -> i32 {
    let Some(dir) = data_dir(cfg, io) else {
        return EXIT_INPUT_ERROR;
    };
    for &case in &cfg.cases {
        let prep = dataset::load_case(dir, case)
            .map_err(eval::fail(Stage::Load))
            .and_then(|pool| eval::decompose_pool(&pool, cfg));
        let prep = match prep {
            Ok(p) => p,
            Err(e) => {
                say!(io.err, "error: {case}: {e}");
                return cell_exit(&e);
            }
        };
        let split = match eval::split_for(&prep.bands.labels, cfg) {
            Ok(s) => s,
            Err(e) => {
                say!(io.err, "error: {case}: {e}");
                return cell_exit(&e);
            }
        };
        let out = artifacts::case_dir(&cfg.output_dir, case);
        if let Err(e) =
            artifacts::write_bands(&out, &prep, cfg).and_then(|_| artifacts::write_split(&out, case, &split, cfg))
        {
            return artifact_exit(&e, io);
        }
        say!(
            io.out,
            "{case}: {} segments, bands {} -> {}",
            prep.bands.n_rows(),
            prep.bands.bands.iter().map(|(b, m)| format!("{b}:{}", m.ncols())).collect::<Vec<_>>().join(" "),
            out.display()
        );
    }
    EXIT_OK
}

fn cmd_features(cfg: &RunConfig, io: &mut Io<'_>) -> i32 {
    for &case in &cfg.cases {
        let dir = artifacts::case_dir(&cfg.output_dir, case);
        let upstream = artifacts::read_bands(&dir, case, cfg)
            .and_then(|prep| artifacts::read_split("features", &dir, cfg).map(|s| (prep, s)));
        let (prep, split) = match upstream {
            Ok(v) => v,
            Err(e) => return artifact_exit(&e, io),
        };
        let feats = match eval::extract_features(&prep.bands, &split, cfg) {
            Ok(f) => f,
            Err(e) => {
                say!(io.err, "error: {case}: {e}");
                return cell_exit(&e);
            }
        };
        if let Err(e) = artifacts::write_features(&dir, case, &feats, cfg) {
            return artifact_exit(&e, io);
        }
        say!(
            io.out,
            "{case}: {} train x {} test rows, {} {} features",
            feats.train.values.nrows(),
            feats.test.values.nrows(),
            feats.train.n_features(),
            cfg.extractor
        );
    }
    EXIT_OK
}

fn cmd_train(cfg: &RunConfig, io: &mut Io<'_>) -> i32 {
    for &case in &cfg.cases {
        let dir = artifacts::case_dir(&cfg.output_dir, case);
        let train = match artifacts::read_feature_matrix("train", &dir.join("features_train.csv"), cfg) {
            Ok(t) => t,
            Err(e) => return artifact_exit(&e, io),
        };
        for &clf in &cfg.classifiers {
            let bundle = match eval::train_model(&train, clf, cfg) {
                Ok(b) => b,
                Err(e) => {
                    say!(io.err, "error: {case}/{clf}: {e}");
                    return cell_exit(&e);
                }
            };
            if let Err(e) = artifacts::write_model(&dir, &bundle) {
                return artifact_exit(&e, io);
            }
            say!(io.out, "{case}/{clf}: trained on {} rows", train.values.nrows());
        }
    }
    EXIT_OK
}

fn cmd_evaluate(cfg: &RunConfig, io: &mut Io<'_>) -> i32 {
    let mut cells = Vec::new();
    for &case in &cfg.cases {
        let dir = artifacts::case_dir(&cfg.output_dir, case);
        let upstream = artifacts::read_feature_matrix("evaluate", &dir.join("features_test.csv"), cfg)
            .and_then(|t| artifacts::read_split("evaluate", &dir, cfg).map(|s| (t, s)));
        let (test, split) = match upstream {
            Ok(v) => v,
            Err(e) => return artifact_exit(&e, io),
        };
        for &clf in &cfg.classifiers {
            let start = Instant::now();
            let bundle = match artifacts::read_model("evaluate", &dir, clf, cfg) {
                Ok(b) => b,
                Err(e) => return artifact_exit(&e, io),
            };
            let outcome = eval::evaluate_model(case, &bundle, &test, &split, cfg).map(|mut r| {
                r.duration_secs = start.elapsed().as_secs_f64();
                r
            });
            match &outcome {
                Ok(r) => {
                    if let Err(e) = artifacts::write_report(&artifacts::report_path(&dir, clf), r) {
                        return artifact_exit(&e, io);
                    }
                }
                Err(e) => {
                    say!(io.err, "error: {case}/{clf}: {e}");
                    return cell_exit(e);
                }
            }
            cells.push(GridCell { case, classifier: clf, seed: cfg.seed, outcome });
        }
    }
    let grid = order_cells(GridResult { extractor: cfg.extractor, seeds: vec![cfg.seed], cells });
    let _ = write!(io.out, "{}", text_tables(&grid, &summarize(&grid)));
    EXIT_OK
}

fn order_cells(mut grid: GridResult) -> GridResult {
    grid.cells.sort_by_key(|c| (c.classifier, c.case, c.seed));
    grid
}

fn write_out(path: &Path, text: &str, io: &mut Io<'_>) -> bool {
    let res = path.parent().map_or(Ok(()), fs::create_dir_all).and_then(|_| fs::write(path, text));
    if let Err(e) = res {
        say!(io.err, "error: {}: {e}", path.display());
        return false;
    }
    true
}

fn cmd_reproduce(cfg: &RunConfig, seeds: &[u64], check_bands: bool, io: &mut Io<'_>) -> i32 {
    if !cfg.cases.is_empty() && data_dir(cfg, io).is_none() {
        return EXIT_INPUT_ERROR;
    }
    let start = Instant::now();
    let grid = eval::reproduce_all(cfg, seeds);
    let elapsed = start.elapsed().as_secs_f64();
    let summaries = summarize(&grid);
    let out = &cfg.output_dir;

    let tables = text_tables(&grid, &summaries);
    let mut written = write_out(&out.join("results.csv"), &grid_csv(&grid), io)
        && write_out(&out.join("summary.csv"), &summary_csv(grid.extractor, &summaries), io)
        && write_out(&out.join("tables.txt"), &tables, io)
        && write_out(&out.join("config.txt"), &cfg.to_text(), io);
    for cell in &grid.cells {
        if let Ok(r) = &cell.outcome {
            let path = out.join("reports").join(format!("{}_{}_seed{}.json", cell.case, cell.classifier, cell.seed));
            if let Err(e) = artifacts::write_report(&path, r) {
                say!(io.err, "error: {e}");
                written = false;
            }
        }
    }
    if !written {
        return EXIT_INPUT_ERROR;
    }

    let _ = write!(io.out, "{tables}");
    for cell in &grid.cells {
        if let Err(e) = &cell.outcome {
            say!(io.out, "ERROR {}/{} seed {}: {e}", cell.case, cell.classifier, cell.seed);
        }
    }
    say!(
        io.out,
        "{} cells, {} failed, {elapsed:.1} s, digest {} (seed {})",
        grid.cells.len(),
        grid.n_errors(),
        cfg.digest(),
        cfg.seed
    );

    let mut band_failures = 0;
    if grid.extractor == crate::features::ExtractorId::PcaMaxFusion && !summaries.is_empty() {
        say!(io.out, "acceptance bands:");
        for c in band_checks(&summaries) {
            if !c.pass {
                band_failures += 1;
            }
            say!(
                io.out,
                "  {} {:<4} {:<3} reference {:>6.2}  mean {:>9.5}  min {:>9.5}  [{}]",
                if c.pass { "PASS" } else { "FAIL" },
                c.case.to_string(),
                c.classifier,
                c.reference,
                c.observed_mean,
                c.observed_min,
                c.rule
            );
        }
    }
    if grid.n_errors() > 0 {
        EXIT_CELL_ERROR
    } else if check_bands && band_failures > 0 {
        EXIT_BAND_FAILURE
    } else {
        EXIT_OK
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1..10").unwrap(), (1..=10).collect::<Vec<_>>());
        assert_eq!(parse_seeds("1..=3,7, 9").unwrap(), vec![1, 2, 3, 7, 9]);
        assert_eq!(parse_seeds("42").unwrap(), vec![42]);
        assert!(parse_seeds("5..1").is_err());
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn flags_override_file_which_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.conf");
        fs::write(&file, "seed = 9\nknn_k = 7\n").unwrap();
        let args = ConfigArgs { config: Some(file), seed: Some("3".into()), ..Default::default() };
        let cfg = args.resolve().unwrap();
        assert_eq!((cfg.seed, cfg.knn_k, cfg.pca_k), (3, 7, 50));
    }

    #[test]
    fn bad_flag_value_is_input_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(["epiwave", "verify-data", "--knn-k", "4"], &mut out, &mut err);
        assert_eq!(code, EXIT_INPUT_ERROR);
        assert!(String::from_utf8(err).unwrap().contains("knn_k"));
        let code = run(["epiwave", "frobnicate"], &mut Vec::new(), &mut Vec::new());
        assert_eq!(code, EXIT_INPUT_ERROR);
    }
}
