//! Run configuration: defaults, a flat `key = value` file format and a
//! digest that pins every setting that can change a computed number.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classifiers::{ClassifierId, Hyperparameters};
use crate::dataset::BinaryCase;
use crate::dwt::{BandId, WaveletFamily};
use crate::features::{ExtractorId, PcaFusionOptions};

pub const DATA_DIR_ENV: &str = "EPIWAVE_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("line {line_no}: expected `key = value`, got `{line}`")]
    Syntax { line_no: usize, line: String },
    #[error("cannot read config file {path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub family: WaveletFamily,
    pub levels: usize,
    pub pca_k: usize,
    pub extractor: ExtractorId,
    pub classifiers: Vec<ClassifierId>,
    pub cases: Vec<BinaryCase>,
    pub knn_k: usize,
    pub svm_c: f64,
    pub seed: u64,
    pub test_fraction: f64,
    pub standardize: bool,
    /// Bands fed to the extractor; `None` means all of them.
    pub fuse_bands: Option<Vec<BandId>>,
    pub zscore_before_pca: bool,
    pub allow_rank_truncation: bool,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_dir: None,
            output_dir: PathBuf::from("epiwave-out"),
            family: WaveletFamily::Db4,
            levels: 5,
            pca_k: 50,
            extractor: ExtractorId::PcaMaxFusion,
            classifiers: ClassifierId::ALL.to_vec(),
            cases: BinaryCase::ALL.to_vec(),
            knn_k: 5,
            svm_c: 1.0,
            seed: 42,
            test_fraction: 0.2,
            standardize: true,
            fuse_bands: None,
            zscore_before_pca: false,
            allow_rank_truncation: false,
            jobs: None,
        }
    }
}

fn invalid(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::InvalidValue { key: key.to_string(), value: value.to_string(), reason: reason.to_string() }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(invalid(key, value, "expected true or false")),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| invalid(key, value, e))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e: T::Err| invalid(key, s, e)))
        .collect()
}

impl RunConfig {
    /// Set one key from its textual form. Keys accept `snake_case` or `kebab-case`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let k = key.as_str();
        match k {
            "data_dir" => self.data_dir = Some(PathBuf::from(value)),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "wavelet_family" | "family" | "wavelet" => self.family = value.parse().map_err(|e| invalid(k, value, e))?,
            "levels" => self.levels = parse_num(k, value)?,
            "pca_k" => self.pca_k = parse_num(k, value)?,
            "extractor" => self.extractor = value.parse().map_err(|e| invalid(k, value, e))?,
            "classifiers" => self.classifiers = parse_list(k, value)?,
            "cases" => self.cases = parse_list(k, value)?,
            "knn_k" => self.knn_k = parse_num(k, value)?,
            "svm_c" => self.svm_c = parse_num(k, value)?,
            "seed" => self.seed = parse_num(k, value)?,
            "test_fraction" => self.test_fraction = parse_num(k, value)?,
            "standardize" => self.standardize = parse_bool(k, value)?,
            "fuse_bands" | "band" => {
                self.fuse_bands = match value.to_ascii_lowercase().as_str() {
                    "all" | "" => None,
                    _ => Some(parse_list(k, value)?),
                }
            }
            "zscore_before_pca" => self.zscore_before_pca = parse_bool(k, value)?,
            "allow_rank_truncation" => self.allow_rank_truncation = parse_bool(k, value)?,
            "jobs" => {
                self.jobs = match value {
                    "auto" | "" => None,
                    _ => Some(parse_num(k, value)?),
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.clone())),
        }
        Ok(())
    }

    /// Apply a flat config text: one `key = value` per line, `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| ConfigError::Syntax { line_no: i + 1, line: raw.to_string() })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        self.apply_text(&text)
    }

    /// Fall back to the environment for the data directory.
    pub fn resolve_data_dir_from_env(&mut self) {
        if self.data_dir.is_none() {
            if let Some(dir) = std::env::var_os(DATA_DIR_ENV).filter(|v| !v.is_empty()) {
                self.data_dir = Some(PathBuf::from(dir));
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.levels == 0 {
            return Err(invalid("levels", "0", "must be at least 1"));
        }
        if self.pca_k == 0 {
            return Err(invalid("pca_k", "0", "must be at least 1"));
        }
        if self.knn_k == 0 || self.knn_k.is_multiple_of(2) {
            return Err(invalid("knn_k", &self.knn_k.to_string(), "must be odd and positive"));
        }
        if !(self.svm_c > 0.0 && self.svm_c.is_finite()) {
            return Err(invalid("svm_c", &self.svm_c.to_string(), "must be positive"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(invalid("test_fraction", &self.test_fraction.to_string(), "must lie strictly between 0 and 1"));
        }
        if self.jobs == Some(0) {
            return Err(invalid("jobs", "0", "must be at least 1"));
        }
        if let Some(bands) = &self.fuse_bands {
            let valid = BandId::canonical(self.levels);
            if bands.is_empty() {
                return Err(invalid("fuse_bands", "", "empty band list"));
            }
            if let Some(bad) = bands.iter().find(|b| !valid.contains(b)) {
                return Err(invalid(
                    "fuse_bands",
                    &bad.to_string(),
                    format!("not produced by a {}-level decomposition", self.levels),
                ));
            }
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> RunConfig {
        RunConfig { seed, ..self.clone() }
    }

    /// Bands to extract from, in canonical order.
    pub fn selected_bands(&self) -> Vec<BandId> {
        let all = BandId::canonical(self.levels);
        match &self.fuse_bands {
            None => all,
            Some(sel) => all.into_iter().filter(|b| sel.contains(b)).collect(),
        }
    }

    /// Settings that influence computed values, as sorted `key -> value`.
    /// Paths, the classifier list, the case list and `jobs` are excluded.
    pub fn digest_entries(&self) -> BTreeMap<&'static str, String> {
        let bands = match &self.fuse_bands {
            None => "all".to_string(),
            Some(_) => self.selected_bands().iter().map(|b| b.to_string()).collect::<Vec<_>>().join(","),
        };
        BTreeMap::from([
            ("wavelet_family", self.family.to_string()),
            ("levels", self.levels.to_string()),
            ("pca_k", self.pca_k.to_string()),
            ("extractor", self.extractor.to_string()),
            ("knn_k", self.knn_k.to_string()),
            ("svm_c", self.svm_c.to_string()),
            ("seed", self.seed.to_string()),
            ("test_fraction", self.test_fraction.to_string()),
            ("standardize", self.standardize.to_string()),
            ("fuse_bands", bands),
            ("zscore_before_pca", self.zscore_before_pca.to_string()),
            ("allow_rank_truncation", self.allow_rank_truncation.to_string()),
        ])
    }

    /// Hex SHA-256 over the sorted digest entries.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.digest_entries() {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    /// Full resolved configuration in the file format accepted by `apply_text`.
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut out = String::new();
        if let Some(d) = &self.data_dir {
            out += &format!("data_dir = {}\n", d.display());
        }
        out += &format!("output_dir = {}\n", self.output_dir.display());
        out += &format!("classifiers = {}\n", join(self.classifiers.iter().map(|c| c.to_string()).collect()));
        out += &format!("cases = {}\n", join(self.cases.iter().map(|c| c.to_string()).collect()));
        if let Some(j) = self.jobs {
            out += &format!("jobs = {j}\n");
        }
        for (k, v) in self.digest_entries() {
            out += &format!("{k} = {v}\n");
        }
        out
    }

    pub fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters { knn_k: self.knn_k, svm_c: self.svm_c, standardize: self.standardize, seed: self.seed }
    }

    pub fn pca_options(&self) -> PcaFusionOptions {
        PcaFusionOptions {
            k: self.pca_k,
            zscore: self.zscore_before_pca,
            allow_rank_truncation: self.allow_rank_truncation,
            bands: Some(self.selected_bands()),
        }
    }
}
