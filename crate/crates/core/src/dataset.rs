//! Bonn EEG corpus: set catalog, text-file ingestion, binary cases and
//! stratified hold-out splits.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod synthetic;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("directory not found: {0}")]
    DirectoryNotFound(PathBuf),
    #[error("missing file {name}")]
    MissingFile { name: String },
    #[error("{name}: {got} samples, expected {want}")]
    MalformedSegment { name: String, got: usize, want: usize },
    #[error("{name}: line {line_no} is not an integer")]
    ParseError { name: String, line_no: usize },
    #[error("unexpected file {name} (set must hold exactly 100 files numbered 000-099 or 001-100)")]
    UnexpectedFile { name: String },
    #[error("{name}: {message}")]
    Io { name: String, message: String },
    #[error("unknown case `{0}` (expected one of A-C, A-D, A-E, B-C, B-D, B-E)")]
    UnknownCase(String),
    #[error("unknown set `{0}` (expected A-E)")]
    UnknownSet(String),
    #[error("set {0} not loaded")]
    SetNotLoaded(SetLetter),
    #[error("degenerate split: class {label} has {class_size} items and {test} test items at fraction {fraction}")]
    DegenerateSplit { label: u8, class_size: usize, test: usize, fraction: f64 },
    #[error("labels must be 0 or 1, found {0}")]
    LabelError(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SetLetter {
    A,
    B,
    C,
    D,
    E,
}

impl SetLetter {
    pub const ALL: [SetLetter; 5] = [SetLetter::A, SetLetter::B, SetLetter::C, SetLetter::D, SetLetter::E];

    pub fn file_prefix(self) -> char {
        match self {
            SetLetter::A => 'Z',
            SetLetter::B => 'O',
            SetLetter::C => 'N',
            SetLetter::D => 'F',
            SetLetter::E => 'S',
        }
    }

    pub fn condition(self) -> &'static str {
        match self {
            SetLetter::A => "healthy, eyes open (surface)",
            SetLetter::B => "healthy, eyes closed (surface)",
            SetLetter::C => "epileptic, seizure-free, opposite hemisphere (intracranial)",
            SetLetter::D => "epileptic, seizure-free, epileptogenic zone (intracranial)",
            SetLetter::E => "epileptic, during seizure (intracranial)",
        }
    }

    /// Canonical file name for a 0-based index, using 1-based numbering as the
    /// public archive does.
    pub fn file_name(self, index: usize) -> String {
        format!("{}{:03}.txt", self.file_prefix(), index + 1)
    }
}

impl fmt::Display for SetLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for SetLetter {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(SetLetter::A),
            "B" => Ok(SetLetter::B),
            "C" => Ok(SetLetter::C),
            "D" => Ok(SetLetter::D),
            "E" => Ok(SetLetter::E),
            _ => Err(DatasetError::UnknownSet(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub samples_per_segment: usize,
    pub segments_per_set: usize,
    pub sets: [SetLetter; 5],
}

impl DatasetSpec {
    pub fn bonn() -> Self {
        DatasetSpec {
            sample_rate_hz: 173.61,
            duration_s: 23.6,
            samples_per_segment: 4097,
            segments_per_set: 100,
            sets: SetLetter::ALL,
        }
    }
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::bonn()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EegSegment {
    pub set_letter: SetLetter,
    /// 0-based position within the set.
    pub file_index: usize,
    pub samples: Vec<f64>,
}

impl EegSegment {
    pub fn name(&self) -> String {
        self.set_letter.file_name(self.file_index)
    }

    /// One integer per line, newline-terminated.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 6);
        for v in &self.samples {
            out.push_str(&format!("{}\n", *v as i64));
        }
        out
    }
}

/// Parse the one-integer-per-line format. Trailing blank lines are ignored.
pub fn parse_segment_text(name: &str, text: &str, want: usize) -> Result<Vec<f64>, DatasetError> {
    let body = text.trim_end();
    let mut samples = Vec::with_capacity(want);
    if !body.is_empty() {
        for (i, line) in body.lines().enumerate() {
            let v: i64 =
                line.trim().parse().map_err(|_| DatasetError::ParseError { name: name.to_string(), line_no: i + 1 })?;
            samples.push(v as f64);
        }
    }
    if samples.len() != want {
        return Err(DatasetError::MalformedSegment { name: name.to_string(), got: samples.len(), want });
    }
    Ok(samples)
}

/// `<prefix><3 digits>.txt`, prefix and extension case-insensitive.
fn parse_file_name(name: &str, prefix: char) -> Option<usize> {
    let bytes = name.as_bytes();
    if bytes.len() != 8 || !name.is_ascii() {
        return None;
    }
    let (head, rest) = name.split_at(1);
    if !head.eq_ignore_ascii_case(&prefix.to_string()) || !rest[3..].eq_ignore_ascii_case(".txt") {
        return None;
    }
    let digits = &rest[..3];
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn matching_files(dir: &Path, letter: SetLetter) -> Vec<(usize, PathBuf, String)> {
    let Ok(entries) = fs::read_dir(dir) else {
        return Vec::new();
    };
    let mut found: Vec<(usize, PathBuf, String)> = entries
        .filter_map(Result::ok)
        .filter(|e| e.path().is_file())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            parse_file_name(&name, letter.file_prefix()).map(|n| (n, e.path(), name))
        })
        .collect();
    found.sort();
    found
}

/// Directory holding a set's files: `dir` itself, or a subdirectory named by
/// the set letter or file prefix (either case).
/// File index -> (path, file name).
type IndexedFiles = BTreeMap<usize, (PathBuf, String)>;

pub fn locate_set_dir(dir: &Path, letter: SetLetter) -> Result<PathBuf, DatasetError> {
    if !dir.is_dir() {
        return Err(DatasetError::DirectoryNotFound(dir.to_path_buf()));
    }
    let prefix = letter.file_prefix();
    let letter_s = letter.to_string();
    let candidates = [
        dir.to_path_buf(),
        dir.join(prefix.to_string()),
        dir.join(prefix.to_ascii_lowercase().to_string()),
        dir.join(&letter_s),
        dir.join(letter_s.to_ascii_lowercase()),
    ];
    Ok(candidates.iter().find(|c| !matching_files(c, letter).is_empty()).cloned().unwrap_or_else(|| dir.to_path_buf()))
}

/// Files of one set keyed by 0-based index, with the numbering convention
/// resolved (000-099 or 001-100).
fn index_set_files(
    dir: &Path,
    letter: SetLetter,
    count: usize,
) -> Result<(IndexedFiles, Vec<DatasetError>), DatasetError> {
    let set_dir = locate_set_dir(dir, letter)?;
    let files = matching_files(&set_dir, letter);
    let zero_based = files.iter().any(|(n, _, _)| *n == 0);
    let offset = if zero_based { 0 } else { 1 };
    let mut indexed = BTreeMap::new();
    let mut problems = Vec::new();
    for (n, path, name) in files {
        if n < offset || n - offset >= count {
            problems.push(DatasetError::UnexpectedFile { name });
            continue;
        }
        indexed.insert(n - offset, (path, name));
    }
    for i in 0..count {
        if !indexed.contains_key(&i) {
            problems.push(DatasetError::MissingFile { name: format!("{}{:03}.txt", letter.file_prefix(), i + offset) });
        }
    }
    Ok((indexed, problems))
}

fn read_segment(
    path: &Path,
    name: &str,
    letter: SetLetter,
    index: usize,
    want: usize,
) -> Result<EegSegment, DatasetError> {
    let text =
        fs::read_to_string(path).map_err(|e| DatasetError::Io { name: name.to_string(), message: e.to_string() })?;
    let samples = parse_segment_text(name, &text, want)?;
    Ok(EegSegment { set_letter: letter, file_index: index, samples })
}

/// Load all segments of one set, sorted by file index.
pub fn load_set(dir: &Path, letter: SetLetter) -> Result<Vec<EegSegment>, DatasetError> {
    load_set_with(dir, letter, &DatasetSpec::bonn())
}

pub fn load_set_with(dir: &Path, letter: SetLetter, spec: &DatasetSpec) -> Result<Vec<EegSegment>, DatasetError> {
    let (indexed, mut problems) = index_set_files(dir, letter, spec.segments_per_set)?;
    if !problems.is_empty() {
        // report missing files before stray ones
        problems.sort_by_key(|p| !matches!(p, DatasetError::MissingFile { .. }));
        return Err(problems.swap_remove(0));
    }
    indexed
        .into_iter()
        .map(|(i, (path, name))| read_segment(&path, &name, letter, i, spec.samples_per_segment))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetAudit {
    pub letter: SetLetter,
    pub files_found: usize,
    pub valid_files: usize,
    pub problems: Vec<DatasetError>,
}

/// Check every file of a set without stopping at the first problem.
pub fn audit_set(dir: &Path, letter: SetLetter, spec: &DatasetSpec) -> Result<SetAudit, DatasetError> {
    let (indexed, mut problems) = index_set_files(dir, letter, spec.segments_per_set)?;
    let files_found =
        indexed.len() + problems.iter().filter(|p| matches!(p, DatasetError::UnexpectedFile { .. })).count();
    let mut valid_files = 0;
    for (i, (path, name)) in &indexed {
        match read_segment(path, name, letter, *i, spec.samples_per_segment) {
            Ok(_) => valid_files += 1,
            Err(e) => problems.push(e),
        }
    }
    Ok(SetAudit { letter, files_found, valid_files, problems })
}

/// One of the six two-set problems: healthy surface set (label 0) against an
/// epileptic set (label 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryCase {
    pub negative: SetLetter,
    pub positive: SetLetter,
}

impl BinaryCase {
    pub const ALL: [BinaryCase; 6] = [
        BinaryCase::new(SetLetter::A, SetLetter::C),
        BinaryCase::new(SetLetter::A, SetLetter::D),
        BinaryCase::new(SetLetter::A, SetLetter::E),
        BinaryCase::new(SetLetter::B, SetLetter::C),
        BinaryCase::new(SetLetter::B, SetLetter::D),
        BinaryCase::new(SetLetter::B, SetLetter::E),
    ];

    const fn new(negative: SetLetter, positive: SetLetter) -> Self {
        BinaryCase { negative, positive }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BinaryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.negative, self.positive)
    }
}

impl FromStr for BinaryCase {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || DatasetError::UnknownCase(s.to_string());
        let (neg, pos) = s.trim().split_once('-').ok_or_else(unknown)?;
        let case = BinaryCase::new(neg.parse().map_err(|_| unknown())?, pos.parse().map_err(|_| unknown())?);
        if BinaryCase::ALL.contains(&case) {
            Ok(case)
        } else {
            Err(unknown())
        }
    }
}

/// Labelled segments of one case: negative set first, then the positive set.
#[derive(Debug, Clone, PartialEq)]
pub struct CasePool {
    pub case: BinaryCase,
    pub segments: Vec<EegSegment>,
    pub labels: Vec<u8>,
}

pub fn make_case(sets: &BTreeMap<SetLetter, Vec<EegSegment>>, case_name: &str) -> Result<CasePool, DatasetError> {
    let case: BinaryCase = case_name.parse()?;
    make_case_for(sets, case)
}

pub fn make_case_for(sets: &BTreeMap<SetLetter, Vec<EegSegment>>, case: BinaryCase) -> Result<CasePool, DatasetError> {
    let neg = sets.get(&case.negative).ok_or(DatasetError::SetNotLoaded(case.negative))?;
    let pos = sets.get(&case.positive).ok_or(DatasetError::SetNotLoaded(case.positive))?;
    let mut segments = Vec::with_capacity(neg.len() + pos.len());
    segments.extend(neg.iter().cloned());
    segments.extend(pos.iter().cloned());
    let labels = std::iter::repeat_n(0u8, neg.len()).chain(std::iter::repeat_n(1u8, pos.len())).collect();
    Ok(CasePool { case, segments, labels })
}

/// Load just the two sets a case needs and build its pool.
pub fn load_case(dir: &Path, case: BinaryCase) -> Result<CasePool, DatasetError> {
    let mut sets = BTreeMap::new();
    for letter in [case.negative, case.positive] {
        sets.insert(letter, load_set(dir, letter)?);
    }
    make_case_for(&sets, case)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub test_fraction: f64,
    /// Ascending pool indices.
    pub train_indices: Vec<usize>,
    /// Ascending pool indices.
    pub test_indices: Vec<usize>,
    /// Label of every pool item, indexed by pool position.
    pub labels: Vec<u8>,
}

impl SplitPlan {
    pub fn train_labels(&self) -> Vec<u8> {
        self.train_indices.iter().map(|&i| self.labels[i]).collect()
    }

    pub fn test_labels(&self) -> Vec<u8> {
        self.test_indices.iter().map(|&i| self.labels[i]).collect()
    }
}

/// Per-class test count, rounding half to even.
pub fn class_test_count(class_size: usize, test_fraction: f64) -> usize {
    (test_fraction * class_size as f64).round_ties_even() as usize
}

/// Seeded stratified hold-out: each class contributes
/// `round(test_fraction * class_size)` test items.
pub fn stratified_split(labels: &[u8], seed: u64, test_fraction: f64) -> Result<SplitPlan, DatasetError> {
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(DatasetError::LabelError(bad));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [0u8, 1] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        let n_test =
            if test_fraction > 0.0 && test_fraction < 1.0 { class_test_count(members.len(), test_fraction) } else { 0 };
        if n_test == 0 || n_test >= members.len() {
            return Err(DatasetError::DegenerateSplit {
                label,
                class_size: members.len(),
                test: n_test,
                fraction: test_fraction,
            });
        }
        members.shuffle(&mut rng);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan { seed, test_fraction, train_indices: train, test_indices: test, labels: labels.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write_set(dir: &Path, letter: SetLetter, first: usize, lines: usize) {
        for i in 0..100 {
            let body: String = (0..lines).map(|j| format!("{}\n", (i * 7 + j) as i64 - 50)).collect();
            fs::write(dir.join(format!("{}{:03}.txt", letter.file_prefix(), first + i)), body).unwrap();
        }
    }

    fn pool_labels() -> Vec<u8> {
        let mut l = vec![0u8; 100];
        l.extend(vec![1u8; 100]);
        l
    }

    #[test]
    fn spec_invariants() {
        let spec = DatasetSpec::bonn();
        assert_eq!((spec.sample_rate_hz * spec.duration_s).floor() as usize, spec.samples_per_segment);
        assert_eq!(spec.sets.len(), 5);
        let prefixes: String = SetLetter::ALL.iter().map(|s| s.file_prefix()).collect();
        assert_eq!(prefixes, "ZONFS");
    }

    #[test]
    fn load_zero_based_set() {
        let dir = tempfile::tempdir().unwrap();
        write_set(dir.path(), SetLetter::A, 0, 4097);
        let segs = load_set(dir.path(), SetLetter::A).unwrap();
        assert_eq!(segs.len(), 100);
        assert!(segs.iter().enumerate().all(|(i, s)| s.file_index == i && s.set_letter == SetLetter::A));
        assert!(segs.iter().all(|s| s.samples.len() == 4097));
        assert_eq!(segs[3].samples[0], 21.0 - 50.0);
    }

    #[test]
    fn load_one_based_set_in_subdirectory_with_upper_extension() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join("N");
        fs::create_dir(&sub).unwrap();
        for i in 0..100 {
            fs::write(sub.join(format!("N{:03}.TXT", i + 1)), "0\n".repeat(4097)).unwrap();
        }
        let segs = load_set(dir.path(), SetLetter::C).unwrap();
        assert_eq!(segs.len(), 100);
        assert!(segs[0].samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn short_file_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        write_set(dir.path(), SetLetter::A, 0, 4097);
        fs::write(dir.path().join("Z042.txt"), "1\n".repeat(4096)).unwrap();
        assert_eq!(
            load_set(dir.path(), SetLetter::A).unwrap_err(),
            DatasetError::MalformedSegment { name: "Z042.txt".into(), got: 4096, want: 4097 }
        );
    }

    #[test]
    fn missing_and_unparsable_files() {
        let dir = tempfile::tempdir().unwrap();
        write_set(dir.path(), SetLetter::E, 1, 4097);
        fs::remove_file(dir.path().join("S017.txt")).unwrap();
        assert_eq!(
            load_set(dir.path(), SetLetter::E).unwrap_err(),
            DatasetError::MissingFile { name: "S017.txt".into() }
        );
        write_set(dir.path(), SetLetter::E, 1, 4097);
        let mut body = "3\n".repeat(10);
        body.push_str("x7\n");
        body.push_str(&"3\n".repeat(4086));
        fs::write(dir.path().join("S050.txt"), body).unwrap();
        assert_eq!(
            load_set(dir.path(), SetLetter::E).unwrap_err(),
            DatasetError::ParseError { name: "S050.txt".into(), line_no: 11 }
        );
    }

    #[test]
    fn both_numbering_conventions_at_once_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_set(dir.path(), SetLetter::B, 0, 4097);
        fs::write(dir.path().join("O100.txt"), "0\n".repeat(4097)).unwrap();
        assert!(matches!(load_set(dir.path(), SetLetter::B), Err(DatasetError::UnexpectedFile { .. })));
    }

    #[test]
    fn missing_directory() {
        assert!(matches!(
            load_set(Path::new("/definitely/not/here"), SetLetter::A),
            Err(DatasetError::DirectoryNotFound(_))
        ));
    }

    #[test]
    fn audit_collects_every_problem() {
        let dir = tempfile::tempdir().unwrap();
        write_set(dir.path(), SetLetter::D, 1, 4097);
        fs::write(dir.path().join("F003.txt"), "1\n".repeat(10)).unwrap();
        fs::write(dir.path().join("F009.txt"), "a\n".repeat(4097)).unwrap();
        let audit = audit_set(dir.path(), SetLetter::D, &DatasetSpec::bonn()).unwrap();
        assert_eq!(audit.files_found, 100);
        assert_eq!(audit.valid_files, 98);
        assert_eq!(audit.problems.len(), 2);
    }

    #[test]
    fn case_parsing() {
        assert_eq!("B-D".parse::<BinaryCase>().unwrap().to_string(), "B-D");
        assert_eq!("A-A".parse::<BinaryCase>().unwrap_err(), DatasetError::UnknownCase("A-A".into()));
        assert!("C-A".parse::<BinaryCase>().is_err());
        assert!("AE".parse::<BinaryCase>().is_err());
    }

    #[test]
    fn case_pool_order() {
        let dir = tempfile::tempdir().unwrap();
        write_set(dir.path(), SetLetter::B, 1, 4097);
        write_set(dir.path(), SetLetter::D, 1, 4097);
        let mut sets = BTreeMap::new();
        sets.insert(SetLetter::B, load_set(dir.path(), SetLetter::B).unwrap());
        sets.insert(SetLetter::D, load_set(dir.path(), SetLetter::D).unwrap());
        let pool = make_case(&sets, "B-D").unwrap();
        assert_eq!(pool.segments.len(), 200);
        assert_eq!(pool.segments[0].name(), "O001.txt");
        assert_eq!(pool.segments[100].name(), "F001.txt");
        assert_eq!(pool.labels, pool_labels());
        assert!(matches!(make_case(&sets, "A-E"), Err(DatasetError::SetNotLoaded(SetLetter::A))));
        assert!(matches!(make_case(&sets, "A-A"), Err(DatasetError::UnknownCase(_))));
    }

    #[test]
    fn split_is_deterministic_and_stratified() {
        let labels = pool_labels();
        let a = stratified_split(&labels, 7, 0.2).unwrap();
        let b = stratified_split(&labels, 7, 0.2).unwrap();
        assert_eq!(a, b);
        let test_labels = a.test_labels();
        assert_eq!(test_labels.iter().filter(|&&l| l == 0).count(), 20);
        assert_eq!(test_labels.iter().filter(|&&l| l == 1).count(), 20);
        assert_eq!(a.train_indices.len(), 160);
        assert_ne!(a.test_indices, stratified_split(&labels, 8, 0.2).unwrap().test_indices);
    }

    #[test]
    fn degenerate_split() {
        let labels = pool_labels();
        assert!(matches!(stratified_split(&labels, 7, 0.005), Err(DatasetError::DegenerateSplit { test: 0, .. })));
        assert!(matches!(stratified_split(&labels, 7, 0.999), Err(DatasetError::DegenerateSplit { .. })));
        assert!(stratified_split(&labels, 7, 0.0).is_err());
        assert!(stratified_split(&labels, 7, 1.5).is_err());
        assert_eq!(stratified_split(&[0, 2], 1, 0.5).unwrap_err(), DatasetError::LabelError(2));
    }

    proptest! {
        #[test]
        fn split_partitions_pool(seed in any::<u64>(), frac in 0.01f64..0.99) {
            let labels = pool_labels();
            let want = class_test_count(100, frac);
            match stratified_split(&labels, seed, frac) {
                Ok(plan) => {
                    let mut all: Vec<usize> = plan.train_indices.iter().chain(&plan.test_indices).copied().collect();
                    all.sort_unstable();
                    prop_assert_eq!(all, (0..200).collect::<Vec<_>>());
                    for label in [0u8, 1] {
                        prop_assert_eq!(plan.test_labels().iter().filter(|&&l| l == label).count(), want);
                    }
                }
                Err(_) => prop_assert!(want == 0 || want >= 100),
            }
        }

        #[test]
        fn segment_text_round_trip(values in prop::collection::vec(-2048i64..2048, 1..200)) {
            let seg = EegSegment {
                set_letter: SetLetter::C,
                file_index: 0,
                samples: values.iter().map(|&v| v as f64).collect(),
            };
            let back = parse_segment_text("x", &seg.to_text(), values.len()).unwrap();
            prop_assert_eq!(back, seg.samples);
        }
    }
}
