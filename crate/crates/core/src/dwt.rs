//! One-dimensional discrete wavelet transform.
//!
//! Orthogonal two-channel filter banks (Haar, DB2, DB4), a single Mallat
//! analysis/synthesis stage with half-sample symmetric boundary extension, and
//! the multilevel decomposition that produces the `A5, D5, .., D1` bands.
//!
//! At 173.61 Hz the dyadic bands of a 5-level decomposition cover roughly:
//!
//! | band | Hz          |
//! |------|-------------|
//! | D1   | 43.4 – 86.8 |
//! | D2   | 21.7 – 43.4 |
//! | D3   | 10.9 – 21.7 |
//! | D4   | 5.4 – 10.9  |
//! | D5   | 2.7 – 5.4   |
//! | A5   | 0 – 2.7     |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DwtError {
    #[error("unsupported wavelet family `{0}` (expected haar, db2 or db4)")]
    UnsupportedFamily(String),
    #[error("signal of length {0} is too short for a DWT step (need at least 2 samples)")]
    SignalTooShort(usize),
    #[error("band length mismatch: {detail}")]
    BandLengthMismatch { detail: String },
    #[error("band {0} missing from decomposition")]
    BandMissing(BandId),
    #[error("{levels}-level decomposition impossible for a signal of {signal_len} samples")]
    DecompositionTooDeep { levels: usize, signal_len: usize },
    #[error("decomposition uses {found} but filter bank is {expected}")]
    FamilyMismatch { expected: WaveletFamily, found: WaveletFamily },
    #[error("requested reconstruction of {requested} samples but only {available} are available")]
    ReconstructionLength { requested: usize, available: usize },
    #[error("invalid band name `{0}`")]
    InvalidBandName(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveletFamily {
    Haar,
    Db2,
    Db4,
}

impl WaveletFamily {
    pub const ALL: [WaveletFamily; 3] = [WaveletFamily::Haar, WaveletFamily::Db2, WaveletFamily::Db4];

    pub fn vanishing_moments(self) -> usize {
        match self {
            WaveletFamily::Haar => 1,
            WaveletFamily::Db2 => 2,
            WaveletFamily::Db4 => 4,
        }
    }

    pub fn filter_len(self) -> usize {
        2 * self.vanishing_moments()
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveletFamily::Haar => "Haar",
            WaveletFamily::Db2 => "DB2",
            WaveletFamily::Db4 => "DB4",
        })
    }
}

impl FromStr for WaveletFamily {
    type Err = DwtError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(WaveletFamily::Haar),
            "db2" => Ok(WaveletFamily::Db2),
            "db4" => Ok(WaveletFamily::Db4),
            _ => Err(DwtError::UnsupportedFamily(s.to_string())),
        }
    }
}

// Daubechies 8-tap decomposition low-pass, obtained by spectral factorization
// at 40 significant digits and rounded to f64.
#[allow(clippy::excessive_precision)]
const DB4_ANALYSIS_LOW: [f64; 8] = [
    -0.010597401785069032,
    0.032883011666885200,
    0.030841381835560764,
    -0.18703481171909308,
    -0.027983769416859854,
    0.63088076792985891,
    0.71484657055291565,
    0.23037781330889650,
];

/// Orthogonal quadrature mirror filter bank.
///
/// `analysis_low` is the convolution kernel of the low-pass branch and
/// `analysis_high[k] = (-1)^k * analysis_low[L-1-k]`. Synthesis filters are the
/// time-reversed analysis filters.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadFilterBank {
    pub family: WaveletFamily,
    pub analysis_low: Vec<f64>,
    pub analysis_high: Vec<f64>,
    pub synthesis_low: Vec<f64>,
    pub synthesis_high: Vec<f64>,
}

impl QuadFilterBank {
    pub fn len(&self) -> usize {
        self.analysis_low.len()
    }

    pub fn is_empty(&self) -> bool {
        self.analysis_low.is_empty()
    }
}

pub fn build_filters(family: WaveletFamily) -> QuadFilterBank {
    let analysis_low: Vec<f64> = match family {
        WaveletFamily::Haar => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
        WaveletFamily::Db2 => {
            let s3 = 3f64.sqrt();
            let norm = 4.0 * std::f64::consts::SQRT_2;
            // reversed scaling sequence (1+√3, 3+√3, 3−√3, 1−√3) / 4√2
            vec![(1.0 - s3) / norm, (3.0 - s3) / norm, (3.0 + s3) / norm, (1.0 + s3) / norm]
        }
        WaveletFamily::Db4 => DB4_ANALYSIS_LOW.to_vec(),
    };
    let len = analysis_low.len();
    let analysis_high: Vec<f64> = (0..len)
        .map(|k| {
            let v = analysis_low[len - 1 - k];
            if k % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect();
    let synthesis_low = analysis_low.iter().rev().copied().collect();
    let synthesis_high = analysis_high.iter().rev().copied().collect();
    QuadFilterBank { family, analysis_low, analysis_high, synthesis_low, synthesis_high }
}

/// Output length of one analysis stage under symmetric extension.
pub fn coefficient_len(signal_len: usize, filter_len: usize) -> usize {
    (signal_len + filter_len - 1) / 2
}

/// Index into a half-sample symmetric extension of a length-`n` signal.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// One Mallat analysis stage: symmetric-pad, convolve, keep odd samples.
pub fn dwt_step(signal: &[f64], bank: &QuadFilterBank) -> Result<(Vec<f64>, Vec<f64>), DwtError> {
    let n = signal.len();
    if n < 2 {
        return Err(DwtError::SignalTooShort(n));
    }
    let taps = bank.len();
    let out_len = coefficient_len(n, taps);
    let mut approx = Vec::with_capacity(out_len);
    let mut detail = Vec::with_capacity(out_len);
    for k in 0..out_len {
        let centre = 2 * k as isize + 1;
        let mut lo = 0.0;
        let mut hi = 0.0;
        if centre >= taps as isize - 1 && (centre as usize) < n {
            for j in 0..taps {
                let x = signal[centre as usize - j];
                lo += bank.analysis_low[j] * x;
                hi += bank.analysis_high[j] * x;
            }
        } else {
            for j in 0..taps {
                let x = signal[reflect(centre - j as isize, n)];
                lo += bank.analysis_low[j] * x;
                hi += bank.analysis_high[j] * x;
            }
        }
        approx.push(lo);
        detail.push(hi);
    }
    Ok((approx, detail))
}

/// Number of samples one synthesis stage can produce from `coeff_len` coefficients.
pub fn reconstruction_len(coeff_len: usize, filter_len: usize) -> usize {
    (2 * coeff_len + 2).saturating_sub(filter_len)
}

/// One synthesis stage: upsample, convolve with the synthesis filters, sum and
/// crop to `output_len` samples.
///
/// For a signal `x` of length `n`, `idwt_step(dwt_step(x), n)` returns `x`.
pub fn idwt_step(
    approx: &[f64],
    detail: &[f64],
    bank: &QuadFilterBank,
    output_len: usize,
) -> Result<Vec<f64>, DwtError> {
    if approx.len() != detail.len() {
        return Err(DwtError::BandLengthMismatch {
            detail: format!("approximation has {} coefficients, detail has {}", approx.len(), detail.len()),
        });
    }
    let m = approx.len();
    let taps = bank.len();
    let available = reconstruction_len(m, taps);
    if output_len > available {
        return Err(DwtError::ReconstructionLength { requested: output_len, available });
    }
    let mut out = vec![0.0; output_len];
    for (i, slot) in out.iter_mut().enumerate() {
        // x[i] = Σ_k a[k]·g0[t] + d[k]·g1[t], t = i + L − 2 − 2k ∈ [0, L)
        let shifted = i + taps - 2;
        let k_hi = (shifted / 2).min(m - 1);
        let k_lo = (shifted + 1).saturating_sub(taps).div_ceil(2);
        let mut acc = 0.0;
        for k in k_lo..=k_hi {
            let t = shifted - 2 * k;
            acc += approx[k] * bank.synthesis_low[t] + detail[k] * bank.synthesis_high[t];
        }
        *slot = acc;
    }
    Ok(out)
}

/// Name of one coefficient band: `A<level>` or `D<level>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BandId {
    Approx(usize),
    Detail(usize),
}

impl BandId {
    /// Bands of an `levels`-deep decomposition in canonical order `A_L, D_L, .., D1`.
    pub fn canonical(levels: usize) -> Vec<BandId> {
        std::iter::once(BandId::Approx(levels)).chain((1..=levels).rev().map(BandId::Detail)).collect()
    }
}

impl fmt::Display for BandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandId::Approx(l) => write!(f, "A{l}"),
            BandId::Detail(l) => write!(f, "D{l}"),
        }
    }
}

impl FromStr for BandId {
    type Err = DwtError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_uppercase();
        // accept the CA5/CD1 spelling as well
        let t = t.strip_prefix('C').unwrap_or(&t);
        let bad = || DwtError::InvalidBandName(s.to_string());
        let (kind, level) = t.split_at_checked(1).ok_or_else(bad)?;
        let level: usize = level.parse().map_err(|_| bad())?;
        if level == 0 {
            return Err(bad());
        }
        match kind {
            "A" => Ok(BandId::Approx(level)),
            "D" => Ok(BandId::Detail(level)),
            _ => Err(bad()),
        }
    }
}

/// Bands of a multilevel decomposition, stored in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    family: WaveletFamily,
    signal_len: usize,
    levels: usize,
    bands: Vec<(BandId, Vec<f64>)>,
}

impl WaveletDecomposition {
    /// Assemble from raw parts (e.g. when reading a band artifact). Bands are
    /// reordered canonically; no length validation happens until `waverec`.
    pub fn from_parts(
        family: WaveletFamily,
        signal_len: usize,
        levels: usize,
        mut bands: Vec<(BandId, Vec<f64>)>,
    ) -> Self {
        let order = BandId::canonical(levels);
        bands.sort_by_key(|(id, _)| order.iter().position(|o| o == id).unwrap_or(usize::MAX));
        WaveletDecomposition { family, signal_len, levels, bands }
    }

    pub fn family(&self) -> WaveletFamily {
        self.family
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn band(&self, id: BandId) -> Option<&[f64]> {
        self.bands.iter().find(|(b, _)| *b == id).map(|(_, v)| v.as_slice())
    }

    pub fn bands(&self) -> impl Iterator<Item = (BandId, &[f64])> {
        self.bands.iter().map(|(b, v)| (*b, v.as_slice()))
    }

    pub fn remove_band(&mut self, id: BandId) -> Option<Vec<f64>> {
        let pos = self.bands.iter().position(|(b, _)| *b == id)?;
        Some(self.bands.remove(pos).1)
    }

    pub fn band_mut(&mut self, id: BandId) -> Option<&mut Vec<f64>> {
        self.bands.iter_mut().find(|(b, _)| *b == id).map(|(_, v)| v)
    }
}

/// Coefficient counts `[len_0 = n, len_1, .., len_levels]` of the approximation path.
pub fn level_lengths(signal_len: usize, filter_len: usize, levels: usize) -> Vec<usize> {
    let mut lens = Vec::with_capacity(levels + 1);
    lens.push(signal_len);
    for _ in 0..levels {
        let prev = *lens.last().unwrap();
        lens.push(coefficient_len(prev, filter_len));
    }
    lens
}

/// Multilevel decomposition iterating [`dwt_step`] on the approximation branch.
pub fn wavedec(signal: &[f64], bank: &QuadFilterBank, levels: usize) -> Result<WaveletDecomposition, DwtError> {
    let n = signal.len();
    if n < 2 {
        return Err(DwtError::SignalTooShort(n));
    }
    let lens = level_lengths(n, bank.len(), levels);
    // every analysis stage needs two input samples; the deepest approximation may be a single one
    if levels == 0 || lens[..levels].iter().any(|&l| l < 2) {
        return Err(DwtError::DecompositionTooDeep { levels, signal_len: n });
    }
    let mut details = Vec::with_capacity(levels);
    let mut approx = signal.to_vec();
    for _ in 0..levels {
        let (a, d) = dwt_step(&approx, bank)?;
        details.push(d);
        approx = a;
    }
    let mut bands = Vec::with_capacity(levels + 1);
    bands.push((BandId::Approx(levels), approx));
    for (level, d) in details.into_iter().enumerate().rev() {
        bands.push((BandId::Detail(level + 1), d));
    }
    Ok(WaveletDecomposition { family: bank.family, signal_len: n, levels, bands })
}

/// Inverse of [`wavedec`].
pub fn waverec(dec: &WaveletDecomposition, bank: &QuadFilterBank) -> Result<Vec<f64>, DwtError> {
    if dec.family != bank.family {
        return Err(DwtError::FamilyMismatch { expected: bank.family, found: dec.family });
    }
    let levels = dec.levels;
    let lens = level_lengths(dec.signal_len, bank.len(), levels);
    for id in BandId::canonical(levels) {
        let band = dec.band(id).ok_or(DwtError::BandMissing(id))?;
        let level = match id {
            BandId::Approx(l) | BandId::Detail(l) => l,
        };
        if band.len() != lens[level] {
            return Err(DwtError::BandLengthMismatch {
                detail: format!("{id} has {} coefficients, expected {}", band.len(), lens[level]),
            });
        }
    }
    let mut approx = dec.band(BandId::Approx(levels)).unwrap().to_vec();
    for level in (1..=levels).rev() {
        let detail = dec.band(BandId::Detail(level)).unwrap();
        approx = idwt_step(&approx, detail, bank, lens[level - 1])?;
    }
    Ok(approx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-100.0..100.0)).collect()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn haar_closed_form() {
        let bank = build_filters(WaveletFamily::Haar);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(bank.analysis_low, vec![s, s]);
        assert_eq!(bank.analysis_high, vec![s, -s]);
    }

    #[test]
    fn filter_invariants_all_families() {
        for family in WaveletFamily::ALL {
            let bank = build_filters(family);
            let len = bank.len();
            assert_eq!(len, family.filter_len());
            for f in [&bank.analysis_high, &bank.synthesis_low, &bank.synthesis_high] {
                assert_eq!(f.len(), len);
            }
            let energy: f64 = bank.analysis_low.iter().map(|h| h * h).sum();
            assert!((energy - 1.0).abs() < 1e-12, "{family}: energy {energy}");
            let sum_lo: f64 = bank.analysis_low.iter().sum();
            assert!((sum_lo - std::f64::consts::SQRT_2).abs() < 1e-12, "{family}");
            let sum_hi: f64 = bank.analysis_high.iter().sum();
            assert!(sum_hi.abs() < 1e-12, "{family}");
            for k in 0..len {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(bank.analysis_high[k], sign * bank.analysis_low[len - 1 - k]);
                assert_eq!(bank.synthesis_low[k], bank.analysis_low[len - 1 - k]);
            }
            // even-shift orthogonality
            for shift in (2..len).step_by(2) {
                let dot: f64 = (0..len - shift).map(|k| bank.analysis_low[k] * bank.analysis_low[k + shift]).sum();
                assert!(dot.abs() < 1e-12, "{family} shift {shift}: {dot}");
            }
        }
    }

    #[test]
    fn vanishing_moments() {
        for family in WaveletFamily::ALL {
            let bank = build_filters(family);
            for p in 0..family.vanishing_moments() as i32 {
                let m: f64 = bank.analysis_high.iter().enumerate().map(|(k, h)| (k as f64).powi(p) * h).sum();
                let scale = (bank.len() as f64).powi(p);
                assert!(m.abs() < 1e-12 * scale.max(1.0), "{family} moment {p}: {m}");
            }
        }
    }

    #[test]
    fn parse_family_and_band() {
        assert_eq!("db4".parse::<WaveletFamily>().unwrap(), WaveletFamily::Db4);
        assert_eq!("HAAR".parse::<WaveletFamily>().unwrap(), WaveletFamily::Haar);
        assert!(matches!("sym8".parse::<WaveletFamily>(), Err(DwtError::UnsupportedFamily(_))));
        assert_eq!("A5".parse::<BandId>().unwrap(), BandId::Approx(5));
        assert_eq!("cd3".parse::<BandId>().unwrap(), BandId::Detail(3));
        assert!("X1".parse::<BandId>().is_err());
        assert!("D0".parse::<BandId>().is_err());
        assert_eq!(BandId::Detail(2).to_string(), "D2");
    }

    #[test]
    fn constant_signal_haar() {
        let bank = build_filters(WaveletFamily::Haar);
        let c = 3.5;
        let (a, d) = dwt_step(&[c; 16], &bank).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12));
        assert!(a.iter().all(|v| (v - c * std::f64::consts::SQRT_2).abs() < 1e-12));
    }

    #[test]
    fn step_output_length() {
        let bank = build_filters(WaveletFamily::Db4);
        let (a, d) = dwt_step(&random_signal(10, 1), &bank).unwrap();
        assert_eq!(a.len(), 8);
        assert_eq!(d.len(), 8);
    }

    #[test]
    fn step_rejects_short_signal() {
        let bank = build_filters(WaveletFamily::Haar);
        assert_eq!(dwt_step(&[1.0], &bank), Err(DwtError::SignalTooShort(1)));
        assert_eq!(dwt_step(&[], &bank), Err(DwtError::SignalTooShort(0)));
    }

    // Literal oracle: materialize the padded signal, run a full linear
    // convolution, then decimate.
    fn pad_convolve_decimate(x: &[f64], filter: &[f64]) -> Vec<f64> {
        let n = x.len();
        let l = filter.len();
        let mut padded = Vec::new();
        for i in 0..(l - 1) {
            padded.push(x[l - 2 - i]);
        }
        padded.extend_from_slice(x);
        for i in 0..(l - 1) {
            padded.push(x[n - 1 - i]);
        }
        let full: Vec<f64> = (0..padded.len() + l - 1)
            .map(|i| (0..l).filter(|&j| i >= j && i - j < padded.len()).map(|j| filter[j] * padded[i - j]).sum())
            .collect();
        // full[i] corresponds to centre i - (l - 1) on the unpadded axis
        let out_len = coefficient_len(n, l);
        (0..out_len).map(|k| full[2 * k + 1 + (l - 1)]).collect()
    }

    #[test]
    fn step_matches_convolution_oracle() {
        for family in WaveletFamily::ALL {
            let bank = build_filters(family);
            let x = random_signal(32, 7);
            let (a, d) = dwt_step(&x, &bank).unwrap();
            assert!(max_abs_diff(&a, &pad_convolve_decimate(&x, &bank.analysis_low)) < 1e-12);
            assert!(max_abs_diff(&d, &pad_convolve_decimate(&x, &bank.analysis_high)) < 1e-12);
        }
    }

    #[test]
    fn step_round_trip_haar_64() {
        let bank = build_filters(WaveletFamily::Haar);
        let x = random_signal(64, 3);
        let (a, d) = dwt_step(&x, &bank).unwrap();
        let y = idwt_step(&a, &d, &bank, x.len()).unwrap();
        assert!(max_abs_diff(&x, &y) < 1e-10);
    }

    #[test]
    fn step_round_trip_db4_segment_length() {
        let bank = build_filters(WaveletFamily::Db4);
        let x = random_signal(4097, 4);
        let (a, d) = dwt_step(&x, &bank).unwrap();
        let y = idwt_step(&a, &d, &bank, x.len()).unwrap();
        assert!(max_abs_diff(&x, &y) < 1e-8);
    }

    #[test]
    fn idwt_rejects_mismatched_bands() {
        let bank = build_filters(WaveletFamily::Haar);
        let r = idwt_step(&[0.0; 5], &[0.0; 6], &bank, 8);
        assert!(matches!(r, Err(DwtError::BandLengthMismatch { .. })));
        let r = idwt_step(&[0.0; 5], &[0.0; 5], &bank, 11);
        assert!(matches!(r, Err(DwtError::ReconstructionLength { .. })));
    }

    #[test]
    fn segment_band_lengths_db4() {
        let bank = build_filters(WaveletFamily::Db4);
        let dec = wavedec(&random_signal(4097, 5), &bank, 5).unwrap();
        let lens: Vec<(String, usize)> = dec.bands().map(|(b, v)| (b.to_string(), v.len())).collect();
        let expected = [("A5", 134), ("D5", 134), ("D4", 262), ("D3", 518), ("D2", 1029), ("D1", 2052)];
        assert_eq!(lens.len(), 6);
        for ((name, len), (en, el)) in lens.iter().zip(expected) {
            assert_eq!((name.as_str(), *len), (en, el));
        }
    }

    #[test]
    fn zero_signal_gives_zero_bands() {
        let bank = build_filters(WaveletFamily::Db4);
        let dec = wavedec(&[0.0; 300], &bank, 5).unwrap();
        assert!(dec.bands().all(|(_, v)| v.iter().all(|&c| c == 0.0)));
        assert!(waverec(&dec, &bank).unwrap().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn too_deep_for_haar() {
        let bank = build_filters(WaveletFamily::Haar);
        // 8 -> 4 -> 2 -> 1, and the single sample cannot be split again
        assert!(wavedec(&[1.0; 8], &bank, 3).is_ok());
        assert_eq!(
            wavedec(&[1.0; 8], &bank, 4).unwrap_err(),
            DwtError::DecompositionTooDeep { levels: 4, signal_len: 8 }
        );
    }

    #[test]
    fn waverec_missing_band() {
        let bank = build_filters(WaveletFamily::Db4);
        let mut dec = wavedec(&random_signal(256, 9), &bank, 5).unwrap();
        dec.remove_band(BandId::Detail(3));
        assert_eq!(waverec(&dec, &bank), Err(DwtError::BandMissing(BandId::Detail(3))));
    }

    #[test]
    fn waverec_length_and_family_checks() {
        let bank = build_filters(WaveletFamily::Db4);
        let mut dec = wavedec(&random_signal(256, 9), &bank, 5).unwrap();
        assert!(matches!(waverec(&dec, &build_filters(WaveletFamily::Db2)), Err(DwtError::FamilyMismatch { .. })));
        dec.band_mut(BandId::Detail(2)).unwrap().pop();
        assert!(matches!(waverec(&dec, &bank), Err(DwtError::BandLengthMismatch { .. })));
    }

    #[test]
    fn segment_round_trip_through_all_bands() {
        let bank = build_filters(WaveletFamily::Db4);
        let x = random_signal(4097, 11);
        let dec = wavedec(&x, &bank, 5).unwrap();
        let y = waverec(&dec, &bank).unwrap();
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_abs_diff(&x, &y) / scale < 1e-8);
    }

    proptest! {
        #[test]
        fn perfect_reconstruction(
            xs in prop::collection::vec(-1.0e3f64..1.0e3, 32..600),
            fam in 0usize..3,
        ) {
            let bank = build_filters(WaveletFamily::ALL[fam]);
            let dec = wavedec(&xs, &bank, 5).unwrap();
            let y = waverec(&dec, &bank).unwrap();
            let scale = xs.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
            prop_assert!(max_abs_diff(&xs, &y) / scale < 1e-8);
        }

        #[test]
        fn linearity(
            pair in (32usize..300).prop_flat_map(|n| (
                prop::collection::vec(-100.0f64..100.0, n),
                prop::collection::vec(-100.0f64..100.0, n),
            )),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
            fam in 0usize..3,
        ) {
            let (x, y) = pair;
            let bank = build_filters(WaveletFamily::ALL[fam]);
            let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
            let dx = wavedec(&x, &bank, 5).unwrap();
            let dy = wavedec(&y, &bank, 5).unwrap();
            let dm = wavedec(&mix, &bank, 5).unwrap();
            for ((bm, vm), ((_, vx), (_, vy))) in dm.bands().zip(dx.bands().zip(dy.bands())) {
                for i in 0..vm.len() {
                    let expect = alpha * vx[i] + beta * vy[i];
                    prop_assert!((vm[i] - expect).abs() < 1e-10 * (1.0 + expect.abs()), "{bm}");
                }
            }
        }

        #[test]
        fn constants_only_reach_approximation(
            c in -500.0f64..500.0,
            n in 32usize..400,
            fam in 0usize..3,
        ) {
            let bank = build_filters(WaveletFamily::ALL[fam]);
            let dec = wavedec(&vec![c; n], &bank, 5).unwrap();
            for (band, v) in dec.bands() {
                if let BandId::Detail(_) = band {
                    prop_assert!(v.iter().all(|d| d.abs() < 1e-10 * (1.0 + c.abs())), "{band}");
                }
            }
        }

        #[test]
        fn band_length_recurrence(n in 2usize..5000, fam in 0usize..3) {
            let bank = build_filters(WaveletFamily::ALL[fam]);
            let lens = level_lengths(n, bank.len(), 5);
            if let Ok(dec) = wavedec(&vec![1.0; n], &bank, 5) {
                for (band, v) in dec.bands() {
                    let level = match band { BandId::Approx(l) | BandId::Detail(l) => l };
                    prop_assert_eq!(v.len(), lens[level]);
                }
            }
        }
    }
}
