//! Surrogate recordings in the on-disk layout of the Bonn archive.
//!
//! Each set gets coloured background noise plus a set-specific rhythm (alpha
//! for eyes closed, theta for the interictal sets, high-amplitude spike-wave
//! for seizures). The signals only mimic the coarse spectral differences
//! between sets; they exist to exercise ingestion, the pipeline and the CLI
//! when the real archive is not at hand.

use std::f64::consts::TAU;
use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{DatasetSpec, EegSegment, SetLetter};

struct SetProfile {
    noise: f64,
    rhythm_amp: f64,
    rhythm_hz: (f64, f64),
    spike_rate_hz: f64,
    spike_amp: f64,
    spike_wave: bool,
}

fn profile(letter: SetLetter) -> SetProfile {
    match letter {
        SetLetter::A => SetProfile {
            noise: 6.0,
            rhythm_amp: 8.0,
            rhythm_hz: (9.0, 12.0),
            spike_rate_hz: 0.0,
            spike_amp: 0.0,
            spike_wave: false,
        },
        SetLetter::B => SetProfile {
            noise: 6.0,
            rhythm_amp: 35.0,
            rhythm_hz: (8.5, 11.5),
            spike_rate_hz: 0.0,
            spike_amp: 0.0,
            spike_wave: false,
        },
        SetLetter::C => SetProfile {
            noise: 9.0,
            rhythm_amp: 25.0,
            rhythm_hz: (4.0, 7.0),
            spike_rate_hz: 0.05,
            spike_amp: 80.0,
            spike_wave: false,
        },
        SetLetter::D => SetProfile {
            noise: 10.0,
            rhythm_amp: 30.0,
            rhythm_hz: (4.0, 7.0),
            spike_rate_hz: 0.3,
            spike_amp: 150.0,
            spike_wave: false,
        },
        SetLetter::E => SetProfile {
            noise: 14.0,
            rhythm_amp: 250.0,
            rhythm_hz: (2.5, 4.5),
            spike_rate_hz: 1.0,
            spike_amp: 200.0,
            spike_wave: true,
        },
    }
}

/// Deterministic surrogate for one file of one set.
pub fn synthetic_segment(letter: SetLetter, file_index: usize, seed: u64, spec: &DatasetSpec) -> EegSegment {
    let stream = (letter as u64) << 32 | file_index as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream);
    let p = profile(letter);
    let fs = spec.sample_rate_hz;
    let n = spec.samples_per_segment;
    let gain = rng.random_range(0.7..1.3);
    let freq = rng.random_range(p.rhythm_hz.0..p.rhythm_hz.1);
    let phase = rng.random_range(0.0..TAU);
    let white = Normal::new(0.0, p.noise).expect("positive sigma");

    let mut samples = Vec::with_capacity(n);
    let (mut x1, mut x2) = (0.0, 0.0);
    let spike_prob = p.spike_rate_hz / fs;
    let mut spike_left = 0usize;
    for t in 0..n {
        let background = 1.6 * x1 - 0.7 * x2 + white.sample(&mut rng);
        x2 = x1;
        x1 = background;
        let arg = TAU * freq * t as f64 / fs + phase;
        let rhythm = if p.spike_wave { p.rhythm_amp * arg.sin().powi(3) } else { p.rhythm_amp * arg.sin() };
        if spike_left == 0 && rng.random::<f64>() < spike_prob {
            spike_left = 6;
        }
        let spike = if spike_left > 0 {
            spike_left -= 1;
            p.spike_amp * (spike_left as f64 / 6.0)
        } else {
            0.0
        };
        let v = (gain * (background * 0.3 + rhythm + spike)).round().clamp(-2048.0, 2047.0);
        samples.push(v);
    }
    EegSegment { set_letter: letter, file_index, samples }
}

/// Write all five sets as `<prefix>001.txt`..`<prefix>100.txt` into `dir`.
pub fn write_synthetic_dataset(dir: &Path, seed: u64) -> io::Result<()> {
    let spec = DatasetSpec::bonn();
    fs::create_dir_all(dir)?;
    for letter in SetLetter::ALL {
        for i in 0..spec.segments_per_set {
            let seg = synthetic_segment(letter, i, seed, &spec);
            fs::write(dir.join(letter.file_name(i)), seg.to_text())?;
        }
    }
    Ok(())
}
