//! Write a synthetic archive with the Bonn layout (five sets x 100 files)
//! for trying the pipeline without the real recordings.
//!
//! cargo run --example surrogate_data -- <dir> [seed]

use std::path::PathBuf;

fn main() {
    let mut args = std::env::args().skip(1);
    let Some(dir) = args.next().map(PathBuf::from) else {
        eprintln!("usage: surrogate_data <dir> [seed]");
        std::process::exit(2);
    };
    let seed = args.next().map_or(1, |s| s.parse().expect("seed must be an integer"));
    epiwave::dataset::synthetic::write_synthetic_dataset(&dir, seed).expect("write surrogate archive");
    println!("wrote 500 files to {}", dir.display());
}
