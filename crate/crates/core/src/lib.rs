pub mod artifacts;
pub mod classifiers;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod dwt;
pub mod eval;
pub mod features;
pub mod linalg;
pub mod pca;
