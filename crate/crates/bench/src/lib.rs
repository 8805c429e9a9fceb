//! Benchmark harness for port-Hamiltonian reduced-order models: model
//! generation and MatrixMarket I/O, experiment configuration, the bound
//! comparison pipeline and its CSV/JSON artifacts.

pub mod config;
pub mod error;
pub mod experiment;
pub mod manifest;
pub mod models;
pub mod mtx;

pub use config::{load_config, parse_config, ExperimentConfig};
pub use error::{BenchError, ParseError};
pub use experiment::{run_experiment, run_prop1, write_artifacts, write_prop1, RunResults};
pub use manifest::{load_matrices, parse_manifest, write_matrices};
pub use models::{generate_msd_chain, MsdChain};
pub use mtx::parse_matrix_market;
