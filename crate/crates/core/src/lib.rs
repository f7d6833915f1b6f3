//! Benchmarking toolkit for dynamic quantum circuits.
//!
//! Generate a benchmark, simulate it under noise and score the result:
//!
//! ```
//! use dynabench::bench::{Family, FamilyParams};
//! use dynabench::features::feature_vector;
//! use dynabench::scoring::{evaluate, DfeConfig};
//! use dynabench::sim::NoiseModel;
//!
//! let bench = Family::Ghz.spec(5, &FamilyParams::default(), 0)?.generate()?;
//! let x = feature_vector(&bench.circuit, &bench.branch_model)?;
//! assert!(x.get("f00_depth_noff").unwrap() > 0.0);
//!
//! let r = evaluate(&bench, 1000, &DfeConfig::default(), &NoiseModel::ibm_like(), 1)?;
//! assert!(r.score > 0.5 && r.score < 1.0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! The `pipeline` module runs whole suites from a TOML manifest and is what
//! the `dynabench` binary drives.

pub mod bench;
pub mod circuit;
pub mod counts;
pub mod features;
pub mod pipeline;
pub mod scoring;
pub mod sim;
pub mod stats;
