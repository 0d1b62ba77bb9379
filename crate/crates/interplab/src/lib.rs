//! interplab: a teacher-student interpolator laboratory.
//!
//! The crate implements the full experimental loop for studying randomly
//! sampled (near-)interpolators of small neural networks in a noiseless
//! teacher-student setup:
//!
//! * [`linalg`] / [`rng`] — dense matrix arithmetic and deterministic,
//!   splittable random streams,
//! * [`models`] — DLNN/FCDNN architectures, forward/gradient evaluation,
//!   Lipschitz estimation,
//! * [`data`] — teacher generation, dataset sampling, train/test losses,
//! * [`samplers`] — guess-and-check, pattern search, and Adam near-interpolator
//!   samplers,
//! * [`theory`] — closed-form strong-sample-complexity bounds and constructive
//!   teacher-equivalent embeddings,
//! * [`dimest`] — local-PCA intrinsic dimension estimation,
//! * [`harness`] — reproducible experiment orchestration and CSV/JSON emission.
//!
//! Data-parallel inner loops (trials, probes, neighborhoods) run on rayon by
//! default; build with `--no-default-features` for a fully sequential build.
//! Either way outputs are byte-identical: work items own disjoint RNG
//! streams and reductions happen in fixed order.

#![allow(clippy::needless_range_loop)]

pub mod data;
pub mod dimest;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod models;
pub mod parallel;
pub mod rng;
pub mod samplers;
pub mod theory;

pub use error::{Error, Result};
