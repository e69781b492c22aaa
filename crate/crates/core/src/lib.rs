//! Quantum-autoencoder anomaly detection.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix it to `f64`, which is what the command-line tool uses.

// Index loops read closer to the matrix algebra; negated comparisons are
// how NaN gets rejected alongside out-of-range values.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod cae;
pub mod encode;
pub mod error;
pub mod eval;
pub mod features;
pub mod optim;
pub mod persist;
pub mod qae;
pub mod rng;
pub mod scalar;
pub mod sim;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Statevector64 = sim::Statevector<f64>;
pub type Statevector32 = sim::Statevector<f32>;
pub type Circuit64 = sim::Circuit<f64>;
pub type Gate64 = sim::Gate<f64>;
pub type QaeModel64 = qae::QaeModel<f64>;
pub type QaeModel32 = qae::QaeModel<f32>;
pub type CaeModel64 = cae::CaeModel<f64>;
pub type CaeModel32 = cae::CaeModel<f32>;
pub type FeatureScaler64 = encode::FeatureScaler<f64>;
pub type Standardizer64 = cae::Standardizer<f64>;
pub type ModelFile64 = persist::ModelFile<f64>;
