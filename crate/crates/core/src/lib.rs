//! A small, dependency-light CNN library: depthwise-separable convolution
//! backbone, channel/spatial attention refinement, hand-written backward
//! passes, Adam optimization, an image preprocessing/augmentation pipeline,
//! classifier evaluation metrics, and an exact convolution cost model.
//!
//! Everything runs on the CPU in f64 and is deterministic for a fixed seed.

pub mod attention;
pub mod checkpoint;
pub mod config;
pub mod cost;
pub mod dataset;
pub mod error;
pub mod gradcheck;
pub mod image;
pub mod layers;
pub mod metrics;
pub mod model;
pub mod pnm;
pub mod rng;
pub mod tensor;
pub mod train;

pub use error::{CheckpointError, Error, Result};
pub use tensor::{hadamard, Shape, Tensor};
