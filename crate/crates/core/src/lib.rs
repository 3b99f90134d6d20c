//! Streaming, unsupervised fault prediction.
//!
//! Raw samples are conditioned (Kalman / moving average), cut into frames and
//! summarised as four-dimensional feature vectors. A self-organizing map fitted
//! on an initial healthy window turns features into pseudo-labels, an SVM is
//! trained on those labels one point at a time while keeping its dual problem
//! KKT-optimal, and a trend extrapolator forecasts when the anomaly score will
//! cross the detection boundary.
//!
//! [`sim`] provides a deterministic pulse-echo signal generator with a growing
//! fault echo, used for evaluation.

pub mod conditioning;
pub mod engine;
pub mod error;
pub mod signal;
pub mod sim;
pub mod som;
pub mod svm;
pub mod tune;

pub use error::{Error, Result};
pub use signal::{FeatureVector, Frame, Label, Point, RawSample, FEATURE_DIM};
