//! Binary soft-margin SVM trained one point at a time.
//!
//! [`SvmModel::learn_one`] and [`SvmModel::unlearn_one`] move a single dual
//! coefficient along the path that keeps every other point KKT-optimal
//! (margin / error / reserve partition). [`batch_train`] solves the same dual
//! from scratch with SMO and serves as the reference solution.

mod batch;
mod checkpoint;
mod kernel;
mod model;

pub use batch::{batch_train, BATCH_TOLERANCE};
pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use kernel::{KernelKind, KernelSpec};
pub use model::{KktViolation, PointSet, SvmModel, SvmParams, TrainedPoint};
