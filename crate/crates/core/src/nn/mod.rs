//! Dense feed-forward networks trained by plain gradient descent.
//!
//! Parameters are stored layer by layer; within a layer the weight matrix is
//! row-major with shape `(out_dim, in_dim)` followed by the bias vector. The
//! flat parameter index used by [`Mlp::param`] and [`ParamGrad::get`] follows
//! the same order.

mod activation;
mod gradcheck;
mod mlp;
mod schedule;
mod train;

pub use activation::{softmax, Activation, OutputActivation};
pub use gradcheck::{grad_check, GradCheckOptions};
pub use mlp::{ForwardCache, InitSpec, Layer, Mlp, ParamGrad};
pub use schedule::LrSchedule;
pub use train::{shuffled_batches, value_and_grad, Evaluation};
