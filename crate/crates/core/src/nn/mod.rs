//! Minimal deterministic dense-network engine.
//!
//! Networks are plain values: a list of affine layers each followed by an
//! activation. [`forward`] records every post-activation output so that
//! [`backward`] can run reverse mode without keeping a tape.

mod adam;
pub mod blob;
mod gradcheck;
mod loss;
mod network;

pub use adam::{adam_step, AdamConfig, AdamState, Direction};
pub use gradcheck::{grad_check, grad_check_suite, GradCase, LossKind};
pub use loss::{binary_cross_entropy, cross_entropy, mean_squared, CrossEntropy, LOG_FLOOR};
pub use network::{
    backward, forward, input_gradient, input_gradient_vjp, Activation, Backward, Gradients, InputGradient, Layer,
    LayerGrad, Network, Trace,
};
