//! Dense tensors, reverse-mode differentiation and Adam.

mod adam;
pub mod gradcheck;
mod net;
mod ops;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use net::{Layer, ParamSet, Sequential};
pub use ops::{
    activation, bce_logits, conv2d, conv2d_transpose, dense, max_pool2d, sigmoid, softmax_cross_entropy, softplus,
    Activation,
};
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;
