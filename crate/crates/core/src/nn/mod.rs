//! Deterministic f32 kernels for the acoustic model.
//!
//! Every reduction runs in a fixed order (bias first, then inputs in index
//! order), so results do not depend on which thread calls a kernel.

mod attention;
mod conv;
mod init;
mod ops;
pub(crate) use ops::{affine_into as ops_affine, batch_norm_inplace};
mod recurrent;
mod tensor;

pub use attention::{dot_attention, Attention};
pub use conv::{conv1d, conv2d};
pub use init::{init_weights, Init, TensorSpec};
pub use ops::{
    batch_norm_inference, linear, linear_vec, relu, relu_inplace, sigmoid, sigmoid_scalar, softmax,
    softmax_inplace, tanh_op, BatchNorm, BN_EPSILON,
};
pub use recurrent::{gru_forward, lstm_forward, GruParams, LstmParams, LstmState};
pub use tensor::{SeededRng, Tensor};
