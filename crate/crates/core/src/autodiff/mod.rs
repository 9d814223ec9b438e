//! Dense tensors with a tape-based reverse-mode differentiation engine.
//!
//! The operator set is deliberately narrow: embedding lookup, dilated 1D
//! convolution (causal and non-causal), layer normalization, rectifier,
//! pointwise projection, row gathers and a softmax cross-entropy head,
//! plus the Adam optimizer that consumes the resulting gradients.

mod adam;
mod graph;
pub mod init;
mod scalar;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use graph::{softmax_rows, Graph, Var, LAYER_NORM_EPS};
pub use scalar::Scalar;
pub use tensor::Tensor;
