//! Dense tensor arithmetic with recorded reverse-mode differentiation.

mod graph;
mod tensor;

pub use graph::{Gradients, Graph, Var};
pub use tensor::{concat, mean, sigmoid, softmax, stack, sum, Tensor};
