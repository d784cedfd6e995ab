//! Bilinear attention over a sequence of hidden states and average pooling.

use crate::error::{Error, Result};
use crate::math::{Graph, Tensor, Var};

/// Output of one attention pass.
#[derive(Debug, Clone, Copy)]
pub struct Attended {
    /// Normalized weights, `None` when the sequence is empty.
    pub weights: Option<Var>,
    pub representation: Var,
}

/// `score_i = tanh(h_i · W · q + b)`, `α = softmax(score)`, `r = Σ α_i h_i`.
///
/// `weight` is `H × Q` for states of width `H` and a query of width `Q`;
/// `bias` has shape `[1]`. An empty sequence yields no weights and the zero
/// vector.
pub fn attend(graph: &mut Graph, states: &[Var], query: Var, weight: Var, bias: Var) -> Result<Attended> {
    let w_shape = graph.shape(weight).to_vec();
    let &[rows, cols] = w_shape.as_slice() else {
        return Err(Error::shape("attend", &w_shape, graph.shape(query)));
    };
    if graph.shape(query) != [cols] {
        return Err(Error::shape("attend", &w_shape, graph.shape(query)));
    }
    if let Some(bad) = states.iter().find(|&&h| graph.shape(h) != [rows]) {
        return Err(Error::shape("attend", &w_shape, graph.shape(*bad)));
    }
    if states.is_empty() {
        return Ok(Attended {
            weights: None,
            representation: graph.constant(Tensor::zeros(&[rows])),
        });
    }
    let hidden = graph.stack(states)?;
    let projected = graph.matmul(weight, query)?;
    let scores = graph.matmul(hidden, projected)?;
    let scores = graph.add_scalar(scores, bias)?;
    let scores = graph.tanh(scores);
    let alpha = graph.softmax(scores)?;
    let representation = graph.matmul(alpha, hidden)?;
    Ok(Attended {
        weights: Some(alpha),
        representation,
    })
}

/// Elementwise mean of the states; errors on an empty sequence.
pub fn pool(graph: &mut Graph, states: &[Var]) -> Result<Var> {
    if states.is_empty() {
        return Err(Error::Domain("average pooling over an empty sequence".into()));
    }
    graph.mean(states)
}

/// Mean of the states, or the zero vector of width `width` when empty.
pub(crate) fn pool_or_zero(graph: &mut Graph, states: &[Var], width: usize) -> Result<Var> {
    if states.is_empty() {
        Ok(graph.constant(Tensor::zeros(&[width])))
    } else {
        graph.mean(states)
    }
}
