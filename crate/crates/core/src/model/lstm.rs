//! Standard LSTM cell (input, forget, output sigmoid gates and a tanh
//! candidate, no peepholes) and the bidirectional encoder built on it.
//!
//! Gate pre-activations are packed in the order `[i; f; o; g]`, so
//! `w_input` is `4·d_h × d`, `w_hidden` is `4·d_h × d_h` and `bias` has
//! `4·d_h` entries.

use rand::Rng;

use super::params::{BoundParams, ParamId, ParamKind, ParamStore};
use crate::error::{Error, Result};
use crate::math::{Graph, Tensor, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LstmParams {
    pub w_input: ParamId,
    pub w_hidden: ParamId,
    pub bias: ParamId,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

impl LstmParams {
    /// Weights from `U(-bound, bound)`, biases zero.
    pub fn init<R: Rng + ?Sized>(
        store: &mut ParamStore,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        bound: f64,
        rng: &mut R,
    ) -> Self {
        let gates = 4 * hidden_dim;
        LstmParams {
            w_input: store.add(
                format!("{prefix}.w_input"),
                ParamKind::Weight,
                Tensor::uniform(&[gates, input_dim], bound, rng),
            ),
            w_hidden: store.add(
                format!("{prefix}.w_hidden"),
                ParamKind::Weight,
                Tensor::uniform(&[gates, hidden_dim], bound, rng),
            ),
            bias: store.add(format!("{prefix}.bias"), ParamKind::Bias, Tensor::zeros(&[gates])),
            input_dim,
            hidden_dim,
        }
    }

    pub fn vars(&self, bound: &BoundParams) -> LstmVars {
        LstmVars {
            w_input: bound.var(self.w_input),
            w_hidden: bound.var(self.w_hidden),
            bias: bound.var(self.bias),
            hidden_dim: self.hidden_dim,
        }
    }
}

/// An LSTM's weights as graph nodes.
#[derive(Debug, Clone, Copy)]
pub struct LstmVars {
    pub w_input: Var,
    pub w_hidden: Var,
    pub bias: Var,
    pub hidden_dim: usize,
}

/// One recurrence step; returns `(h, c)`.
pub fn lstm_step(graph: &mut Graph, x: Var, h_prev: Var, c_prev: Var, p: &LstmVars) -> Result<(Var, Var)> {
    let dh = p.hidden_dim;
    if graph.shape(h_prev) != [dh] || graph.shape(c_prev) != [dh] {
        return Err(Error::shape("lstm_step", graph.shape(h_prev), &[dh]));
    }
    let zx = graph.matmul(p.w_input, x)?;
    let zh = graph.matmul(p.w_hidden, h_prev)?;
    let z = graph.add(zx, zh)?;
    let z = graph.add(z, p.bias)?;
    let gi = graph.slice(z, 0, dh)?;
    let gf = graph.slice(z, dh, dh)?;
    let go = graph.slice(z, 2 * dh, dh)?;
    let gg = graph.slice(z, 3 * dh, dh)?;
    let i = graph.sigmoid(gi);
    let f = graph.sigmoid(gf);
    let o = graph.sigmoid(go);
    let g = graph.tanh(gg);
    let keep = graph.mul(f, c_prev)?;
    let write = graph.mul(i, g)?;
    let c = graph.add(keep, write)?;
    let tc = graph.tanh(c);
    let h = graph.mul(o, tc)?;
    Ok((h, c))
}

/// Runs one direction over `inputs` from a zero state, returning the hidden
/// state after each input in the order consumed.
pub fn run_lstm(graph: &mut Graph, inputs: &[Var], p: &LstmVars) -> Result<Vec<Var>> {
    let mut h = graph.constant(Tensor::zeros(&[p.hidden_dim]));
    let mut c = graph.constant(Tensor::zeros(&[p.hidden_dim]));
    let mut out = Vec::with_capacity(inputs.len());
    for &x in inputs {
        (h, c) = lstm_step(graph, x, h, c, p)?;
        out.push(h);
    }
    Ok(out)
}

/// Bidirectional encoding: position `i` holds `[forward_i; backward_i]`,
/// where the forward pass has read tokens `1..=i` and the backward pass
/// tokens `n..=i`. An empty input yields an empty output.
pub fn encode_bilstm(graph: &mut Graph, inputs: &[Var], forward: &LstmVars, backward: &LstmVars) -> Result<Vec<Var>> {
    let fwd = run_lstm(graph, inputs, forward)?;
    let reversed: Vec<Var> = inputs.iter().rev().copied().collect();
    let mut bwd = run_lstm(graph, &reversed, backward)?;
    bwd.reverse();
    fwd.into_iter()
        .zip(bwd)
        .map(|(f, b)| graph.concat(&[f, b]))
        .collect()
}

/// Plain-value LSTM weights, for running a single cell outside a model.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmWeights {
    pub w_input: Tensor,
    pub w_hidden: Tensor,
    pub bias: Tensor,
}

impl LstmWeights {
    pub fn hidden_dim(&self) -> usize {
        self.w_hidden.shape()[1]
    }

    pub fn step(&self, x: &Tensor, h_prev: &Tensor, c_prev: &Tensor) -> Result<(Tensor, Tensor)> {
        let mut g = Graph::new();
        let vars = LstmVars {
            w_input: g.constant(self.w_input.clone()),
            w_hidden: g.constant(self.w_hidden.clone()),
            bias: g.constant(self.bias.clone()),
            hidden_dim: self.hidden_dim(),
        };
        let x = g.constant(x.clone());
        let h = g.constant(h_prev.clone());
        let c = g.constant(c_prev.clone());
        let (h, c) = lstm_step(&mut g, x, h, c, &vars)?;
        Ok((g.value(h).clone(), g.value(c).clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sigmoid;
    use crate::rng::seeded;

    fn random_weights(d: usize, dh: usize, seed: u64) -> LstmWeights {
        let mut rng = seeded(seed);
        LstmWeights {
            w_input: Tensor::uniform(&[4 * dh, d], 1.0, &mut rng),
            w_hidden: Tensor::uniform(&[4 * dh, dh], 1.0, &mut rng),
            bias: Tensor::uniform(&[4 * dh], 1.0, &mut rng),
        }
    }

    #[test]
    fn zero_weights_give_zero_state() {
        let w = LstmWeights {
            w_input: Tensor::zeros(&[8, 3]),
            w_hidden: Tensor::zeros(&[8, 2]),
            bias: Tensor::zeros(&[8]),
        };
        let x = Tensor::vector(vec![5.0, -3.0, 1.0]);
        let (h, c) = w.step(&x, &Tensor::zeros(&[2]), &Tensor::zeros(&[2])).unwrap();
        assert!(h.data().iter().chain(c.data()).all(|&v| v == 0.0));
    }

    #[test]
    fn outputs_strictly_bounded() {
        let w = random_weights(3, 4, 2);
        let x = Tensor::vector(vec![10.0, -10.0, 3.0]);
        let (h, _) = w.step(&x, &Tensor::vector(vec![0.9; 4]), &Tensor::vector(vec![-5.0; 4])).unwrap();
        assert!(h.data().iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let w = random_weights(2, 2, 1);
        let bad = w.step(&Tensor::vector(vec![1.0; 3]), &Tensor::zeros(&[2]), &Tensor::zeros(&[2]));
        assert!(matches!(bad, Err(Error::Shape { .. })));
        let bad = w.step(&Tensor::vector(vec![1.0; 2]), &Tensor::zeros(&[3]), &Tensor::zeros(&[2]));
        assert!(matches!(bad, Err(Error::Shape { .. })));
    }

    #[test]
    fn step_matches_scalar_arithmetic() {
        let (d, dh) = (2, 2);
        let w = random_weights(d, dh, 17);
        let x = [0.3, -0.7];
        let hp = [0.1, -0.2];
        let cp = [0.5, 0.05];
        let (h, c) = w
            .step(&Tensor::vector(x.to_vec()), &Tensor::vector(hp.to_vec()), &Tensor::vector(cp.to_vec()))
            .unwrap();
        let wi = w.w_input.data();
        let wh = w.w_hidden.data();
        let b = w.bias.data();
        let pre = |row: usize| {
            let mut s = b[row];
            for j in 0..d {
                s += wi[row * d + j] * x[j];
            }
            for j in 0..dh {
                s += wh[row * dh + j] * hp[j];
            }
            s
        };
        for k in 0..dh {
            let i = sigmoid(pre(k));
            let f = sigmoid(pre(dh + k));
            let o = sigmoid(pre(2 * dh + k));
            let g = pre(3 * dh + k).tanh();
            let ck = f * cp[k] + i * g;
            let hk = o * ck.tanh();
            assert!((c.data()[k] - ck).abs() < 1e-12);
            assert!((h.data()[k] - hk).abs() < 1e-12);
        }
    }

    fn lstm_vars(g: &mut Graph, w: &LstmWeights) -> LstmVars {
        LstmVars {
            w_input: g.constant(w.w_input.clone()),
            w_hidden: g.constant(w.w_hidden.clone()),
            bias: g.constant(w.bias.clone()),
            hidden_dim: w.hidden_dim(),
        }
    }

    #[test]
    fn empty_sequence_encodes_to_nothing() {
        let mut g = Graph::new();
        let w = random_weights(2, 2, 3);
        let v = lstm_vars(&mut g, &w);
        assert!(encode_bilstm(&mut g, &[], &v, &v).unwrap().is_empty());
    }

    #[test]
    fn single_token_is_concatenation_of_one_step_each_way() {
        let fw = random_weights(3, 2, 4);
        let bw = random_weights(3, 2, 5);
        let x = Tensor::vector(vec![0.2, 0.4, -0.1]);
        let mut g = Graph::new();
        let fv = lstm_vars(&mut g, &fw);
        let bv = lstm_vars(&mut g, &bw);
        let xv = g.constant(x.clone());
        let out = encode_bilstm(&mut g, &[xv], &fv, &bv).unwrap();
        let zero = Tensor::zeros(&[2]);
        let (hf, _) = fw.step(&x, &zero, &zero).unwrap();
        let (hb, _) = bw.step(&x, &zero, &zero).unwrap();
        let expected: Vec<f64> = hf.data().iter().chain(hb.data()).copied().collect();
        assert_eq!(g.value(out[0]).data(), expected.as_slice());
    }

    #[test]
    fn three_tokens_match_two_independent_passes() {
        let fw = random_weights(2, 3, 6);
        let bw = random_weights(2, 3, 7);
        let mut rng = seeded(8);
        let xs: Vec<Tensor> = (0..3).map(|_| Tensor::uniform(&[2], 1.0, &mut rng)).collect();

        let run = |w: &LstmWeights, order: &[usize]| {
            let mut h = Tensor::zeros(&[3]);
            let mut c = Tensor::zeros(&[3]);
            let mut states = vec![Tensor::zeros(&[3]); xs.len()];
            for &i in order {
                (h, c) = w.step(&xs[i], &h, &c).unwrap();
                states[i] = h.clone();
            }
            states
        };
        let f_states = run(&fw, &[0, 1, 2]);
        let b_states = run(&bw, &[2, 1, 0]);

        let mut g = Graph::new();
        let fv = lstm_vars(&mut g, &fw);
        let bv = lstm_vars(&mut g, &bw);
        let xv: Vec<Var> = xs.iter().map(|x| g.constant(x.clone())).collect();
        let out = encode_bilstm(&mut g, &xv, &fv, &bv).unwrap();
        for i in 0..3 {
            let got = g.value(out[i]).data();
            assert_eq!(&got[..3], f_states[i].data());
            assert_eq!(&got[3..], b_states[i].data());
        }
    }

    #[test]
    fn reversal_swaps_directions() {
        // With identical forward/backward weights, reversing the input
        // mirrors positions and swaps the halves.
        let w = random_weights(2, 2, 10);
        let mut rng = seeded(11);
        let xs: Vec<Tensor> = (0..4).map(|_| Tensor::uniform(&[2], 1.0, &mut rng)).collect();
        let mut g = Graph::new();
        let v = lstm_vars(&mut g, &w);
        let fwd_in: Vec<Var> = xs.iter().map(|x| g.constant(x.clone())).collect();
        let rev_in: Vec<Var> = fwd_in.iter().rev().copied().collect();
        let a = encode_bilstm(&mut g, &fwd_in, &v, &v).unwrap();
        let b = encode_bilstm(&mut g, &rev_in, &v, &v).unwrap();
        let n = xs.len();
        for i in 0..n {
            let ai = g.value(a[i]).data();
            let bi = g.value(b[n - 1 - i]).data();
            assert_eq!(&ai[..2], &bi[2..]);
            assert_eq!(&ai[2..], &bi[..2]);
        }
    }
}
