#![allow(dead_code)]

use std::path::PathBuf;

use lcr_rot::corpus::Sentiment;
use lcr_rot::math::Tensor;
use lcr_rot::model::{EmbeddedExample, LstmWeights, Model};
use lcr_rot::rng::Rng;
use rand::Rng as _;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_lcr-rot"))
}

pub fn random_example(rng: &mut Rng, d: usize, l: usize, m: usize, r: usize) -> EmbeddedExample {
    let mut rows = |n: usize| (0..n).map(|_| Tensor::uniform(&[d], 1.0, rng)).collect::<Vec<_>>();
    let left = rows(l);
    let target = rows(m);
    let right = rows(r);
    EmbeddedExample {
        left,
        target,
        right,
        label: Sentiment::from_index(rng.gen_range(0..3)).unwrap(),
    }
}

/// Redraws every parameter from `U(-scale, scale)`.
pub fn randomize(model: &mut Model, scale: f64, rng: &mut Rng) {
    for p in model.params_mut().iter_mut() {
        for v in p.value.data_mut() {
            *v = rng.gen_range(-scale..scale);
        }
    }
}

fn weights(model: &Model, prefix: &str) -> LstmWeights {
    let get = |suffix: &str| {
        let id = model.params().find(&format!("{prefix}.{suffix}")).expect(prefix);
        model.params().get(id).clone()
    };
    LstmWeights {
        w_input: get("w_input"),
        w_hidden: get("w_hidden"),
        bias: get("bias"),
    }
}

/// Bi-LSTM states of `inputs` recomputed cell by cell from the named
/// encoder's weights, outside the model's forward pass.
pub fn bilstm_states(model: &Model, encoder: &str, inputs: &[Tensor]) -> Vec<Vec<f64>> {
    let run = |w: &LstmWeights, xs: Vec<&Tensor>| -> Vec<Tensor> {
        let dh = w.hidden_dim();
        let (mut h, mut c) = (Tensor::zeros(&[dh]), Tensor::zeros(&[dh]));
        xs.into_iter()
            .map(|x| {
                (h, c) = w.step(x, &h, &c).unwrap();
                h.clone()
            })
            .collect()
    };
    let fwd = run(&weights(model, &format!("{encoder}.forward")), inputs.iter().collect());
    let mut bwd = run(&weights(model, &format!("{encoder}.backward")), inputs.iter().rev().collect());
    bwd.reverse();
    fwd.iter()
        .zip(&bwd)
        .map(|(f, b)| f.data().iter().chain(b.data()).copied().collect())
        .collect()
}

/// Column mean, summing rows in order and dividing once.
pub fn mean_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let mut acc = vec![0.0; rows[0].len()];
    for row in rows {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    acc.iter().map(|a| a / rows.len() as f64).collect()
}
