//! Cross-entropy with an L2 penalty over every model parameter.

use crate::corpus::Sentiment;
use crate::error::{Error, Result};
use crate::math::{Graph, Var};
use crate::model::{BoundParams, ParamKind, ParamStore};

/// Floor applied to the true-class probability before taking its log.
pub const LOG_FLOOR: f64 = 1e-12;

/// L2 settings: `λ` and whether bias vectors are penalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    pub l2: f64,
    pub include_biases: bool,
}

impl Regularization {
    pub const NONE: Regularization = Regularization {
        l2: 0.0,
        include_biases: true,
    };

    pub fn covers(&self, kind: ParamKind) -> bool {
        kind == ParamKind::Weight || self.include_biases
    }

    /// `Σ ‖θ‖²` over the covered parameters.
    pub fn squared_norm(&self, params: &ParamStore) -> f64 {
        params
            .iter()
            .filter(|p| self.covers(p.kind))
            .map(|p| p.value.sum_squares())
            .sum()
    }

    pub fn penalty(&self, params: &ParamStore) -> f64 {
        self.l2 * self.squared_norm(params)
    }
}

/// `-ln(max(p_y, floor))`.
pub fn cross_entropy(probs: &[f64], label: Sentiment) -> Result<f64> {
    let p = probs
        .get(label.index())
        .ok_or_else(|| Error::shape("cross_entropy", &[probs.len()], &[label.index()]))?;
    Ok(-p.max(LOG_FLOOR).ln())
}

/// Per-instance loss `-Σ y_i ln p_i + λ Σ ‖θ‖²`.
pub fn loss(probs: &[f64], label: Sentiment, params: &ParamStore, reg: Regularization) -> Result<f64> {
    Ok(cross_entropy(probs, label)? + reg.penalty(params))
}

/// Adds the cross-entropy of `probs` against `label` to the graph.
pub fn cross_entropy_node(graph: &mut Graph, probs: Var, label: Sentiment) -> Result<Var> {
    let p = graph.pick(probs, label.index())?;
    let ln = graph.ln_floor(p, LOG_FLOOR);
    Ok(graph.scale(ln, -1.0))
}

/// Adds the full per-instance loss to the graph, with the penalty built from
/// the bound parameter leaves so gradients flow through it.
pub fn loss_node(
    graph: &mut Graph,
    probs: Var,
    label: Sentiment,
    params: &ParamStore,
    bound: &BoundParams,
    reg: Regularization,
) -> Result<Var> {
    let ce = cross_entropy_node(graph, probs, label)?;
    if reg.l2 == 0.0 {
        return Ok(ce);
    }
    let mut total = ce;
    for id in params.ids() {
        if !reg.covers(params.parameter(id).kind) {
            continue;
        }
        let sq = graph.sum_squares(bound.var(id));
        let term = graph.scale(sq, reg.l2);
        total = graph.add(total, term)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Tensor;
    use crate::rng::seeded;
    use rand::Rng;

    fn store(seed: u64) -> ParamStore {
        let mut rng = seeded(seed);
        let mut s = ParamStore::new();
        s.add("w", ParamKind::Weight, Tensor::uniform(&[3, 2], 1.0, &mut rng));
        s.add("b", ParamKind::Bias, Tensor::uniform(&[3], 1.0, &mut rng));
        s
    }

    #[test]
    fn perfect_prediction_costs_nothing() {
        let l = loss(&[0.0, 0.0, 1.0], Sentiment::Positive, &store(1), Regularization::NONE).unwrap();
        assert_eq!(l, 0.0);
    }

    #[test]
    fn uniform_prediction_costs_ln3() {
        let third = 1.0 / 3.0;
        let l = loss(&[third; 3], Sentiment::Neutral, &store(1), Regularization::NONE).unwrap();
        assert!((l - 3f64.ln()).abs() < 1e-15);
        assert!((l - 1.0986).abs() < 1e-4);
    }

    #[test]
    fn zero_probability_is_floored() {
        let l = cross_entropy(&[1.0, 0.0, 0.0], Sentiment::Neutral).unwrap();
        assert!((l - 1e-12f64.ln().abs()).abs() < 1e-9);
    }

    #[test]
    fn matches_direct_summation() {
        let mut rng = seeded(4);
        let params = store(5);
        for _ in 0..20 {
            let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(0.01..1.0)).collect();
            let z: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|v| v / z).collect();
            let label = Sentiment::from_index(rng.gen_range(0..3)).unwrap();
            let reg = Regularization { l2: 1e-5, include_biases: true };

            let y: Vec<f64> = (0..3).map(|i| if i == label.index() { 1.0 } else { 0.0 }).collect();
            let mut expected = 0.0;
            for i in 0..3 {
                expected -= y[i] * p[i].ln();
            }
            let mut norm = 0.0;
            for prm in params.iter() {
                for v in prm.value.data() {
                    norm += v * v;
                }
            }
            expected += 1e-5 * norm;
            let got = loss(&p, label, &params, reg).unwrap();
            assert!((got - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn bias_exclusion_flag() {
        let params = store(6);
        let with = Regularization { l2: 1.0, include_biases: true }.penalty(&params);
        let without = Regularization { l2: 1.0, include_biases: false }.penalty(&params);
        let bias_norm = params.get(params.find("b").unwrap()).sum_squares();
        assert!((with - without - bias_norm).abs() < 1e-12);
    }

    #[test]
    fn penalty_monotone_in_lambda() {
        let params = store(7);
        let p = [0.2, 0.5, 0.3];
        let mut last = f64::NEG_INFINITY;
        for l2 in [0.0, 1e-6, 1e-5, 1e-3, 0.1, 1.0] {
            let l = loss(&p, Sentiment::Negative, &params, Regularization { l2, include_biases: true }).unwrap();
            assert!(l >= last);
            last = l;
        }
    }

    #[test]
    fn graph_loss_matches_value_loss() {
        let params = store(8);
        let mut g = Graph::new();
        let bound = params.bind(&mut g);
        let probs = g.constant(Tensor::vector(vec![0.25, 0.5, 0.25]));
        let reg = Regularization { l2: 1e-3, include_biases: false };
        let node = loss_node(&mut g, probs, Sentiment::Negative, &params, &bound, reg).unwrap();
        let direct = loss(&[0.25, 0.5, 0.25], Sentiment::Negative, &params, reg).unwrap();
        assert!((g.value(node).item() - direct).abs() < 1e-15);
    }
}
