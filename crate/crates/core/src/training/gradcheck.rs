//! Central finite-difference check of the analytic gradients of the full
//! per-instance loss.

use rand::Rng;

use super::loss::{loss, loss_node, Regularization};
use crate::corpus::Sentiment;
use crate::error::Result;
use crate::math::Tensor;
use crate::model::{EmbeddedExample, Mode, Model, ModelConfig, Variant};
use crate::rng;

pub const GRADCHECK_STEP: f64 = 1e-5;
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

/// Denominator floor of the relative error, so entries whose true gradient
/// is ~0 are judged by absolute error instead.
const RELATIVE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub variant: Variant,
    pub max_relative_error: f64,
    /// Worst relative error per parameter, in store order.
    pub per_parameter: Vec<(String, f64)>,
    pub entries_checked: usize,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_relative_error < GRADCHECK_TOLERANCE
    }
}

fn eval_loss(model: &Model, ex: &EmbeddedExample, reg: Regularization) -> Result<f64> {
    let (p, _) = model.predict_proba(ex)?;
    loss(&p, ex.label, model.params(), reg)
}

/// Compares backpropagated gradients with `(L(θ+h) − L(θ−h)) / 2h` for every
/// scalar parameter, in eval mode.
pub fn check_gradients(model: &Model, ex: &EmbeddedExample, reg: Regularization) -> Result<GradCheckReport> {
    let mut pass = model.forward(ex, Mode::Eval)?;
    let l = loss_node(&mut pass.graph, pass.probs, ex.label, model.params(), &pass.bound, reg)?;
    let grads = pass.graph.backward(l)?;

    let mut probe = model.clone();
    let mut per_parameter = Vec::new();
    let mut worst: f64 = 0.0;
    let mut entries = 0;
    for id in model.params().ids() {
        let param = model.params().parameter(id);
        let analytic = grads
            .get(pass.bound.var(id))
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(param.value.shape()));
        let mut param_worst: f64 = 0.0;
        for j in 0..param.value.len() {
            let original = param.value.data()[j];
            probe.params_mut().get_mut(id).data_mut()[j] = original + GRADCHECK_STEP;
            let plus = eval_loss(&probe, ex, reg)?;
            probe.params_mut().get_mut(id).data_mut()[j] = original - GRADCHECK_STEP;
            let minus = eval_loss(&probe, ex, reg)?;
            probe.params_mut().get_mut(id).data_mut()[j] = original;

            let numeric = (plus - minus) / (2.0 * GRADCHECK_STEP);
            let a = analytic.data()[j];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
            param_worst = param_worst.max(rel);
            entries += 1;
        }
        worst = worst.max(param_worst);
        per_parameter.push((param.name.clone(), param_worst));
    }
    Ok(GradCheckReport {
        variant: model.variant(),
        max_relative_error: worst,
        per_parameter,
        entries_checked: entries,
    })
}

/// Draws every parameter (biases included) and the embeddings from
/// `U(-1, 1)` for a tiny configuration: `d = 4`, `d_h = 3`, `L = 3`, `M = 2`,
/// `R = 2`.
pub fn tiny_gradcheck(variant: Variant, seed: u64, reg: Regularization) -> Result<GradCheckReport> {
    let mut rng = rng::seeded(seed);
    let config = ModelConfig::new(variant, 4, 3);
    let mut model = Model::new(config, &mut rng)?;
    for p in model.params_mut().iter_mut() {
        for v in p.value.data_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    let mut rows = |n: usize| -> Vec<Tensor> { (0..n).map(|_| Tensor::uniform(&[4], 1.0, &mut rng)).collect() };
    let left = rows(3);
    let target = rows(2);
    let right = rows(2);
    let label = Sentiment::from_index(rng.gen_range(0..3)).expect("class index");
    let ex = EmbeddedExample {
        left,
        target,
        right,
        label,
    };
    check_gradients(&model, &ex, reg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcr_rot_gradients_match() {
        let report = tiny_gradcheck(Variant::LcrRot, 1, Regularization { l2: 1e-5, include_biases: true }).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.per_parameter.len(), 28);
    }

    #[test]
    fn strong_penalty_without_biases() {
        let reg = Regularization {
            l2: 0.05,
            include_biases: false,
        };
        let report = tiny_gradcheck(Variant::NoTargetLearned, 4, reg).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
