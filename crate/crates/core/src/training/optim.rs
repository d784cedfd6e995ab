use crate::error::{Error, Result};
use crate::math::Tensor;
use crate::model::ParamStore;

/// Classical (heavy-ball) momentum:
/// `velocity ← μ·velocity − lr·grad`, `θ ← θ + velocity`.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdMomentum {
    pub learning_rate: f64,
    pub momentum: f64,
    velocity: Vec<Tensor>,
}

impl SgdMomentum {
    /// Zero velocity for every parameter of `params`.
    pub fn new(params: &ParamStore, learning_rate: f64, momentum: f64) -> Self {
        SgdMomentum {
            learning_rate,
            momentum,
            velocity: params.iter().map(|p| Tensor::zeros(p.value.shape())).collect(),
        }
    }

    pub fn velocity(&self) -> &[Tensor] {
        &self.velocity
    }

    pub fn step(&mut self, params: &mut ParamStore, grads: &[Tensor]) -> Result<()> {
        if grads.len() != self.velocity.len() || params.len() != self.velocity.len() {
            return Err(Error::shape("sgd_momentum_step", &[params.len()], &[grads.len()]));
        }
        for ((param, vel), grad) in params.iter_mut().zip(&mut self.velocity).zip(grads) {
            if grad.shape() != vel.shape() || param.value.shape() != vel.shape() {
                return Err(Error::shape("sgd_momentum_step", param.value.shape(), grad.shape()));
            }
            for ((v, g), theta) in vel.data_mut().iter_mut().zip(grad.data()).zip(param.value.data_mut()) {
                *v = self.momentum * *v - self.learning_rate * g;
                *theta += *v;
            }
        }
        Ok(())
    }
}
