use rand::Rng;

use crate::error::{Error, Result};
use crate::math::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Train,
    Eval,
}

fn check_rate(rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::Config(format!("dropout rate {rate} outside [0, 1)")))
    }
}

/// Inverted-dropout mask: each entry is `0` with probability `rate`,
/// otherwise `1 / (1 - rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Result<Tensor> {
    check_rate(rate)?;
    let keep = 1.0 / (1.0 - rate);
    let data = (0..len)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect();
    Ok(Tensor::vector(data))
}

/// Identity in eval mode or at rate zero; inverted dropout otherwise.
pub fn dropout<R: Rng + ?Sized>(v: &[f64], rate: f64, phase: Phase, rng: &mut R) -> Result<Vec<f64>> {
    check_rate(rate)?;
    if phase == Phase::Eval || rate == 0.0 || v.is_empty() {
        return Ok(v.to_vec());
    }
    let mask = dropout_mask(v.len(), rate, rng)?;
    Ok(v.iter().zip(mask.data()).map(|(a, m)| a * m).collect())
}
