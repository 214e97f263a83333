use ndarray::ArrayView2;

use super::{cross_entropy_loss, ClassifierModel};
use crate::error::Result;

const FD_STEP: f64 = 1e-5;
/// Floor on the relative-error denominator so near-zero gradients compare absolutely.
const REL_FLOOR: f64 = 1e-6;

fn mean_loss(model: &ClassifierModel, batch: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
    let probs = model.forward(batch)?;
    let total: f64 = probs
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(r, &y)| cross_entropy_loss(r.as_slice().unwrap(), y))
        .sum();
    Ok(total / labels.len() as f64)
}

/// Central finite-difference gradient of the mean cross-entropy.
pub fn numeric_gradient(
    model: &ClassifierModel,
    batch: ArrayView2<f64>,
    labels: &[usize],
) -> Result<Vec<f64>> {
    let base = model.params();
    let mut probe = model.clone();
    let mut params = base.clone();
    let mut out = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        params[i] = base[i] + FD_STEP;
        probe.set_params(&params)?;
        let plus = mean_loss(&probe, batch, labels)?;
        params[i] = base[i] - FD_STEP;
        probe.set_params(&params)?;
        let minus = mean_loss(&probe, batch, labels)?;
        params[i] = base[i];
        out.push((plus - minus) / (2.0 * FD_STEP));
    }
    Ok(out)
}

/// Largest relative error between backprop and finite differences,
/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn grad_check(model: &ClassifierModel, batch: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
    let mask = vec![true; labels.len()];
    let (_, grads) = model.loss_and_gradient(batch, labels, &mask)?;
    let analytic = grads.map(|g| g.flatten()).unwrap_or_default();
    let numeric = numeric_gradient(model, batch, labels)?;
    Ok(analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(REL_FLOOR))
        .fold(0.0, f64::max))
}
