//! One round of learning with noisy labels.
//!
//! Labels come from a black box's argmax. The noise rate is estimated from the
//! share of confident predictions, pushed through a symmetric rescale curve.
//! A fresh model is then trained on mini-batches where each sample is kept
//! only if its loss is among the smallest `R(n)` fraction seen recently for its
//! noisy class.

mod buffers;
mod train;

use std::sync::Arc;

use ndarray::Array2;
use sha2::{Digest, Sha256};

pub use buffers::{accept_sample, selection_rank, selection_threshold, CategoryBuffers};
pub use train::{run_lnl, run_lnl_with_labeling, IterationMetrics, RunMetrics};

use crate::blackbox::BlackBoxHandle;
use crate::data::DatasetSplit;
use crate::error::{Error, Result};
use crate::model::argmax;

/// Upper clamp on the noise rate used by the keep schedule.
pub const MAX_NOISE_RATE: f64 = 0.95;

/// Black-box predictions on the target split and the labels derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyLabeling {
    probs: Array2<f64>,
    labels: Vec<usize>,
    max_conf: Vec<f64>,
}

impl NoisyLabeling {
    pub fn from_probs(probs: Array2<f64>) -> Self {
        let mut labels = Vec::with_capacity(probs.nrows());
        let mut max_conf = Vec::with_capacity(probs.nrows());
        for row in probs.rows() {
            let row = row.to_vec();
            let y = argmax(&row);
            labels.push(y);
            max_conf.push(row[y]);
        }
        Self {
            probs,
            labels,
            max_conf,
        }
    }

    pub fn probs(&self) -> &Array2<f64> {
        &self.probs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn max_conf(&self) -> &[f64] {
        &self.max_conf
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.probs.ncols()
    }

    /// SHA-256 over the probability bits and labels.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for p in self.probs.iter() {
            h.update(p.to_bits().to_le_bytes());
        }
        for &y in &self.labels {
            h.update((y as u64).to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Query the black box once for every target row.
pub fn noisy_labeling(handle: &BlackBoxHandle, target: &DatasetSplit) -> Result<NoisyLabeling> {
    let probs = handle.predict_batch(target.features().view())?;
    if probs.ncols() != target.k() {
        return Err(Error::Protocol(format!(
            "black box returns {} classes, target split has k={}",
            probs.ncols(),
            target.k()
        )));
    }
    Ok(NoisyLabeling::from_probs(probs))
}

/// Fraction of noisy labels that disagree with ground truth. Evaluation only.
pub fn empirical_noise_rate(labeling: &NoisyLabeling, hidden_labels: Option<&[usize]>) -> Result<f64> {
    let truth = hidden_labels
        .ok_or_else(|| Error::Data("empirical noise rate needs ground-truth labels".into()))?;
    if truth.len() != labeling.len() {
        return Err(Error::Data(format!(
            "{} labels for {} predictions",
            truth.len(),
            labeling.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Data("empty labeling".into()));
    }
    let correct = labeling.labels.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(1.0 - correct as f64 / truth.len() as f64)
}

/// Share of samples whose top probability strictly exceeds `gamma`.
pub fn high_conf_proportion(labeling: &NoisyLabeling, gamma: f64) -> f64 {
    if labeling.is_empty() {
        return 0.0;
    }
    let hits = labeling.max_conf.iter().filter(|&&c| c > gamma).count();
    hits as f64 / labeling.len() as f64
}

/// S-shaped map of [0, 1] onto itself with fixed points 0, ½, 1; identity at `kappa = 1`.
pub fn rescale(rho_prime: f64, kappa: f64) -> f64 {
    if rho_prime < 0.5 {
        0.5 * (2.0 * rho_prime).powf(1.0 / kappa)
    } else {
        1.0 - 0.5 * (2.0 - 2.0 * rho_prime).powf(1.0 / kappa)
    }
}

/// Keep ratio at iteration `n`: `1 - min(n/n_k · ε, ε)`.
pub fn keep_ratio(n: usize, n_k: f64, epsilon: f64) -> f64 {
    1.0 - ((n as f64 / n_k) * epsilon).min(epsilon)
}

/// Hyperparameters of one LNL round.
#[derive(Debug, Clone)]
pub struct LnlConfig {
    /// Confidence threshold γ.
    pub gamma: f64,
    /// Rescale curve degree κ.
    pub kappa: f64,
    /// Loss buffer length h.
    pub buffer_len: usize,
    /// `n_k` as a fraction of `iterations`.
    pub n_k_fraction: f64,
    /// Total training iterations N.
    pub iterations: usize,
    pub batch_size: usize,
    pub eta0: f64,
    pub momentum: f64,
    /// Hidden widths of the target model.
    pub hidden: Vec<usize>,
    /// Estimate ε as `1 - ρ'` instead of rescaling.
    pub no_rescale: bool,
    /// Rank losses in one buffer shared by all classes.
    pub no_category_sampling: bool,
    pub noise_rate_override: Option<f64>,
    /// Labeled target samples; when set, ε is one minus the black box's accuracy on them.
    pub validation_set: Option<Arc<DatasetSplit>>,
}

impl Default for LnlConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            kappa: 2.0,
            buffer_len: 100,
            n_k_fraction: 0.5,
            iterations: 2000,
            batch_size: 64,
            eta0: 0.01,
            momentum: 0.9,
            hidden: vec![256, 128],
            no_rescale: false,
            no_category_sampling: false,
            noise_rate_override: None,
            validation_set: None,
        }
    }
}

impl LnlConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must be in (0, 1), got {}", self.gamma));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        if self.buffer_len == 0 {
            return bad("buffer length h must be >= 1".into());
        }
        if !(self.n_k_fraction > 0.0 && self.n_k_fraction <= 1.0) {
            return bad(format!("n_k fraction must be in (0, 1], got {}", self.n_k_fraction));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if let Some(e) = self.noise_rate_override {
            if !(0.0..=1.0).contains(&e) {
                return bad(format!("noise rate override must be in [0, 1], got {e}"));
            }
        }
        Ok(())
    }

    /// `n_k` in iterations; at least 1 so the schedule is defined for N = 0.
    pub fn n_k(&self) -> f64 {
        (self.n_k_fraction * self.iterations as f64).max(1.0)
    }
}

/// How ε was obtained, with the raw statistics behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEstimate {
    /// Estimated noise rate in [0, 1], before clamping for the schedule.
    pub epsilon: f64,
    /// ρ′, the confident share of the labeling.
    pub rho_prime: f64,
    /// Validation accuracy α when the validation variant is active.
    pub validation_accuracy: Option<f64>,
}

impl NoiseEstimate {
    /// ε clamped to `[0, MAX_NOISE_RATE]` for use in the keep schedule.
    pub fn schedule_epsilon(&self) -> f64 {
        self.epsilon.clamp(0.0, MAX_NOISE_RATE)
    }
}

/// Estimate the noise rate of `labeling`.
///
/// Precedence: override, then validation accuracy (queried through `handle`),
/// then `1 - ρ'` or `1 - rescale(ρ', κ)`.
pub fn estimate_noise_rate(
    labeling: &NoisyLabeling,
    config: &LnlConfig,
    handle: Option<&BlackBoxHandle>,
) -> Result<NoiseEstimate> {
    let rho_prime = high_conf_proportion(labeling, config.gamma);
    if let Some(eps) = config.noise_rate_override {
        return Ok(NoiseEstimate {
            epsilon: eps,
            rho_prime,
            validation_accuracy: None,
        });
    }
    if let Some(val) = &config.validation_set {
        let handle = handle.ok_or_else(|| {
            Error::Config("validation-based noise rate needs the black box handle".into())
        })?;
        let truth = val
            .evaluation_labels()
            .ok_or_else(|| Error::Config("validation set has no labels".into()))?;
        let probs = handle.predict_batch(val.features().view())?;
        let alpha = 1.0 - empirical_noise_rate(&NoisyLabeling::from_probs(probs), Some(truth))?;
        return Ok(NoiseEstimate {
            epsilon: 1.0 - alpha,
            rho_prime,
            validation_accuracy: Some(alpha),
        });
    }
    let rho = if config.no_rescale {
        rho_prime
    } else {
        rescale(rho_prime, config.kappa)
    };
    Ok(NoiseEstimate {
        epsilon: 1.0 - rho,
        rho_prime,
        validation_accuracy: None,
    })
}
