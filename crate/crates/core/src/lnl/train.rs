use std::fmt::Write as _;
use std::path::Path;

use ndarray::Axis;

use super::{
    accept_sample, estimate_noise_rate, keep_ratio, noisy_labeling, CategoryBuffers, LnlConfig,
    NoiseEstimate, NoisyLabeling,
};
use crate::blackbox::BlackBoxHandle;
use crate::data::DatasetSplit;
use crate::error::{Error, Result};
use crate::model::{BatchSampler, ClassifierModel, Sgd, SgdSchedule};

#[derive(Debug, Clone, PartialEq)]
pub struct IterationMetrics {
    pub iteration: usize,
    pub keep_ratio: f64,
    /// Mean loss of the accepted samples; `None` when nothing was accepted.
    pub mean_accepted_loss: Option<f64>,
    /// Accepted samples per noisy class.
    pub accepted_per_class: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub noise: NoiseEstimate,
    /// ε actually fed to the keep schedule.
    pub schedule_epsilon: f64,
    pub labeling_checksum: String,
    pub iterations: Vec<IterationMetrics>,
    /// Classes that never occur among the noisy labels.
    pub absent_classes: Vec<usize>,
    pub warnings: Vec<String>,
}

impl RunMetrics {
    /// `iteration,R,mean_accepted_loss,accepted_c0,…` with a leading provenance comment.
    pub fn to_csv(&self, provenance: &str) -> String {
        let k = self.iterations.first().map_or(0, |m| m.accepted_per_class.len());
        let mut out = format!("# {provenance}\niteration,R,mean_accepted_loss");
        for c in 0..k {
            let _ = write!(out, ",accepted_c{c}");
        }
        out.push('\n');
        for m in &self.iterations {
            let _ = write!(out, "{},{:?},", m.iteration, m.keep_ratio);
            if let Some(l) = m.mean_accepted_loss {
                let _ = write!(out, "{l:?}");
            }
            for c in &m.accepted_per_class {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, provenance: &str) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv(provenance)).map_err(|e| Error::io(path, e))
    }
}

/// Label `target` with `handle`, estimate ε, and train a fresh model.
pub fn run_lnl(
    handle: &BlackBoxHandle,
    target: &DatasetSplit,
    config: &LnlConfig,
    seed: u64,
) -> Result<(ClassifierModel, RunMetrics)> {
    config.validate()?;
    let labeling = noisy_labeling(handle, target)?;
    let noise = estimate_noise_rate(&labeling, config, Some(handle))?;
    run_lnl_with_labeling(&labeling, noise, target, config, seed, None)
}

/// The training half of a round, given labels and a noise estimate.
///
/// `init` warm-starts from an existing model; otherwise the model is freshly
/// initialized from `seed`.
pub fn run_lnl_with_labeling(
    labeling: &NoisyLabeling,
    noise: NoiseEstimate,
    target: &DatasetSplit,
    config: &LnlConfig,
    seed: u64,
    init: Option<ClassifierModel>,
) -> Result<(ClassifierModel, RunMetrics)> {
    config.validate()?;
    if labeling.len() != target.len() {
        return Err(Error::Data(format!(
            "{} noisy labels for {} target rows",
            labeling.len(),
            target.len()
        )));
    }
    let k = target.k();
    let labels = labeling.labels();
    let checksum = labeling.checksum();

    let mut warnings = Vec::new();
    let mut present = vec![false; k];
    for &y in labels {
        present[y] = true;
    }
    let absent_classes: Vec<usize> = (0..k).filter(|&c| !present[c]).collect();
    for &c in &absent_classes {
        let msg = format!("class {c} receives no noisy labels; it contributes no training signal");
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let epsilon = noise.schedule_epsilon();
    let n_k = config.n_k();
    let mut model = match init {
        Some(m) => {
            if m.input_dim() != target.dim() || m.num_classes() != k {
                return Err(Error::Config(format!(
                    "warm-start model has dims {:?}, target needs d={} K={k}",
                    m.layer_dims(),
                    target.dim()
                )));
            }
            m
        }
        None => {
            let mut dims = vec![target.dim()];
            dims.extend(&config.hidden);
            dims.push(k);
            ClassifierModel::init(&dims, seed)?
        }
    };
    let mut sgd = Sgd::new(SgdSchedule::new(config.eta0, config.iterations, config.momentum)?);
    let mut sampler = BatchSampler::new(target.len(), seed ^ 0xba7c_5a3e);
    let global = config.no_category_sampling;
    let mut buffers = CategoryBuffers::new(if global { 1 } else { k }, config.buffer_len)?;
    let bucket = |c: usize| if global { 0 } else { c };

    let mut history = Vec::with_capacity(config.iterations);
    for n in 1..=config.iterations {
        let r = keep_ratio(n, n_k, epsilon);
        let idx = sampler.next_batch(config.batch_size);
        let x = target.features().select(Axis(0), &idx);
        let y: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
        let (losses, mask) = sgd.step_selected(
            &mut model,
            x.view(),
            &y,
            |losses| {
                losses
                    .iter()
                    .zip(&y)
                    .map(|(&l, &c)| accept_sample(l, &buffers, bucket(c), r))
                    .collect()
            },
            n,
        )?;
        let mut accepted_per_class = vec![0; k];
        let mut accepted_loss = 0.0;
        for ((&l, &c), &keep) in losses.iter().zip(&y).zip(&mask) {
            if keep {
                accepted_per_class[c] += 1;
                accepted_loss += l;
            }
            buffers.push(bucket(c), l);
        }
        let accepted: usize = accepted_per_class.iter().sum();
        history.push(IterationMetrics {
            iteration: n,
            keep_ratio: r,
            mean_accepted_loss: (accepted > 0).then(|| accepted_loss / accepted as f64),
            accepted_per_class,
        });
    }

    Ok((
        model,
        RunMetrics {
            noise,
            schedule_epsilon: epsilon,
            labeling_checksum: checksum,
            iterations: history,
            absent_classes,
            warnings,
        },
    ))
}
