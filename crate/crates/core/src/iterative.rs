//! Alternate noisy labeling and LNL, re-sealing each trained model as the next
//! black box.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::blackbox::{wrap_as_blackbox, BlackBoxHandle};
use crate::data::DatasetSplit;
use crate::error::{Error, Result};
use crate::eval::evaluate_model;
use crate::lnl::{
    empirical_noise_rate, estimate_noise_rate, noisy_labeling, run_lnl_with_labeling, LnlConfig,
    NoiseEstimate, RunMetrics,
};
use crate::model::{save_checkpoint, ClassifierModel};
use crate::report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReinitPolicy {
    /// New random weights every step, seeded by `seed ^ m`.
    Fresh,
    /// Continue from the previous step's model.
    WarmStart,
}

#[derive(Debug, Clone)]
pub struct IterConfig {
    /// Number of iterative steps M.
    pub steps: usize,
    pub lnl: LnlConfig,
    pub reinit: ReinitPolicy,
    /// Stop once `|ε_m - ε_{m-1}|` drops below this. `None` disables.
    pub early_stop_tolerance: Option<f64>,
    pub seed: u64,
    /// Persist checkpoints, labelings and the trace under `run_dir/step_<m>/`.
    pub run_dir: Option<PathBuf>,
}

impl Default for IterConfig {
    fn default() -> Self {
        Self {
            steps: 5,
            lnl: LnlConfig::default(),
            reinit: ReinitPolicy::Fresh,
            early_stop_tolerance: Some(0.01),
            seed: 0,
            run_dir: None,
        }
    }
}

impl IterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("steps M must be >= 1".into()));
        }
        if let Some(t) = self.early_stop_tolerance {
            if t.is_nan() || t < 0.0 {
                return Err(Error::Config(format!("early-stop tolerance must be >= 0, got {t}")));
            }
        }
        self.lnl.validate()
    }

    /// Stable text form of every hyperparameter (validation data by size only).
    pub fn canonical(&self) -> String {
        let l = &self.lnl;
        let mut s = String::new();
        let _ = write!(
            s,
            "steps={};reinit={:?};early_stop={:?};seed={};gamma={:?};kappa={:?};h={};n_k_fraction={:?};\
             iterations={};batch={};eta0={:?};momentum={:?};hidden={:?};no_rescale={};\
             no_category_sampling={};noise_override={:?};validation={:?}",
            self.steps,
            self.reinit,
            self.early_stop_tolerance,
            self.seed,
            l.gamma,
            l.kappa,
            l.buffer_len,
            l.n_k_fraction,
            l.iterations,
            l.batch_size,
            l.eta0,
            l.momentum,
            l.hidden,
            l.no_rescale,
            l.no_category_sampling,
            l.noise_rate_override,
            l.validation_set.as_ref().map(|v| v.len()),
        );
        s
    }

    /// First 16 hex digits of SHA-256 over [`canonical`](Self::canonical).
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn provenance(&self) -> String {
        report::provenance(self.seed, &self.config_hash())
    }

    pub fn step_seed(&self, m: usize) -> u64 {
        self.seed ^ m as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Estimated noise rate of this step's labeling, in [0, 1].
    pub epsilon_est: f64,
    pub noise: NoiseEstimate,
    /// Accuracy of this step's noisy labels, when ground truth exists.
    pub label_accuracy: Option<f64>,
    /// Accuracy of the model trained in this step, when ground truth exists.
    pub model_accuracy: Option<f64>,
    pub checkpoint: Option<PathBuf>,
    pub labeling_checksum: String,
}

#[derive(Debug, Clone)]
pub struct IterOutcome {
    /// Model of the last completed step.
    pub model: ClassifierModel,
    pub trace: Vec<StepRecord>,
    pub metrics: Vec<RunMetrics>,
}

pub fn step_dir(run_dir: &Path, m: usize) -> PathBuf {
    run_dir.join(format!("step_{m}"))
}

/// Iterative learning with noisy labels starting from `source`.
///
/// Ground truth on `target`, if present, is read only to fill the accuracy
/// columns of the trace.
pub fn run_iterlnl(source: &BlackBoxHandle, target: &DatasetSplit, config: &IterConfig) -> Result<IterOutcome> {
    config.validate()?;
    let truth = target.evaluation_labels();
    let provenance = config.provenance();
    if let Some(dir) = &config.run_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    let mut handle = source.clone();
    let mut previous: Option<ClassifierModel> = None;
    let mut trace: Vec<StepRecord> = Vec::with_capacity(config.steps);
    let mut all_metrics = Vec::with_capacity(config.steps);

    for m in 1..=config.steps {
        let labeling = noisy_labeling(&handle, target)?;
        let noise = estimate_noise_rate(&labeling, &config.lnl, Some(&handle))?;
        let label_accuracy = match truth {
            Some(t) => Some(1.0 - empirical_noise_rate(&labeling, Some(t))?),
            None => None,
        };
        let init = match config.reinit {
            ReinitPolicy::Fresh => None,
            ReinitPolicy::WarmStart => previous.take(),
        };
        let (model, metrics) =
            run_lnl_with_labeling(&labeling, noise, target, &config.lnl, config.step_seed(m), init)?;
        let model_accuracy = match truth {
            Some(_) => Some(evaluate_model(&model, target)?.accuracy),
            None => None,
        };

        let checkpoint = match &config.run_dir {
            Some(dir) => {
                let sd = step_dir(dir, m);
                fs::create_dir_all(&sd).map_err(|e| Error::io(&sd, e))?;
                let ckpt = sd.join("model.ckpt");
                save_checkpoint(&model, &ckpt)?;
                report::write_labeling_csv(&labeling, sd.join("labeling.csv"), &provenance)?;
                metrics.write_csv(sd.join("metrics.csv"), &provenance)?;
                Some(ckpt)
            }
            None => None,
        };

        log::info!(
            "step {m}: eps_est={:.4} label_acc={:?} model_acc={:?}",
            noise.epsilon,
            label_accuracy,
            model_accuracy
        );
        trace.push(StepRecord {
            step: m,
            epsilon_est: noise.epsilon.clamp(0.0, 1.0),
            noise,
            label_accuracy,
            model_accuracy,
            checkpoint,
            labeling_checksum: metrics.labeling_checksum.clone(),
        });
        all_metrics.push(metrics);

        let plateau = match (config.early_stop_tolerance, trace.len()) {
            (Some(tol), n) if n >= 2 => (trace[n - 1].epsilon_est - trace[n - 2].epsilon_est).abs() < tol,
            _ => false,
        };
        if let Some(dir) = &config.run_dir {
            report::write_trace_csv(&trace, dir.join("trace.csv"), &provenance)?;
        }
        let done = m == config.steps || plateau;
        if plateau && m < config.steps {
            log::info!("noise-rate estimate plateaued at step {m}; stopping");
        }
        if done {
            return Ok(IterOutcome {
                model,
                trace,
                metrics: all_metrics,
            });
        }
        handle = wrap_as_blackbox(model.clone());
        previous = Some(model);
    }
    unreachable!("steps >= 1 returns inside the loop")
}
