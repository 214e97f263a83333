use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ClassifierModel, Gradients, Layer};
use crate::data::{shuffled_indices, DatasetSplit};
use crate::error::{Error, Result};

/// Annealed step size `η0 / (1 + 10ζ)^0.75` with `ζ = n / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdSchedule {
    pub eta0: f64,
    pub total_iters: usize,
    pub momentum: f64,
}

impl Default for SgdSchedule {
    fn default() -> Self {
        Self {
            eta0: 0.01,
            total_iters: 1,
            momentum: 0.9,
        }
    }
}

impl SgdSchedule {
    pub fn new(eta0: f64, total_iters: usize, momentum: f64) -> Result<Self> {
        if !(eta0 > 0.0 && eta0.is_finite()) {
            return Err(Error::Config(format!("eta0 must be positive, got {eta0}")));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::Config(format!("momentum must be in [0, 1), got {momentum}")));
        }
        Ok(Self {
            eta0,
            total_iters,
            momentum,
        })
    }

    pub fn rate(&self, n: usize) -> f64 {
        let zeta = if self.total_iters == 0 {
            0.0
        } else {
            (n.min(self.total_iters)) as f64 / self.total_iters as f64
        };
        self.eta0 / (1.0 + 10.0 * zeta).powf(0.75)
    }
}

/// Momentum SGD over a single model. Not `Sync`-shared: one writer per model.
#[derive(Debug, Clone)]
pub struct Sgd {
    schedule: SgdSchedule,
    velocity: Option<Vec<Layer>>,
}

impl Sgd {
    pub fn new(schedule: SgdSchedule) -> Self {
        Self {
            schedule,
            velocity: None,
        }
    }

    pub fn schedule(&self) -> &SgdSchedule {
        &self.schedule
    }

    /// One update at iteration `n` on the rows with `mask[i] == true`.
    ///
    /// Losses are returned for every row. An all-false mask leaves the model
    /// and the momentum buffer untouched.
    pub fn step(
        &mut self,
        model: &mut ClassifierModel,
        batch: ArrayView2<f64>,
        labels: &[usize],
        mask: &[bool],
        n: usize,
    ) -> Result<Vec<f64>> {
        let (losses, grads) = model.loss_and_gradient(batch, labels, mask)?;
        if let Some(grads) = grads {
            self.apply(model, &grads, n);
        }
        Ok(losses)
    }

    /// Update with a mask picked from this batch's own losses (computed before
    /// the update). Returns the losses and the mask used.
    pub fn step_selected(
        &mut self,
        model: &mut ClassifierModel,
        batch: ArrayView2<f64>,
        labels: &[usize],
        select: impl FnOnce(&[f64]) -> Vec<bool>,
        n: usize,
    ) -> Result<(Vec<f64>, Vec<bool>)> {
        let (losses, mask, grads) = model.loss_and_gradient_with(batch, labels, select)?;
        if let Some(grads) = grads {
            self.apply(model, &grads, n);
        }
        Ok((losses, mask))
    }

    fn apply(&mut self, model: &mut ClassifierModel, grads: &Gradients, n: usize) {
        let rate = self.schedule.rate(n);
        let mu = self.schedule.momentum;
        let velocity = self.velocity.get_or_insert_with(|| {
            grads
                .layers
                .iter()
                .map(|g| Layer {
                    weights: Array2::zeros(g.weights.raw_dim()),
                    bias: Array1::zeros(g.bias.raw_dim()),
                })
                .collect()
        });
        for ((p, g), v) in model.layers_mut().iter_mut().zip(&grads.layers).zip(velocity) {
            v.weights.zip_mut_with(&g.weights, |v, &g| *v = mu * *v + g);
            v.bias.zip_mut_with(&g.bias, |v, &g| *v = mu * *v + g);
            p.weights.scaled_add(-rate, &v.weights);
            p.bias.scaled_add(-rate, &v.bias);
        }
    }
}

/// Endless stream of mini-batch indices drawn from reshuffled epochs.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    n: usize,
    order: Vec<usize>,
    pos: usize,
    rng: ChaCha8Rng,
}

impl BatchSampler {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = shuffled_indices(n, &mut rng);
        Self {
            n,
            order,
            pos: 0,
            rng,
        }
    }

    /// `min(size, n)` distinct indices; wraps into a fresh epoch when needed.
    pub fn next_batch(&mut self, size: usize) -> Vec<usize> {
        let size = size.min(self.n);
        let mut out = Vec::with_capacity(size);
        while out.len() < size {
            if self.pos == self.n {
                self.order = shuffled_indices(self.n, &mut self.rng);
                self.pos = 0;
            }
            let idx = self.order[self.pos];
            self.pos += 1;
            if !out.contains(&idx) {
                out.push(idx);
            }
        }
        out
    }
}

/// Supervised training settings shared by the source model and the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub iterations: usize,
    pub batch_size: usize,
    pub eta0: f64,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![256, 128],
            iterations: 2000,
            batch_size: 64,
            eta0: 0.01,
            momentum: 0.9,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn layer_dims(&self, d: usize, k: usize) -> Vec<usize> {
        let mut dims = vec![d];
        dims.extend(&self.hidden);
        dims.push(k);
        dims
    }
}

/// Minimize cross-entropy on a labeled source split.
pub fn train_source(source: &DatasetSplit, config: &TrainConfig) -> Result<ClassifierModel> {
    let labels = source
        .training_labels()
        .ok_or_else(|| Error::Config("source training needs a split with training labels".into()))?;
    if config.batch_size == 0 {
        return Err(Error::Config("batch_size must be >= 1".into()));
    }
    let dims = config.layer_dims(source.dim(), source.k());
    let mut model = ClassifierModel::init(&dims, config.seed)?;
    let schedule = SgdSchedule::new(config.eta0, config.iterations, config.momentum)?;
    let mut sgd = Sgd::new(schedule);
    let mut sampler = BatchSampler::new(source.len(), config.seed.wrapping_add(1));
    for n in 0..config.iterations {
        let idx = sampler.next_batch(config.batch_size);
        let x = source.features().select(Axis(0), &idx);
        let y: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
        let mask = vec![true; idx.len()];
        sgd.step(&mut model, x.view(), &y, &mask, n)?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn schedule_endpoints() {
        let s = SgdSchedule::new(0.01, 100, 0.0).unwrap();
        assert_eq!(s.rate(0), 0.01);
        assert!((s.rate(100) - 0.0016556002607617019).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for n in 0..=100 {
            assert!(s.rate(n) <= prev);
            prev = s.rate(n);
        }
    }

    #[test]
    fn empty_mask_leaves_model_unchanged() {
        let mut m = ClassifierModel::init(&[2, 3, 2], 3).unwrap();
        let before = m.clone();
        let mut sgd = Sgd::new(SgdSchedule::new(0.01, 10, 0.9).unwrap());
        let losses = sgd
            .step(&mut m, array![[1.0, 2.0], [3.0, 4.0]].view(), &[0, 1], &[false, false], 0)
            .unwrap();
        assert_eq!(losses.len(), 2);
        assert_eq!(m, before);
    }

    #[test]
    fn single_sample_matches_closed_form_gradient() {
        // Linear softmax: dL/dW = x ⊗ (p - e_y), dL/db = p - e_y.
        let w = array![[0.2, -0.1], [0.4, 0.3]];
        let b = array![0.05, -0.05];
        let mut m = ClassifierModel::from_layers(vec![Layer {
            weights: w.clone(),
            bias: b.clone(),
        }])
        .unwrap();
        let x = [1.5, -0.5];
        let z0 = x[0] * w[[0, 0]] + x[1] * w[[1, 0]] + b[0];
        let z1 = x[0] * w[[0, 1]] + x[1] * w[[1, 1]] + b[1];
        let p1 = 1.0 / (1.0 + (z0 - z1).exp());
        let p = [1.0 - p1, p1];
        let y = 1;
        let err = [p[0], p[1] - 1.0];
        let mut sgd = Sgd::new(SgdSchedule::new(0.01, 10, 0.0).unwrap());
        // Second row is masked out and must not contribute.
        sgd.step(
            &mut m,
            array![[x[0], x[1]], [9.0, 9.0]].view(),
            &[y, 0],
            &[true, false],
            0,
        )
        .unwrap();
        let l = &m.layers()[0];
        for i in 0..2 {
            for j in 0..2 {
                let expect = w[[i, j]] - 0.01 * x[i] * err[j];
                assert!((l.weights[[i, j]] - expect).abs() < 1e-15);
            }
            assert!((l.bias[i] - (b[i] - 0.01 * err[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn sampler_batches_are_distinct_and_cover_epochs() {
        let mut s = BatchSampler::new(10, 0);
        let mut seen = [0; 10];
        for _ in 0..5 {
            let b = s.next_batch(4);
            let mut u = b.clone();
            u.sort_unstable();
            u.dedup();
            assert_eq!(u.len(), 4);
            for i in b {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 2));
        assert_eq!(BatchSampler::new(3, 0).next_batch(64).len(), 3);
    }

    #[test]
    fn unlabeled_source_is_rejected() {
        let split = DatasetSplit::unlabeled(array![[0.0, 1.0]], 2).unwrap();
        assert!(matches!(
            train_source(&split, &TrainConfig::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn zero_iterations_returns_initialized_model() {
        let split = DatasetSplit::new(array![[0.0, 1.0], [1.0, 0.0]], Some(vec![0, 1]), 2).unwrap();
        let cfg = TrainConfig {
            hidden: vec![4],
            iterations: 0,
            ..TrainConfig::default()
        };
        let m = train_source(&split, &cfg).unwrap();
        assert_eq!(m, ClassifierModel::init(&[2, 4, 2], cfg.seed).unwrap());
    }
}
