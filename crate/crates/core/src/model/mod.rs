//! Feed-forward softmax classifier with hand-written backpropagation.

mod checkpoint;
mod gradcheck;
mod sgd;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION};
pub use gradcheck::{grad_check, numeric_gradient};
pub use sgd::{train_source, BatchSampler, Sgd, SgdSchedule, TrainConfig};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Probabilities are clamped to this before taking a log.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `fan_in × fan_out`
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Softmax MLP `d → h_1 → … → K`. Hidden layers use SiLU (`x·σ(x)`).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    layer_dims: Vec<usize>,
    layers: Vec<Layer>,
}

/// Gradient of the loss with respect to each layer's parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::Config("layer_dims needs at least input and output sizes".into()));
    }
    if dims.contains(&0) {
        return Err(Error::Config(format!("layer_dims {dims:?} contains a zero width")));
    }
    if *dims.last().unwrap() < 2 {
        return Err(Error::Config("a classifier needs at least 2 outputs".into()));
    }
    Ok(())
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn silu(x: f64) -> f64 {
    x * sigmoid(x)
}

fn silu_grad(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 + x * (1.0 - s))
}

/// Row-wise softmax, stabilized by the row maximum.
pub fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
}

/// `-log(max(p_label, 1e-12))`
pub fn cross_entropy_loss(probs: &[f64], label: usize) -> f64 {
    -probs[label].max(PROB_FLOOR).ln()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

struct ForwardCache {
    /// Input to each layer (`activations[0]` is the batch).
    activations: Vec<Array2<f64>>,
    /// Pre-activation of each hidden layer.
    pre: Vec<Array2<f64>>,
    probs: Array2<f64>,
}

impl ClassifierModel {
    /// Glorot-uniform weights and zero biases.
    pub fn init(layer_dims: &[usize], seed: u64) -> Result<Self> {
        validate_dims(layer_dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = layer_dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                Layer {
                    weights: Array2::from_shape_fn((fan_in, fan_out), |_| {
                        rng.random_range(-bound..=bound)
                    }),
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Self {
            layer_dims: layer_dims.to_vec(),
            layers,
        })
    }

    pub fn zeros(layer_dims: &[usize]) -> Result<Self> {
        validate_dims(layer_dims)?;
        let layers = layer_dims
            .windows(2)
            .map(|w| Layer {
                weights: Array2::zeros((w[0], w[1])),
                bias: Array1::zeros(w[1]),
            })
            .collect();
        Ok(Self {
            layer_dims: layer_dims.to_vec(),
            layers,
        })
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let mut dims = Vec::with_capacity(layers.len() + 1);
        for (i, l) in layers.iter().enumerate() {
            let (fi, fo) = l.weights.dim();
            if l.bias.len() != fo {
                return Err(Error::Config(format!("layer {i}: bias length {} != {fo}", l.bias.len())));
            }
            if i == 0 {
                dims.push(fi);
            } else if dims[i] != fi {
                return Err(Error::Config(format!("layer {i}: fan_in {fi} != {}", dims[i])));
            }
            dims.push(fo);
        }
        validate_dims(&dims)?;
        Ok(Self {
            layer_dims: dims,
            layers,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn num_classes(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.layer_dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Parameters flattened layer by layer: weights row-major, then bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.weights.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Config(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let mut it = params.iter();
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w = *it.next().unwrap());
            l.bias.iter_mut().for_each(|b| *b = *it.next().unwrap());
        }
        Ok(())
    }

    fn check_batch(&self, batch: &ArrayView2<f64>) -> Result<()> {
        if batch.ncols() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: batch.ncols(),
            });
        }
        Ok(())
    }

    fn forward_cached(&self, batch: ArrayView2<f64>) -> ForwardCache {
        let mut activations = vec![batch.to_owned()];
        let mut pre = Vec::with_capacity(self.layers.len() - 1);
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let z = activations[i].dot(&l.weights) + &l.bias;
            if i == last {
                let mut probs = z;
                softmax_rows(&mut probs);
                return ForwardCache {
                    activations,
                    pre,
                    probs,
                };
            }
            activations.push(z.mapv(silu));
            pre.push(z);
        }
        unreachable!("model has at least one layer")
    }

    /// Softmax probabilities, one row per input row.
    pub fn forward(&self, batch: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_batch(&batch)?;
        Ok(self.forward_cached(batch).probs)
    }

    pub fn predict_labels(&self, batch: ArrayView2<f64>) -> Result<Vec<usize>> {
        let probs = self.forward(batch)?;
        Ok(probs
            .rows()
            .into_iter()
            .map(|r| argmax(r.as_slice().unwrap()))
            .collect())
    }

    /// Per-sample cross-entropy losses for every row, plus the gradient of the
    /// mean loss over rows with `mask[i] == true`. The gradient is `None` when
    /// the mask selects nothing.
    pub fn loss_and_gradient(
        &self,
        batch: ArrayView2<f64>,
        labels: &[usize],
        mask: &[bool],
    ) -> Result<(Vec<f64>, Option<Gradients>)> {
        if mask.len() != batch.nrows() {
            return Err(Error::Data(format!(
                "batch has {} rows but {} mask entries",
                batch.nrows(),
                mask.len()
            )));
        }
        let (losses, _, grads) = self.loss_and_gradient_with(batch, labels, |_| mask.to_vec())?;
        Ok((losses, grads))
    }

    /// Like [`loss_and_gradient`](Self::loss_and_gradient), but the mask is
    /// chosen by `select` from the per-sample losses of this same forward pass.
    pub fn loss_and_gradient_with(
        &self,
        batch: ArrayView2<f64>,
        labels: &[usize],
        select: impl FnOnce(&[f64]) -> Vec<bool>,
    ) -> Result<(Vec<f64>, Vec<bool>, Option<Gradients>)> {
        self.check_batch(&batch)?;
        let n = batch.nrows();
        if labels.len() != n {
            return Err(Error::Data(format!(
                "batch has {n} rows but {} labels",
                labels.len()
            )));
        }
        let k = self.num_classes();
        if let Some(&y) = labels.iter().find(|&&y| y >= k) {
            return Err(Error::Data(format!("label {y} is not below K={k}")));
        }
        let cache = self.forward_cached(batch);
        let losses: Vec<f64> = cache
            .probs
            .rows()
            .into_iter()
            .zip(labels)
            .map(|(r, &y)| cross_entropy_loss(r.as_slice().unwrap(), y))
            .collect();
        let mask = select(&losses);
        assert_eq!(mask.len(), n, "selection mask length");
        let count = mask.iter().filter(|&&m| m).count();
        if count == 0 {
            return Ok((losses, mask, None));
        }
        let scale = 1.0 / count as f64;
        let mut delta = cache.probs;
        for (i, mut row) in delta.rows_mut().into_iter().enumerate() {
            if mask[i] {
                row[labels[i]] -= 1.0;
                row.mapv_inplace(|v| v * scale);
            } else {
                row.fill(0.0);
            }
        }
        let mut grads: Vec<Layer> = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let gw = cache.activations[i].t().dot(&delta);
            let gb = delta.sum_axis(Axis(0));
            grads.push(Layer {
                weights: gw,
                bias: gb,
            });
            if i > 0 {
                let mut back = delta.dot(&self.layers[i].weights.t());
                back.zip_mut_with(&cache.pre[i - 1], |g, &z| *g *= silu_grad(z));
                delta = back;
            }
        }
        grads.reverse();
        Ok((losses, mask, Some(Gradients { layers: grads })))
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn zero_model_is_uniform() {
        let m = ClassifierModel::zeros(&[2, 4, 3]).unwrap();
        let p = m.forward(array![[0.3, -7.0], [1.0, 2.0]].view()).unwrap();
        for v in p.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rows_sum_to_one_and_identical_rows_match() {
        let m = ClassifierModel::init(&[3, 8, 5], 1).unwrap();
        let x = array![[1.0, -2.0, 30.0], [1.0, -2.0, 30.0], [0.0, 0.0, 0.0]];
        let p = m.forward(x.view()).unwrap();
        for r in p.rows() {
            assert!((r.sum() - 1.0).abs() < 1e-6);
            assert!(r.iter().all(|&v| v >= 0.0));
        }
        assert_eq!(p.row(0), p.row(1));
    }

    #[test]
    fn dimension_mismatch() {
        let m = ClassifierModel::init(&[3, 2], 1).unwrap();
        assert!(matches!(
            m.forward(array![[1.0, 2.0]].view()),
            Err(Error::Dimension { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn loss_values() {
        assert_eq!(cross_entropy_loss(&[0.0, 1.0], 1), 0.0);
        let e = (-1.0f64).exp();
        assert!((cross_entropy_loss(&[1.0 - e, e], 1) - 1.0).abs() < 1e-15);
        let clamped = cross_entropy_loss(&[1.0, 0.0], 1);
        assert!(clamped.is_finite());
        assert!((clamped - 27.631021115928547).abs() < 1e-12);
    }

    #[test]
    fn argmax_ties_take_lowest() {
        assert_eq!(argmax(&[0.1, 0.7, 0.2]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
    }

    #[test]
    fn param_count_matches_layout() {
        let m = ClassifierModel::init(&[2, 4, 3], 0).unwrap();
        assert_eq!(m.param_count(), 27);
        assert_eq!(m.params().len(), 27);
    }

    #[test]
    fn empty_mask_has_no_gradient_but_losses() {
        let m = ClassifierModel::init(&[2, 3], 0).unwrap();
        let (l, g) = m
            .loss_and_gradient(array![[1.0, 0.0], [0.0, 1.0]].view(), &[0, 2], &[false, false])
            .unwrap();
        assert_eq!(l.len(), 2);
        assert!(g.is_none());
    }

    proptest! {
        #[test]
        fn permuting_outputs_permutes_probs(seed in 0u64..1000, x0 in -3.0f64..3.0, x1 in -3.0f64..3.0) {
            let m = ClassifierModel::init(&[2, 5, 4], seed).unwrap();
            let perm = [2usize, 0, 3, 1];
            let mut layers = m.layers().to_vec();
            let last = layers.last_mut().unwrap();
            let w = last.weights.clone();
            let b = last.bias.clone();
            for (new, &old) in perm.iter().enumerate() {
                last.weights.column_mut(new).assign(&w.column(old));
                last.bias[new] = b[old];
            }
            let pm = ClassifierModel::from_layers(layers).unwrap();
            let x = array![[x0, x1]];
            let p = m.forward(x.view()).unwrap();
            let q = pm.forward(x.view()).unwrap();
            for (new, &old) in perm.iter().enumerate() {
                prop_assert!((q[[0, new]] - p[[0, old]]).abs() < 1e-12);
            }
        }
    }
}
