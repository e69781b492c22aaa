//! Classical dense autoencoder baseline.
//!
//! Encoder widths run from the input down to the latent layer; the decoder
//! mirrors them back up. Hidden layers (the latent one included) use the
//! configured activation and the output layer is linear. Training minimises
//! the mean absolute reconstruction error with mini-batch Adam.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{adam_step, AdamConfig, AdamState};
use crate::rng::{self, stream};
use crate::scalar::{mean, population_variance, Scalar};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Relu => x.max(T::zero()),
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activation's output `y`.
    fn grad_from_output<T: Scalar>(self, y: T) -> T {
        match self {
            Activation::Relu => {
                if y > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => T::one() - y * y,
            Activation::Linear => T::one(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaeArch {
    /// Input width first, latent width last.
    pub encoder: Vec<usize>,
    #[serde(default)]
    pub activation: Activation,
    #[serde(default)]
    pub seed: u64,
}

impl CaeArch {
    /// `n → (n + latent)/2 → latent` with `latent = min(8, n/2)`; the middle
    /// layer is dropped when it would not lie strictly between its
    /// neighbours. Gives 8 → 6 → 4 and 24 → 16 → 8.
    pub fn default_for(n_features: usize) -> Result<Self> {
        if n_features < 2 {
            return Err(Error::InvalidSpec(
                "autoencoder needs at least two input features".into(),
            ));
        }
        let latent = (n_features / 2).clamp(1, 8);
        let hidden = (n_features + latent) / 2;
        let mut encoder = vec![n_features];
        if hidden > latent && hidden < n_features {
            encoder.push(hidden);
        }
        encoder.push(latent);
        Ok(Self {
            encoder,
            activation: Activation::Relu,
            seed: 0,
        })
    }

    pub fn input_width(&self) -> usize {
        self.encoder[0]
    }

    pub fn latent_width(&self) -> usize {
        *self.encoder.last().expect("validated non-empty")
    }

    pub fn decoder(&self) -> Vec<usize> {
        self.encoder.iter().rev().copied().collect()
    }

    /// All layer widths, input to output.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = self.encoder.clone();
        w.extend(self.encoder.iter().rev().skip(1));
        w
    }

    pub fn validate(&self) -> Result<()> {
        if self.encoder.len() < 2 {
            return Err(Error::InvalidSpec(
                "encoder needs an input and a latent width".into(),
            ));
        }
        if self.encoder.contains(&0) {
            return Err(Error::InvalidSpec("layer widths must be positive".into()));
        }
        if self.latent_width() >= self.input_width() {
            return Err(Error::InvalidSpec(format!(
                "latent width {} must be smaller than input width {}",
                self.latent_width(),
                self.input_width()
            )));
        }
        Ok(())
    }
}

/// Dense layer `y = W x + b`, `W` row-major `n_out × n_in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Dense<T> {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    fn forward(&self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        for o in 0..self.n_out {
            let row = &self.weights[o * self.n_in..(o + 1) * self.n_in];
            let mut acc = self.bias[o];
            for (w, &xi) in row.iter().zip(x) {
                acc += *w * xi;
            }
            out.push(acc);
        }
    }
}

/// Column-wise z-score fitted on training rows. Constant columns keep unit
/// scale so they map to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Standardizer<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Scalar> Standardizer<T> {
    pub fn fit(rows: &[Vec<T>]) -> Result<Self> {
        let width = check_rows(rows, None)?;
        let mut m = Vec::with_capacity(width);
        let mut s = Vec::with_capacity(width);
        for j in 0..width {
            let col: Vec<T> = rows.iter().map(|r| r[j]).collect();
            let sd = population_variance(&col).sqrt();
            m.push(mean(&col));
            s.push(if sd > T::zero() { sd } else { T::one() });
        }
        Ok(Self { mean: m, std: s })
    }

    pub fn transform_row(&self, row: &[T]) -> Result<Vec<T>> {
        if row.len() != self.mean.len() {
            return Err(Error::LengthMismatch {
                expected: self.mean.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect())
    }

    pub fn transform(&self, rows: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

fn check_rows<T: Scalar>(rows: &[Vec<T>], width: Option<usize>) -> Result<usize> {
    let w = width.unwrap_or_else(|| rows.first().map(Vec::len).unwrap_or(0));
    if rows.is_empty() || w == 0 {
        return Err(Error::Empty("data matrix"));
    }
    for r in rows {
        if r.len() != w {
            return Err(Error::LengthMismatch {
                expected: w,
                got: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("input value".into()));
        }
    }
    Ok(w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaeTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Epochs without improvement of the full-data loss before stopping.
    pub patience: usize,
    #[serde(default)]
    pub adam: AdamConfig,
}

impl Default for CaeTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 64,
            patience: 5,
            adam: AdamConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CaeTrainMeta<T> {
    pub config: CaeTrainConfig,
    /// Full-data MAE before the first update.
    pub initial_loss: T,
    /// Full-data MAE after each completed epoch.
    pub loss_trace: Vec<T>,
    /// Epoch (1-based) whose weights were kept.
    pub best_epoch: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CaeModel<T> {
    pub arch: CaeArch,
    pub layers: Vec<Dense<T>>,
    pub threshold: Option<T>,
    pub train_meta: Option<CaeTrainMeta<T>>,
}

impl<T: Scalar> CaeModel<T> {
    /// Glorot-uniform weights from the `init` substream, zero biases.
    pub fn init(arch: &CaeArch) -> Result<Self> {
        arch.validate()?;
        let mut r = rng::substream(arch.seed, stream::INIT);
        let widths = arch.widths();
        let layers = widths
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let limit = (6.0 / (n_in + n_out) as f64).sqrt();
                Dense {
                    n_in,
                    n_out,
                    weights: (0..n_in * n_out)
                        .map(|_| T::of(r.random_range(-limit..=limit)))
                        .collect(),
                    bias: vec![T::zero(); n_out],
                }
            })
            .collect();
        Ok(Self {
            arch: arch.clone(),
            layers,
            threshold: None,
            train_meta: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.arch.validate()?;
        let widths = self.arch.widths();
        let ok = self.layers.len() + 1 == widths.len()
            && self.layers.iter().zip(widths.windows(2)).all(|(l, w)| {
                l.n_in == w[0]
                    && l.n_out == w[1]
                    && l.weights.len() == w[0] * w[1]
                    && l.bias.len() == w[1]
            });
        if !ok {
            return Err(Error::InvalidSpec(
                "autoencoder weights do not match the architecture".into(),
            ));
        }
        Ok(())
    }

    fn n_encoder_layers(&self) -> usize {
        self.arch.encoder.len() - 1
    }

    fn is_output(&self, layer: usize) -> bool {
        layer + 1 == self.layers.len()
    }

    /// Activations of every layer, input first, output last.
    fn forward_all(&self, x: &[T]) -> Vec<Vec<T>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.n_out);
            layer.forward(acts.last().expect("non-empty"), &mut out);
            if !self.is_output(i) {
                for v in &mut out {
                    *v = self.arch.activation.apply(*v);
                }
            }
            acts.push(out);
        }
        acts
    }

    pub fn reconstruct(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_input(x)?;
        Ok(self.forward_all(x).pop().expect("non-empty"))
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.arch.input_width() {
            return Err(Error::LengthMismatch {
                expected: self.arch.input_width(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

fn mae<T: Scalar>(a: &[T], b: &[T]) -> T {
    let s = a
        .iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y).abs());
    s / T::of_usize(a.len())
}

/// Mean absolute difference between `sample` and its reconstruction.
pub fn cae_score<T: Scalar>(model: &CaeModel<T>, sample: &[T]) -> Result<T> {
    Ok(mae(sample, &model.reconstruct(sample)?))
}

/// Scores rows in parallel, in input order.
pub fn cae_scores<T: Scalar>(model: &CaeModel<T>, rows: &[Vec<T>]) -> Result<Vec<T>> {
    rows.par_iter().map(|r| cae_score(model, r)).collect()
}

/// Encoder half only: one row of latent activations per input row.
pub fn cae_latent<T: Scalar>(model: &CaeModel<T>, data: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    data.iter()
        .map(|x| {
            model.check_input(x)?;
            let mut cur = x.clone();
            let mut out = Vec::new();
            for layer in &model.layers[..model.n_encoder_layers()] {
                layer.forward(&cur, &mut out);
                for v in &mut out {
                    *v = model.arch.activation.apply(*v);
                }
                std::mem::swap(&mut cur, &mut out);
            }
            Ok(cur)
        })
        .collect()
}

fn dataset_loss<T: Scalar>(model: &CaeModel<T>, data: &[Vec<T>]) -> Result<T> {
    let scores = cae_scores(model, data)?;
    let l = mean(&scores);
    if !l.is_finite() {
        return Err(Error::NonFinite("autoencoder loss".into()));
    }
    Ok(l)
}

/// Gradients of the batch-mean MAE, accumulated per layer.
fn batch_gradients<T: Scalar>(
    model: &CaeModel<T>,
    batch: &[&Vec<T>],
) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let mut gw: Vec<Vec<T>> = model
        .layers
        .iter()
        .map(|l| vec![T::zero(); l.weights.len()])
        .collect();
    let mut gb: Vec<Vec<T>> = model
        .layers
        .iter()
        .map(|l| vec![T::zero(); l.bias.len()])
        .collect();
    let scale = T::one() / T::of_usize(batch.len() * model.arch.input_width());
    for x in batch {
        let acts = model.forward_all(x);
        let output = acts.last().expect("non-empty");
        // d loss / d output; sign(0) taken as 0
        let mut delta: Vec<T> = output
            .iter()
            .zip(x.iter())
            .map(|(&y, &t)| {
                let d = y - t;
                if d > T::zero() {
                    scale
                } else if d < T::zero() {
                    -scale
                } else {
                    T::zero()
                }
            })
            .collect();
        for li in (0..model.layers.len()).rev() {
            let layer = &model.layers[li];
            let input = &acts[li];
            for o in 0..layer.n_out {
                gb[li][o] += delta[o];
                let row = &mut gw[li][o * layer.n_in..(o + 1) * layer.n_in];
                for (g, &xi) in row.iter_mut().zip(input) {
                    *g += delta[o] * xi;
                }
            }
            if li == 0 {
                break;
            }
            let mut prev = vec![T::zero(); layer.n_in];
            for o in 0..layer.n_out {
                let row = &layer.weights[o * layer.n_in..(o + 1) * layer.n_in];
                for (p, &w) in prev.iter_mut().zip(row) {
                    *p += w * delta[o];
                }
            }
            // layer li-1 is hidden, so its output went through the activation
            for (p, &y) in prev.iter_mut().zip(input) {
                *p *= model.arch.activation.grad_from_output(y);
            }
            delta = prev;
        }
    }
    (gw, gb)
}

/// Mini-batch Adam on MAE with early stopping; keeps the weights of the best
/// epoch.
pub fn cae_train<T: Scalar>(
    data: &[Vec<T>],
    arch: &CaeArch,
    config: &CaeTrainConfig,
) -> Result<CaeModel<T>> {
    let mut model = CaeModel::init(arch)?;
    check_rows(data, Some(arch.input_width()))?;
    config.adam.validate()?;
    if config.batch_size == 0 || config.epochs == 0 {
        return Err(Error::InvalidSpec(
            "epochs and batch_size must be at least 1".into(),
        ));
    }
    let mut w_state: Vec<AdamState<T>> = model
        .layers
        .iter()
        .map(|l| AdamState::new(l.weights.len()))
        .collect();
    let mut b_state: Vec<AdamState<T>> = model
        .layers
        .iter()
        .map(|l| AdamState::new(l.bias.len()))
        .collect();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut shuffle = rng::substream(arch.seed, stream::BATCH);

    let initial_loss = dataset_loss(&model, data)?;
    let mut best = (initial_loss, model.layers.clone(), 0usize);
    let mut trace = Vec::with_capacity(config.epochs);
    let mut stale = 0;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&Vec<T>> = chunk.iter().map(|&i| &data[i]).collect();
            let (gw, gb) = batch_gradients(&model, &batch);
            for (li, layer) in model.layers.iter_mut().enumerate() {
                adam_step(&mut layer.weights, &gw[li], &mut w_state[li], &config.adam)?;
                adam_step(&mut layer.bias, &gb[li], &mut b_state[li], &config.adam)?;
            }
        }
        let loss = dataset_loss(&model, data)?;
        trace.push(loss);
        if loss < best.0 {
            best = (loss, model.layers.clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    model.layers = best.1;
    model.train_meta = Some(CaeTrainMeta {
        config: config.clone(),
        initial_loss,
        loss_trace: trace,
        best_epoch: best.2,
    });
    Ok(model)
}

pub fn calibrate_cae<T: Scalar>(mut model: CaeModel<T>, train_scores: &[T]) -> Result<CaeModel<T>> {
    model.threshold = Some(crate::eval::threshold(train_scores)?);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn arch(encoder: Vec<usize>, activation: Activation) -> CaeArch {
        CaeArch {
            encoder,
            activation,
            seed: 4,
        }
    }

    #[test]
    fn default_archs() {
        assert_eq!(CaeArch::default_for(8).unwrap().encoder, vec![8, 6, 4]);
        assert_eq!(CaeArch::default_for(24).unwrap().encoder, vec![24, 16, 8]);
        assert_eq!(CaeArch::default_for(2).unwrap().encoder, vec![2, 1]);
        assert!(CaeArch::default_for(1).is_err());
        let a = CaeArch::default_for(24).unwrap();
        assert_eq!(a.decoder(), vec![8, 16, 24]);
        assert_eq!(a.widths(), vec![24, 16, 8, 16, 24]);
    }

    #[test]
    fn rejects_wide_latent() {
        assert!(arch(vec![4, 4], Activation::Linear).validate().is_err());
        assert!(arch(vec![4], Activation::Linear).validate().is_err());
        assert!(arch(vec![4, 0, 2], Activation::Linear).validate().is_err());
    }

    #[test]
    fn hand_forward_pass() {
        // 2 -> 1 -> 2 with ReLU on the hidden unit
        let mut m = CaeModel::<f64>::init(&arch(vec![2, 1], Activation::Relu)).unwrap();
        m.layers[0].weights = vec![0.5, -1.0];
        m.layers[0].bias = vec![0.25];
        m.layers[1].weights = vec![2.0, -3.0];
        m.layers[1].bias = vec![0.0, 1.0];
        // h = relu(0.5*1 - 1*(-0.5) + 0.25) = 1.25; out = (2.5, -2.75)
        let x = [1.0, -0.5];
        assert_eq!(m.reconstruct(&x).unwrap(), vec![2.5, -2.75]);
        let expected = ((2.5f64 - 1.0).abs() + (-2.75f64 + 0.5).abs()) / 2.0;
        assert_abs_diff_eq!(cae_score(&m, &x).unwrap(), expected, epsilon = 1e-15);
        assert_eq!(cae_latent(&m, &[x.to_vec()]).unwrap(), vec![vec![1.25]]);
    }

    #[test]
    fn zero_weights_give_activation_of_zero() {
        let mut m = CaeModel::<f64>::init(&CaeArch::default_for(24).unwrap()).unwrap();
        for l in &mut m.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        let z = cae_latent(&m, &[vec![1.5; 24], vec![-2.0; 24]]).unwrap();
        assert_eq!(z, vec![vec![0.0; 8]; 2]);
    }

    #[test]
    fn score_of_constant_offset() {
        let mut m = CaeModel::<f64>::init(&arch(vec![3, 1], Activation::Linear)).unwrap();
        for l in &mut m.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        m.layers[1].bias = vec![0.1; 3];
        assert_abs_diff_eq!(cae_score(&m, &[0.0; 3]).unwrap(), 0.1, epsilon = 1e-15);
        m.layers[1].bias = vec![0.0; 3];
        assert_eq!(cae_score(&m, &[0.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let a = arch(vec![3, 2], Activation::Tanh);
        let m = CaeModel::<f64>::init(&a).unwrap();
        let rows = [vec![0.3, -0.7, 1.1], vec![-0.2, 0.4, 0.05]];
        let batch: Vec<&Vec<f64>> = rows.iter().collect();
        let (gw, gb) = batch_gradients(&m, &batch);
        let loss = |m: &CaeModel<f64>| {
            rows.iter().map(|r| cae_score(m, r).unwrap()).sum::<f64>() / rows.len() as f64
        };
        let h = 1e-6;
        for li in 0..m.layers.len() {
            for k in 0..m.layers[li].weights.len() {
                let mut p = m.clone();
                p.layers[li].weights[k] += h;
                let mut q = m.clone();
                q.layers[li].weights[k] -= h;
                let fd = (loss(&p) - loss(&q)) / (2.0 * h);
                assert_abs_diff_eq!(gw[li][k], fd, epsilon = 1e-6);
            }
            for k in 0..m.layers[li].bias.len() {
                let mut p = m.clone();
                p.layers[li].bias[k] += h;
                let mut q = m.clone();
                q.layers[li].bias[k] -= h;
                let fd = (loss(&p) - loss(&q)) / (2.0 * h);
                assert_abs_diff_eq!(gb[li][k], fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let data: Vec<Vec<f64>> = (0..50)
            .map(|i| (0..4).map(|j| ((i * 3 + j * 5) % 7) as f64 / 7.0).collect())
            .collect();
        let a = arch(vec![4, 3, 2], Activation::Relu);
        let cfg = CaeTrainConfig {
            epochs: 5,
            batch_size: 8,
            ..CaeTrainConfig::default()
        };
        let m1 = cae_train(&data, &a, &cfg).unwrap();
        let m2 = cae_train(&data, &a, &cfg).unwrap();
        assert_eq!(m1, m2);
        m1.validate().unwrap();
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let data = vec![vec![1.0; 3]; 4];
        assert!(cae_train::<f64>(
            &data,
            &arch(vec![4, 2], Activation::Relu),
            &CaeTrainConfig::default()
        )
        .is_err());
    }

    #[test]
    fn standardizer_handles_constant_columns() {
        let s = Standardizer::fit(&[vec![1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        assert_eq!(s.transform_row(&[2.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(s.transform_row(&[3.0, 7.0]).unwrap(), vec![1.0, 2.0]);
    }
}
