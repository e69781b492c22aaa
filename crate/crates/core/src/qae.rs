//! Quantum autoencoder: encoding, trainable ansatz and SWAP test on the trash
//! register.
//!
//! Register layout is `[data (latent then trash) | reference | aux]`. The
//! trash qubits are the highest-indexed data qubits, each paired with a fresh
//! reference qubit in `|0>`. With `p1` the probability of reading 1 on the
//! auxiliary qubit, the similarity is `S = 1 - 2 p1` and the anomaly score is
//! `A = max(0, 1 - S)`.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_ansatz, AnsatzSpec};
use crate::encode::{encode_sample, encoding_circuit, EncodingSpec, ScaledSample, Technique};
use crate::error::{Error, Result};
use crate::optim::{cobyla_minimize, CobylaConfig, CobylaStatus};
use crate::rng::{self, stream};
use crate::scalar::{mean, Scalar};
use crate::sim::{sample_circuit, Circuit, Gate, NoiseModel, Statevector};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LayoutRepr", into = "LayoutRepr")]
pub struct QaeLayout {
    n_data: usize,
    n_trash: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutRepr {
    n_data: usize,
    n_trash: usize,
}

impl TryFrom<LayoutRepr> for QaeLayout {
    type Error = Error;
    fn try_from(r: LayoutRepr) -> Result<Self> {
        QaeLayout::new(r.n_data, r.n_trash)
    }
}

impl From<QaeLayout> for LayoutRepr {
    fn from(l: QaeLayout) -> Self {
        LayoutRepr {
            n_data: l.n_data,
            n_trash: l.n_trash,
        }
    }
}

impl QaeLayout {
    pub fn new(n_data: usize, n_trash: usize) -> Result<Self> {
        if n_trash == 0 || n_trash > n_data {
            return Err(Error::InvalidSpec(format!(
                "need 1 <= n_trash <= n_data, got n_trash = {n_trash}, n_data = {n_data}"
            )));
        }
        let total = n_data + n_trash + 1;
        if total > crate::sim::MAX_QUBITS {
            return Err(Error::TooManyQubits(total));
        }
        Ok(Self { n_data, n_trash })
    }

    /// Default trash count for an encoding: half the data qubits for
    /// DenseAngle and EfficientSU2, a quarter for Angle, one for Amplitude.
    /// Always at least one trash qubit and, when there are two or more data
    /// qubits, at least one latent qubit.
    pub fn default_for(encoding: &EncodingSpec) -> Result<Self> {
        let n = encoding.n_qubits();
        let k = match encoding.technique() {
            Technique::Amplitude => 1,
            Technique::Angle => n / 4,
            Technique::DenseAngle | Technique::EfficientSu2 => n / 2,
        };
        let k = k.max(1).min(n.saturating_sub(1).max(1));
        Self::new(n, k)
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn n_trash(&self) -> usize {
        self.n_trash
    }

    pub fn n_latent(&self) -> usize {
        self.n_data - self.n_trash
    }

    pub fn trash_indices(&self) -> Vec<usize> {
        (self.n_latent()..self.n_data).collect()
    }

    pub fn reference_indices(&self) -> Vec<usize> {
        (self.n_data..self.n_data + self.n_trash).collect()
    }

    pub fn aux_index(&self) -> usize {
        self.n_data + self.n_trash
    }

    pub fn total_qubits(&self) -> usize {
        self.n_data + self.n_trash + 1
    }
}

/// The data-independent part of the QAE (ansatz and SWAP test on the full
/// register) together with what is needed to load a sample in front of it.
#[derive(Clone, Debug, PartialEq)]
pub struct QaeCircuit<T> {
    pub encoding: EncodingSpec,
    pub layout: QaeLayout,
    /// Ansatz then SWAP test; its parameters are the ansatz parameters.
    pub body: Circuit<T>,
}

/// Builds encoder ansatz plus SWAP test. The circuit ends with `H` on the
/// auxiliary qubit; no decoder is included.
pub fn assemble_circuit<T: Scalar>(
    encoding: &EncodingSpec,
    ansatz: &AnsatzSpec,
    layout: &QaeLayout,
) -> Result<QaeCircuit<T>> {
    check_shapes(encoding, ansatz, layout)?;
    let mut body = Circuit::new(layout.total_qubits())?;
    body.extend(&build_ansatz::<T>(ansatz)?)?;
    let aux = layout.aux_index();
    body.push(Gate::h(aux))?;
    for (t, r) in layout
        .trash_indices()
        .into_iter()
        .zip(layout.reference_indices())
    {
        body.push(Gate::cswap(aux, t, r)?)?;
    }
    body.push(Gate::h(aux))?;
    Ok(QaeCircuit {
        encoding: encoding.clone(),
        layout: layout.clone(),
        body,
    })
}

fn check_shapes(encoding: &EncodingSpec, ansatz: &AnsatzSpec, layout: &QaeLayout) -> Result<()> {
    ansatz.validate()?;
    if ansatz.n_qubits != layout.n_data() || encoding.n_qubits() != layout.n_data() {
        return Err(Error::InvalidSpec(format!(
            "layout has {} data qubits but ansatz uses {} and encoding {}",
            layout.n_data(),
            ansatz.n_qubits,
            encoding.n_qubits()
        )));
    }
    Ok(())
}

impl<T: Scalar> QaeCircuit<T> {
    pub fn n_params(&self) -> usize {
        self.body.n_params()
    }

    /// Encoded sample on the data qubits, reference and aux qubits in `|0>`.
    pub fn prepare(&self, sample: &ScaledSample<T>) -> Result<Statevector<T>> {
        let data = encode_sample(sample, &self.encoding)?;
        data.extend_zeros(self.layout.n_trash() + 1)
    }

    /// Whole circuit for one sample, starting from `|0...0>`: encoding gates
    /// followed by the body. `None` for amplitude encoding, whose loading is
    /// a state preparation rather than a gate sequence.
    pub fn full_circuit(&self, sample: &ScaledSample<T>) -> Result<Option<Circuit<T>>> {
        let Some(enc) = encoding_circuit(&sample.values, &self.encoding)? else {
            return Ok(None);
        };
        let mut c = Circuit::new(self.layout.total_qubits())?;
        c.extend(&enc)?;
        c.extend(&self.body)?;
        Ok(Some(c))
    }

    fn exact(&self, params: &[T], prepared: &Statevector<T>) -> Result<SwapTestResult<T>> {
        let out = self.body.run(params, prepared)?;
        let p1 = out.marginal_prob_one(self.layout.aux_index())?;
        let s = (T::one() - T::of(2.0) * p1).max(T::zero()).min(T::one());
        Ok(SwapTestResult {
            similarity: s,
            anomaly: T::one() - s,
            shots: None,
        })
    }

    fn sampled(
        &self,
        params: &[T],
        prepared: &Statevector<T>,
        shots: u64,
        noise: Option<&NoiseModel>,
        seed: u64,
    ) -> Result<SwapTestResult<T>> {
        let l = sample_circuit(
            &self.body,
            params,
            prepared,
            self.layout.aux_index(),
            shots,
            noise,
            seed,
        )?;
        let s = T::one() - T::of(2.0 * l as f64 / shots as f64);
        Ok(SwapTestResult {
            similarity: s,
            anomaly: (T::one() - s).max(T::zero()).min(T::one()),
            shots: Some(shots),
        })
    }

    pub fn score(
        &self,
        params: &[T],
        sample: &ScaledSample<T>,
        mode: &ScoreMode,
    ) -> Result<SwapTestResult<T>> {
        self.score_prepared(params, &self.prepare(sample)?, mode)
    }

    /// Scores an arbitrary state of the data register, which need not come
    /// from any encoding.
    pub fn score_state(
        &self,
        params: &[T],
        data: &Statevector<T>,
        mode: &ScoreMode,
    ) -> Result<SwapTestResult<T>> {
        if data.n_qubits() != self.layout.n_data() {
            return Err(Error::LengthMismatch {
                expected: self.layout.n_data(),
                got: data.n_qubits(),
            });
        }
        let prepared = data.extend_zeros(self.layout.n_trash() + 1)?;
        self.score_prepared(params, &prepared, mode)
    }

    fn score_prepared(
        &self,
        params: &[T],
        prepared: &Statevector<T>,
        mode: &ScoreMode,
    ) -> Result<SwapTestResult<T>> {
        match mode {
            ScoreMode::Exact => self.exact(params, prepared),
            ScoreMode::Shots { shots, seed, noise } => {
                self.sampled(params, prepared, *shots, noise.as_ref(), *seed)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SwapTestResult<T> {
    /// `1 - 2 p1`; within `[0, 1]` in exact mode and `[-1, 1]` when sampled.
    pub similarity: T,
    /// `max(0, 1 - S)`, clamped to `[0, 1]`.
    pub anomaly: T,
    /// `None` in exact mode.
    pub shots: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScoreMode {
    #[default]
    Exact,
    Shots {
        shots: u64,
        seed: u64,
        #[serde(default)]
        noise: Option<NoiseModel>,
    },
}

impl ScoreMode {
    /// Same mode with a different shot seed; exact mode is unchanged.
    pub fn reseeded(&self, seed: u64) -> ScoreMode {
        match self {
            ScoreMode::Exact => ScoreMode::Exact,
            ScoreMode::Shots { shots, noise, .. } => ScoreMode::Shots {
                shots: *shots,
                seed,
                noise: *noise,
            },
        }
    }

    pub fn is_noisy(&self) -> bool {
        matches!(self, ScoreMode::Shots { noise: Some(n), .. } if !n.is_noiseless())
    }

    /// `exact`, `shots` or `shots+noise`.
    pub fn describe(&self) -> &'static str {
        match self {
            ScoreMode::Exact => "exact",
            _ if self.is_noisy() => "shots+noise",
            ScoreMode::Shots { .. } => "shots",
        }
    }

    /// Mode for the `index`-th sample of a batch: shot seeds are split per
    /// sample so results do not depend on evaluation order.
    fn for_sample(&self, index: usize) -> ScoreMode {
        match self {
            ScoreMode::Exact => ScoreMode::Exact,
            ScoreMode::Shots { shots, seed, noise } => ScoreMode::Shots {
                shots: *shots,
                seed: rng::derive_seed(*seed, &format!("{}/{index}", stream::SAMPLING)),
                noise: *noise,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamInit {
    /// Uniform on `[-π, π]` from the `init` substream.
    #[default]
    Uniform,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Objective-evaluation budget handed to COBYLA.
    pub max_evals: usize,
    pub batch_size: usize,
    pub seed: u64,
    #[serde(default)]
    pub init: ParamInit,
    #[serde(default = "default_rho_begin")]
    pub rho_begin: f64,
    #[serde(default = "default_rho_end")]
    pub rho_end: f64,
}

fn default_rho_begin() -> f64 {
    CobylaConfig::default().rho_begin
}

fn default_rho_end() -> f64 {
    CobylaConfig::default().rho_end
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_evals: 60,
            batch_size: 64,
            seed: 0,
            init: ParamInit::Uniform,
            rho_begin: default_rho_begin(),
            rho_end: default_rho_end(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TrainMeta<T> {
    pub config: TrainConfig,
    /// Rows of the training set that formed the fixed batch.
    pub batch_indices: Vec<usize>,
    /// Batch cost at every objective evaluation.
    pub loss_trace: Vec<T>,
    pub status: CobylaStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct QaeModel<T> {
    pub encoding: EncodingSpec,
    pub ansatz: AnsatzSpec,
    pub layout: QaeLayout,
    pub params: Vec<T>,
    /// Set by [`calibrate_threshold`].
    pub threshold: Option<T>,
    pub train_meta: Option<TrainMeta<T>>,
}

impl<T: Scalar> QaeModel<T> {
    /// Untrained model with all-zero parameters.
    pub fn new(encoding: EncodingSpec, ansatz: AnsatzSpec, layout: QaeLayout) -> Result<Self> {
        check_shapes(&encoding, &ansatz, &layout)?;
        let params = vec![T::zero(); ansatz.n_params()];
        Ok(Self {
            encoding,
            ansatz,
            layout,
            params,
            threshold: None,
            train_meta: None,
        })
    }

    pub fn circuit(&self) -> Result<QaeCircuit<T>> {
        let c = assemble_circuit(&self.encoding, &self.ansatz, &self.layout)?;
        if self.params.len() != c.n_params() {
            return Err(Error::ParamCount {
                expected: c.n_params(),
                got: self.params.len(),
            });
        }
        Ok(c)
    }
}

pub fn similarity<T: Scalar>(
    model: &QaeModel<T>,
    sample: &ScaledSample<T>,
    mode: &ScoreMode,
) -> Result<SwapTestResult<T>> {
    model.circuit()?.score(&model.params, sample, mode)
}

/// Scores every sample, in parallel, returning results in input order.
pub fn score_samples<T: Scalar>(
    model: &QaeModel<T>,
    samples: &[ScaledSample<T>],
    mode: &ScoreMode,
) -> Result<Vec<SwapTestResult<T>>> {
    let c = model.circuit()?;
    samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| c.score(&model.params, s, &mode.for_sample(i)))
        .collect()
}

/// Mean anomaly score over the batch in exact mode.
pub fn batch_cost<T: Scalar>(
    params: &[T],
    batch: &[ScaledSample<T>],
    circuit: &QaeCircuit<T>,
) -> Result<T> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let prepared = batch
        .iter()
        .map(|s| circuit.prepare(s))
        .collect::<Result<Vec<_>>>()?;
    prepared_cost(params, &prepared, circuit)
}

fn prepared_cost<T: Scalar>(
    params: &[T],
    prepared: &[Statevector<T>],
    circuit: &QaeCircuit<T>,
) -> Result<T> {
    let scores = prepared
        .par_iter()
        .map(|p| circuit.exact(params, p).map(|r| r.anomaly))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(&scores))
}

/// Fits the ansatz parameters with COBYLA on one fixed batch drawn from
/// `dataset`. The returned model has no threshold yet.
pub fn train<T: Scalar>(
    dataset: &[ScaledSample<T>],
    encoding: &EncodingSpec,
    ansatz: &AnsatzSpec,
    layout: &QaeLayout,
    config: &TrainConfig,
) -> Result<QaeModel<T>> {
    if dataset.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidSpec("batch_size must be at least 1".into()));
    }
    let cobyla = CobylaConfig {
        max_evals: config.max_evals,
        rho_begin: config.rho_begin,
        rho_end: config.rho_end,
    };
    cobyla.validate()?;
    let mut model = QaeModel::new(encoding.clone(), ansatz.clone(), layout.clone())?;
    let circuit = model.circuit()?;

    let mut batch_rng = rng::substream(config.seed, stream::BATCH);
    let take = config.batch_size.min(dataset.len());
    let mut batch_indices = sample_indices(&mut batch_rng, dataset.len(), take).into_vec();
    batch_indices.sort_unstable();
    let prepared = batch_indices
        .iter()
        .map(|&i| circuit.prepare(&dataset[i]))
        .collect::<Result<Vec<_>>>()?;

    let x0: Vec<T> = match config.init {
        ParamInit::Zero => vec![T::zero(); circuit.n_params()],
        ParamInit::Uniform => {
            let mut r = rng::substream(config.seed, stream::INIT);
            (0..circuit.n_params())
                .map(|_| T::of(r.random_range(-std::f64::consts::PI..=std::f64::consts::PI)))
                .collect()
        }
    };

    let mut failure = None;
    let result = cobyla_minimize(
        |x: &[T]| match prepared_cost(x, &prepared, &circuit) {
            Ok(c) => c,
            Err(e) => {
                failure.get_or_insert(e);
                T::nan()
            }
        },
        &x0,
        &cobyla,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    if !matches!(
        result.status,
        CobylaStatus::Converged | CobylaStatus::MaxEvalsReached
    ) {
        log::warn!(
            "COBYLA stopped early ({:?}); keeping best-so-far parameters",
            result.status
        );
    }
    model.params = result.x_best;
    model.train_meta = Some(TrainMeta {
        config: config.clone(),
        batch_indices,
        loss_trace: result.trace,
        status: result.status,
    });
    Ok(model)
}

pub fn calibrate_threshold<T: Scalar>(
    mut model: QaeModel<T>,
    train_scores: &[T],
) -> Result<QaeModel<T>> {
    model.threshold = Some(crate::eval::threshold(train_scores)?);
    Ok(model)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Normal,
    Anomalous,
}

/// Strictly above the threshold is anomalous.
pub fn label_for<T: Scalar>(score: T, threshold: T) -> Label {
    if score > threshold {
        Label::Anomalous
    } else {
        Label::Normal
    }
}

pub fn classify<T: Scalar>(
    model: &QaeModel<T>,
    sample: &ScaledSample<T>,
    mode: &ScoreMode,
) -> Result<(Label, T)> {
    let threshold = model.threshold.ok_or(Error::Uncalibrated)?;
    let a = similarity(model, sample, mode)?.anomaly;
    Ok((label_for(a, threshold), a))
}
