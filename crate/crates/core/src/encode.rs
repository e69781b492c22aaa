//! Classical-to-quantum data loading.
//!
//! Four techniques are supported:
//!
//! * `Amplitude`: the L2-normalised feature vector becomes the amplitude
//!   vector, zero-padded to `2^n` with `n = ceil(log2(features))`.
//! * `Angle`: one qubit per feature, `Ry(x_j)|0>`.
//! * `DenseAngle`: two features per qubit, `Ry(x_{2j})` then `Rz(x_{2j+1})`.
//! * `EfficientSU2`: layered `Ry`/`Rz` rotations with CNOT entanglement whose
//!   rotation slots are filled with feature values in layer order.
//!
//! Angle-family features are min-max scaled to `[0, π]` using statistics from
//! the training split only; test values outside that range are clamped.

use serde::{Deserialize, Serialize};

use crate::ansatz::{entanglement_pairs, Entanglement};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::{Circuit, Gate, Statevector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    Amplitude,
    Angle,
    DenseAngle,
    #[serde(rename = "efficient_su2")]
    EfficientSu2,
}

impl Technique {
    pub fn scale_domain(self) -> ScaleDomain {
        match self {
            Technique::Amplitude => ScaleDomain::UnitNorm,
            _ => ScaleDomain::Angle,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleDomain {
    /// Values in `[0, π]`.
    Angle,
    /// Row has unit L2 norm.
    UnitNorm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EncodingSpecRepr", into = "EncodingSpecRepr")]
pub struct EncodingSpec {
    technique: Technique,
    n_features: usize,
    n_qubits: usize,
    su2_reps: usize,
    su2_entanglement: Entanglement,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EncodingSpecRepr {
    technique: Technique,
    n_features: usize,
    n_qubits: usize,
    #[serde(default = "one")]
    su2_reps: usize,
    #[serde(default = "Entanglement::su2_default")]
    su2_entanglement: Entanglement,
}

fn one() -> usize {
    1
}

impl TryFrom<EncodingSpecRepr> for EncodingSpec {
    type Error = Error;

    fn try_from(r: EncodingSpecRepr) -> Result<Self> {
        let spec = match r.technique {
            Technique::EfficientSu2 => EncodingSpec::efficient_su2(
                r.n_features,
                r.n_qubits,
                r.su2_reps,
                r.su2_entanglement,
            )?,
            t => EncodingSpec::new(t, r.n_features)?,
        };
        if spec.n_qubits != r.n_qubits {
            return Err(Error::InvalidSpec(format!(
                "{:?} with {} features needs {} qubits, file says {}",
                r.technique, r.n_features, spec.n_qubits, r.n_qubits
            )));
        }
        Ok(spec)
    }
}

impl From<EncodingSpec> for EncodingSpecRepr {
    fn from(s: EncodingSpec) -> Self {
        Self {
            technique: s.technique,
            n_features: s.n_features,
            n_qubits: s.n_qubits,
            su2_reps: s.su2_reps,
            su2_entanglement: s.su2_entanglement,
        }
    }
}

/// `ceil(log2(n))`, at least one qubit.
fn amplitude_qubits(n_features: usize) -> usize {
    n_features.next_power_of_two().trailing_zeros().max(1) as usize
}

impl EncodingSpec {
    /// Spec for `Amplitude`, `Angle` or `DenseAngle`; the qubit count follows
    /// from the feature count. `EfficientSu2` uses its minimal layout: the
    /// fewest qubits whose `2·n·(reps+1)` rotation slots hold every feature
    /// with `reps = 1` and reverse-linear entanglement.
    pub fn new(technique: Technique, n_features: usize) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::InvalidSpec(
                "encoding needs at least one feature".into(),
            ));
        }
        let n_qubits = match technique {
            Technique::Amplitude => amplitude_qubits(n_features),
            Technique::Angle => n_features,
            Technique::DenseAngle => n_features.div_ceil(2),
            Technique::EfficientSu2 => {
                return Self::efficient_su2(
                    n_features,
                    n_features.div_ceil(4),
                    1,
                    Entanglement::su2_default(),
                )
            }
        };
        if n_qubits > crate::sim::MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        Ok(Self {
            technique,
            n_features,
            n_qubits,
            su2_reps: 1,
            su2_entanglement: Entanglement::su2_default(),
        })
    }

    pub fn efficient_su2(
        n_features: usize,
        n_qubits: usize,
        reps: usize,
        entanglement: Entanglement,
    ) -> Result<Self> {
        if n_features == 0 || n_qubits == 0 || reps == 0 {
            return Err(Error::InvalidSpec(
                "EfficientSU2 needs features, qubits and reps all >= 1".into(),
            ));
        }
        if n_qubits > crate::sim::MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let slots = 2 * n_qubits * (reps + 1);
        if slots < n_features {
            return Err(Error::InvalidSpec(format!(
                "EfficientSU2 on {n_qubits} qubits with {reps} reps has {slots} slots for {n_features} features"
            )));
        }
        Ok(Self {
            technique: Technique::EfficientSu2,
            n_features,
            n_qubits,
            su2_reps: reps,
            su2_entanglement: entanglement,
        })
    }

    pub fn technique(&self) -> Technique {
        self.technique
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn su2_reps(&self) -> usize {
        self.su2_reps
    }

    pub fn su2_entanglement(&self) -> Entanglement {
        self.su2_entanglement
    }
}

/// One row ready for encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScaledSample<T> {
    pub values: Vec<T>,
    pub domain: ScaleDomain,
    /// Set when an all-zero amplitude row was replaced by the first basis vector.
    #[serde(default)]
    pub zero_row_fallback: bool,
}

/// Per-technique scaler fitted on training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureScaler<T> {
    /// Min-max to `[0, π]` with clamping.
    MinMaxAngle { min: Vec<T>, max: Vec<T> },
    /// Row-wise L2 normalisation (stateless apart from the width).
    RowNorm { n_features: usize },
}

fn check_matrix<T: Scalar>(rows: &[Vec<T>]) -> Result<usize> {
    let width = rows.first().map(Vec::len).unwrap_or(0);
    if rows.is_empty() || width == 0 {
        return Err(Error::Empty("feature matrix"));
    }
    for r in rows {
        if r.len() != width {
            return Err(Error::LengthMismatch {
                expected: width,
                got: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature value".into()));
        }
    }
    Ok(width)
}

impl<T: Scalar> FeatureScaler<T> {
    pub fn fit(train: &[Vec<T>], technique: Technique) -> Result<Self> {
        let width = check_matrix(train)?;
        Ok(match technique.scale_domain() {
            ScaleDomain::UnitNorm => FeatureScaler::RowNorm { n_features: width },
            ScaleDomain::Angle => {
                let mut min = vec![T::infinity(); width];
                let mut max = vec![T::neg_infinity(); width];
                for r in train {
                    for (j, &v) in r.iter().enumerate() {
                        min[j] = min[j].min(v);
                        max[j] = max[j].max(v);
                    }
                }
                FeatureScaler::MinMaxAngle { min, max }
            }
        })
    }

    pub fn n_features(&self) -> usize {
        match self {
            FeatureScaler::MinMaxAngle { min, .. } => min.len(),
            FeatureScaler::RowNorm { n_features } => *n_features,
        }
    }

    pub fn transform_row(&self, row: &[T]) -> Result<ScaledSample<T>> {
        if row.len() != self.n_features() {
            return Err(Error::LengthMismatch {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature value".into()));
        }
        match self {
            FeatureScaler::MinMaxAngle { min, max } => {
                let values = row
                    .iter()
                    .zip(min.iter().zip(max))
                    .map(|(&v, (&lo, &hi))| {
                        let span = hi - lo;
                        // constant training column carries no information
                        if span <= T::zero() {
                            return T::zero();
                        }
                        let t = ((v - lo) / span).max(T::zero()).min(T::one());
                        t * T::PI()
                    })
                    .collect();
                Ok(ScaledSample {
                    values,
                    domain: ScaleDomain::Angle,
                    zero_row_fallback: false,
                })
            }
            FeatureScaler::RowNorm { .. } => {
                let norm = row.iter().fold(T::zero(), |a, &v| a + v * v).sqrt();
                if norm <= T::zero() {
                    log::warn!("all-zero row mapped to the first basis state");
                    let mut values = vec![T::zero(); row.len()];
                    values[0] = T::one();
                    return Ok(ScaledSample {
                        values,
                        domain: ScaleDomain::UnitNorm,
                        zero_row_fallback: true,
                    });
                }
                Ok(ScaledSample {
                    values: row.iter().map(|&v| v / norm).collect(),
                    domain: ScaleDomain::UnitNorm,
                    zero_row_fallback: false,
                })
            }
        }
    }

    pub fn transform(&self, rows: &[Vec<T>]) -> Result<Vec<ScaledSample<T>>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

/// Fits a scaler on `train` and scales `rows` with it.
pub fn scale_features<T: Scalar>(
    train: &[Vec<T>],
    rows: &[Vec<T>],
    spec: &EncodingSpec,
) -> Result<Vec<ScaledSample<T>>> {
    FeatureScaler::fit(train, spec.technique())?.transform(rows)
}

/// Gate-based loading circuit with the sample's angles baked in.
/// `None` for amplitude encoding, which is a direct state preparation.
pub fn encoding_circuit<T: Scalar>(
    values: &[T],
    spec: &EncodingSpec,
) -> Result<Option<Circuit<T>>> {
    if values.len() != spec.n_features {
        return Err(Error::LengthMismatch {
            expected: spec.n_features,
            got: values.len(),
        });
    }
    let n = spec.n_qubits;
    let mut c = Circuit::new(n)?;
    match spec.technique {
        Technique::Amplitude => return Ok(None),
        Technique::Angle => {
            for (q, &x) in values.iter().enumerate() {
                c.push(Gate::ry(q, x)?)?;
            }
        }
        Technique::DenseAngle => {
            for q in 0..n {
                let y = values[2 * q];
                let z = values.get(2 * q + 1).copied().unwrap_or_else(T::zero);
                c.push(Gate::ry(q, y)?)?;
                c.push(Gate::rz(q, z)?)?;
            }
        }
        Technique::EfficientSu2 => {
            let pairs = entanglement_pairs(n, spec.su2_entanglement);
            let mut slot = values.iter().copied();
            let layer = |c: &mut Circuit<T>, slot: &mut dyn Iterator<Item = T>| -> Result<()> {
                for q in 0..n {
                    c.push(Gate::ry(q, slot.next().unwrap_or_else(T::zero))?)?;
                }
                for q in 0..n {
                    c.push(Gate::rz(q, slot.next().unwrap_or_else(T::zero))?)?;
                }
                Ok(())
            };
            for _ in 0..spec.su2_reps {
                layer(&mut c, &mut slot)?;
                for &(a, b) in &pairs {
                    c.push(Gate::cnot(a, b)?)?;
                }
            }
            layer(&mut c, &mut slot)?;
        }
    }
    Ok(Some(c))
}

/// Initial state for `sample` under `spec`.
pub fn encode_sample<T: Scalar>(
    sample: &ScaledSample<T>,
    spec: &EncodingSpec,
) -> Result<Statevector<T>> {
    if sample.values.len() != spec.n_features {
        return Err(Error::LengthMismatch {
            expected: spec.n_features,
            got: sample.values.len(),
        });
    }
    match encoding_circuit(&sample.values, spec)? {
        None => {
            let mut padded = sample.values.clone();
            padded.resize(1 << spec.n_qubits, T::zero());
            Statevector::from_real_padded(&padded)
        }
        Some(c) => c.run(&[], &Statevector::zero(spec.n_qubits)?),
    }
}
