//! Trainable encoder circuits acting on the data qubits.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use crate::sim::{Circuit, Gate, GateKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entanglement {
    Linear,
    ReverseLinear,
    Full,
}

impl Entanglement {
    pub(crate) fn su2_default() -> Self {
        Entanglement::ReverseLinear
    }
}

/// Ordered CNOT/CZ pairs for an entanglement pattern. Fewer than two qubits
/// gives an empty list.
pub fn entanglement_pairs(n_qubits: usize, pattern: Entanglement) -> Vec<(usize, usize)> {
    if n_qubits < 2 {
        return Vec::new();
    }
    let linear = (0..n_qubits - 1).map(|i| (i, i + 1));
    match pattern {
        Entanglement::Linear => linear.collect(),
        Entanglement::ReverseLinear => linear.rev().collect(),
        Entanglement::Full => (0..n_qubits)
            .flat_map(|i| (i + 1..n_qubits).map(move |j| (i, j)))
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    RealAmplitudes,
    PauliTwoDesign,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub n_qubits: usize,
    pub reps: usize,
    #[serde(default = "default_entanglement")]
    pub entanglement: Entanglement,
    /// Seed for the PauliTwoDesign rotation axes; unused by RealAmplitudes.
    #[serde(default)]
    pub seed: u64,
}

fn default_entanglement() -> Entanglement {
    Entanglement::Linear
}

impl AnsatzSpec {
    pub fn real_amplitudes(n_qubits: usize, reps: usize) -> Self {
        Self {
            kind: AnsatzKind::RealAmplitudes,
            n_qubits,
            reps,
            entanglement: Entanglement::Linear,
            seed: 0,
        }
    }

    pub fn pauli_two_design(n_qubits: usize, reps: usize, seed: u64) -> Self {
        Self {
            kind: AnsatzKind::PauliTwoDesign,
            n_qubits,
            reps,
            entanglement: Entanglement::Linear,
            seed,
        }
    }

    pub fn with_entanglement(mut self, entanglement: Entanglement) -> Self {
        self.entanglement = entanglement;
        self
    }

    /// `n_qubits · (reps + 1)` for both families.
    pub fn n_params(&self) -> usize {
        self.n_qubits * (self.reps + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidSpec("ansatz needs at least one qubit".into()));
        }
        if self.reps == 0 {
            return Err(Error::InvalidSpec("ansatz needs reps >= 1".into()));
        }
        if self.n_qubits > crate::sim::MAX_QUBITS {
            return Err(Error::TooManyQubits(self.n_qubits));
        }
        Ok(())
    }
}

/// Builds the parameterised circuit. Parameter slots run layer-major,
/// qubit-minor.
///
/// RealAmplitudes: `reps` blocks of (Ry layer, CNOT entanglement) and a final
/// Ry layer. PauliTwoDesign: a fixed `Ry(π/4)` layer, then `reps` blocks of
/// (seeded random-axis rotation layer, CZ on alternating neighbour pairs) and a
/// final random-axis rotation layer.
pub fn build_ansatz<T: Scalar>(spec: &AnsatzSpec) -> Result<Circuit<T>> {
    spec.validate()?;
    let n = spec.n_qubits;
    let mut c = Circuit::new(n)?;
    match spec.kind {
        AnsatzKind::RealAmplitudes => {
            let pairs = entanglement_pairs(n, spec.entanglement);
            for _ in 0..spec.reps {
                for q in 0..n {
                    c.push_param(Gate::ry(q, T::zero())?)?;
                }
                for &(a, b) in &pairs {
                    c.push(Gate::cnot(a, b)?)?;
                }
            }
            for q in 0..n {
                c.push_param(Gate::ry(q, T::zero())?)?;
            }
        }
        AnsatzKind::PauliTwoDesign => {
            let mut axes = rng::seeded(spec.seed);
            let mut rotation_layer = |c: &mut Circuit<T>| -> Result<()> {
                for q in 0..n {
                    let kind = match axes.random_range(0..3) {
                        0 => GateKind::Rx,
                        1 => GateKind::Ry,
                        _ => GateKind::Rz,
                    };
                    c.push_param(Gate::new(kind, vec![q], T::zero())?)?;
                }
                Ok(())
            };
            for q in 0..n {
                c.push(Gate::ry(q, T::FRAC_PI_4())?)?;
            }
            for rep in 0..spec.reps {
                rotation_layer(&mut c)?;
                for a in (rep % 2..n.saturating_sub(1)).step_by(2) {
                    c.push(Gate::cz(a, a + 1)?)?;
                }
            }
            rotation_layer(&mut c)?;
        }
    }
    debug_assert_eq!(c.n_params(), spec.n_params());
    Ok(c)
}
