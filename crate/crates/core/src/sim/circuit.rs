use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::gate::Gate;
use crate::sim::state::{Statevector, MAX_QUBITS};

/// Ordered gate list. `param_slots[i]` is the index of the rotation gate whose
/// angle is bound to `params[i]` at run time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Circuit<T> {
    n_qubits: usize,
    gates: Vec<Gate<T>>,
    param_slots: Vec<usize>,
}

impl<T: Scalar> Circuit<T> {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
            param_slots: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn param_slots(&self) -> &[usize] {
        &self.param_slots
    }

    pub fn n_params(&self) -> usize {
        self.param_slots.len()
    }

    pub fn push(&mut self, gate: Gate<T>) -> Result<&mut Self> {
        for &q in gate.qubits() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends a rotation whose angle is a free parameter.
    pub fn push_param(&mut self, gate: Gate<T>) -> Result<&mut Self> {
        if !gate.kind().is_rotation() {
            return Err(Error::InvalidSpec(format!(
                "parameter slot on non-rotation gate {}",
                gate.kind()
            )));
        }
        self.push(gate)?;
        self.param_slots.push(self.gates.len() - 1);
        Ok(self)
    }

    /// Appends `other`'s gates, shifting its parameter slots after ours.
    pub fn extend(&mut self, other: &Circuit<T>) -> Result<&mut Self> {
        let offset = self.gates.len();
        for g in &other.gates {
            self.push(g.clone())?;
        }
        self.param_slots
            .extend(other.param_slots.iter().map(|s| s + offset));
        Ok(self)
    }

    /// Gate list with `params` written into the parameter slots.
    pub fn bind(&self, params: &[T]) -> Result<Vec<Gate<T>>> {
        if params.len() != self.param_slots.len() {
            return Err(Error::ParamCount {
                expected: self.param_slots.len(),
                got: params.len(),
            });
        }
        let mut gates = self.gates.clone();
        for (&slot, &p) in self.param_slots.iter().zip(params) {
            gates[slot] = gates[slot].with_angle(p)?;
        }
        Ok(gates)
    }

    /// Runs the circuit on `initial` with parameters bound in slot order.
    pub fn run(&self, params: &[T], initial: &Statevector<T>) -> Result<Statevector<T>> {
        if initial.n_qubits() != self.n_qubits {
            return Err(Error::LengthMismatch {
                expected: self.n_qubits,
                got: initial.n_qubits(),
            });
        }
        let gates = self.bind(params)?;
        let mut state = initial.clone();
        for g in &gates {
            state.apply_in_place(g)?;
        }
        Ok(state)
    }
}

/// Free-function form of [`Circuit::run`].
pub fn run_circuit<T: Scalar>(
    circuit: &Circuit<T>,
    params: &[T],
    initial: &Statevector<T>,
) -> Result<Statevector<T>> {
    circuit.run(params, initial)
}
