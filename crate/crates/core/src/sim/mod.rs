//! Dense statevector simulator.

mod circuit;
mod gate;
mod noise;
mod state;

pub use circuit::{run_circuit, Circuit};
pub use gate::{Gate, GateKind};
pub use noise::{measure_qubit, sample_circuit, NoiseModel};
pub use state::{tolerance, Statevector, MAX_QUBITS};

/// Free-function form of [`Statevector::apply`].
pub fn apply_gate<T: crate::Scalar>(
    state: &Statevector<T>,
    gate: &Gate<T>,
) -> crate::Result<Statevector<T>> {
    state.apply(gate)
}

/// Free-function form of [`Statevector::marginal_prob_one`].
pub fn marginal_prob_one<T: crate::Scalar>(
    state: &Statevector<T>,
    qubit: usize,
) -> crate::Result<T> {
    state.marginal_prob_one(qubit)
}
