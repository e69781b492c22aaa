use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::gate::{Gate, GateKind};

/// Largest register the simulator will allocate (2^20 complex amplitudes).
pub const MAX_QUBITS: usize = 20;

/// Dense pure state over `n_qubits` qubits.
///
/// Qubit `q` is bit `q` of the basis index (little-endian), so `|q2 q1 q0>`
/// with `q0 = 1` is index 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Statevector<T> {
    n_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Scalar> Statevector<T> {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: index,
            });
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps an amplitude vector whose length is a power of two and whose
    /// squared norm is 1 within `tolerance()`.
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidSpec(format!(
                "amplitude vector length {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite("amplitude".into()));
        }
        let state = Self {
            n_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - T::one()).abs() > tolerance::<T>() {
            return Err(Error::NotNormalised(norm.as_f64()));
        }
        Ok(state)
    }

    /// Real amplitudes, zero-padded to the next power of two.
    pub fn from_real_padded(values: &[T]) -> Result<Self> {
        let dim = values.len().max(1).next_power_of_two().max(2);
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
        for (a, &v) in amps.iter_mut().zip(values) {
            a.re = v;
        }
        Self::from_amplitudes(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.dim() != other.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.conj() * b
            }))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Probability of reading 1 on `qubit`.
    pub fn marginal_prob_one(&self, qubit: usize) -> Result<T> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        let p = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr());
        Ok(p.max(T::zero()).min(T::one()))
    }

    /// Tensor product with `|0...0>` on `extra` new high-order qubits.
    pub fn extend_zeros(&self, extra: usize) -> Result<Self> {
        let n = self.n_qubits + extra;
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); 1 << n];
        amplitudes[..self.dim()].copy_from_slice(&self.amplitudes);
        Ok(Self {
            n_qubits: n,
            amplitudes,
        })
    }

    /// Returns the state after `gate`.
    pub fn apply(&self, gate: &Gate<T>) -> Result<Self> {
        let mut next = self.clone();
        next.apply_in_place(gate)?;
        Ok(next)
    }

    pub(crate) fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    pub(crate) fn apply_in_place(&mut self, gate: &Gate<T>) -> Result<()> {
        for &q in gate.qubits() {
            self.check_qubit(q)?;
        }
        let q = gate.qubits();
        match gate.kind() {
            GateKind::Cnot => self.apply_cnot(q[0], q[1]),
            GateKind::Cz => self.apply_cz(q[0], q[1]),
            GateKind::Cswap => self.apply_cswap(q[0], q[1], q[2]),
            _ => {
                let m = gate
                    .single_qubit_matrix()
                    .expect("single-qubit kinds have a matrix");
                self.apply_single(q[0], &m);
            }
        }
        Ok(())
    }

    fn apply_single(&mut self, qubit: usize, m: &[[Complex<T>; 2]; 2]) {
        let mask = 1usize << qubit;
        for i0 in 0..self.dim() {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let a0 = self.amplitudes[i0];
            let a1 = self.amplitudes[i1];
            self.amplitudes[i0] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let c = 1usize << control;
        let t = 1usize << target;
        for i in 0..self.dim() {
            if i & c != 0 && i & t == 0 {
                self.amplitudes.swap(i, i | t);
            }
        }
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for amp in self
            .amplitudes
            .iter_mut()
            .enumerate()
            .filter(|(i, _)| i & mask == mask)
            .map(|(_, amp)| amp)
        {
            *amp = -*amp;
        }
    }

    fn apply_cswap(&mut self, control: usize, a: usize, b: usize) {
        let c = 1usize << control;
        let ma = 1usize << a;
        let mb = 1usize << b;
        for i in 0..self.dim() {
            if i & c != 0 && i & ma != 0 && i & mb == 0 {
                self.amplitudes.swap(i, (i & !ma) | mb);
            }
        }
    }
}

/// Norm tolerance used for validation: 1e-10 for `f64`, looser for `f32`.
pub fn tolerance<T: Scalar>() -> T {
    T::of(1e-10).max(T::epsilon() * T::of(64.0))
}
