use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    H,
    X,
    Y,
    Z,
    Cnot,
    Cz,
    /// Controlled swap: qubits are `[control, a, b]`.
    Cswap,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz => 2,
            GateKind::Cswap => 3,
            _ => 1,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Cswap => "CSWAP",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate: kind, the qubits it acts on, and a rotation angle in radians
/// (zero for non-rotation kinds).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Gate<T> {
    kind: GateKind,
    qubits: Vec<usize>,
    angle: T,
}

impl<T: Scalar> Gate<T> {
    pub fn new(kind: GateKind, qubits: Vec<usize>, angle: T) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::GateArity {
                kind: kind.name(),
                expected: kind.arity(),
                got: qubits.len(),
            });
        }
        for (i, &q) in qubits.iter().enumerate() {
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateTarget {
                    kind: kind.name(),
                    index: q,
                });
            }
        }
        let angle = if kind.is_rotation() {
            wrap_angle(angle)?
        } else {
            T::zero()
        };
        Ok(Self {
            kind,
            qubits,
            angle,
        })
    }

    pub fn rx(q: usize, angle: T) -> Result<Self> {
        Self::new(GateKind::Rx, vec![q], angle)
    }

    pub fn ry(q: usize, angle: T) -> Result<Self> {
        Self::new(GateKind::Ry, vec![q], angle)
    }

    pub fn rz(q: usize, angle: T) -> Result<Self> {
        Self::new(GateKind::Rz, vec![q], angle)
    }

    pub fn h(q: usize) -> Self {
        Self::fixed(GateKind::H, vec![q])
    }

    pub fn x(q: usize) -> Self {
        Self::fixed(GateKind::X, vec![q])
    }

    pub fn y(q: usize) -> Self {
        Self::fixed(GateKind::Y, vec![q])
    }

    pub fn z(q: usize) -> Self {
        Self::fixed(GateKind::Z, vec![q])
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        Self::new(GateKind::Cnot, vec![control, target], T::zero())
    }

    pub fn cz(a: usize, b: usize) -> Result<Self> {
        Self::new(GateKind::Cz, vec![a, b], T::zero())
    }

    pub fn cswap(control: usize, a: usize, b: usize) -> Result<Self> {
        Self::new(GateKind::Cswap, vec![control, a, b], T::zero())
    }

    fn fixed(kind: GateKind, qubits: Vec<usize>) -> Self {
        Self {
            kind,
            qubits,
            angle: T::zero(),
        }
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn angle(&self) -> T {
        self.angle
    }

    /// Same gate with a new rotation angle.
    pub fn with_angle(&self, angle: T) -> Result<Self> {
        Self::new(self.kind, self.qubits.clone(), angle)
    }

    /// The inverse gate: negated angle for rotations, itself otherwise.
    pub fn inverse(&self) -> Self {
        let mut g = self.clone();
        if self.kind.is_rotation() {
            g.angle = -self.angle;
        }
        g
    }

    pub fn single_qubit_matrix(&self) -> Option<[[Complex<T>; 2]; 2]> {
        let z = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        let half = self.angle / (T::one() + T::one());
        let (s, c) = half.sin_cos();
        let m = match self.kind {
            GateKind::Rx => [
                [Complex::new(c, T::zero()), Complex::new(T::zero(), -s)],
                [Complex::new(T::zero(), -s), Complex::new(c, T::zero())],
            ],
            GateKind::Ry => [
                [Complex::new(c, T::zero()), Complex::new(-s, T::zero())],
                [Complex::new(s, T::zero()), Complex::new(c, T::zero())],
            ],
            GateKind::Rz => [[Complex::new(c, -s), z], [z, Complex::new(c, s)]],
            GateKind::H => {
                let r = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
                [[r, r], [r, -r]]
            }
            GateKind::X => [[z, one], [one, z]],
            GateKind::Y => [[z, -i], [i, z]],
            GateKind::Z => [[one, z], [z, -one]],
            GateKind::Cnot | GateKind::Cz | GateKind::Cswap => return None,
        };
        Some(m)
    }
}

/// Rotations are 4π-periodic, so angles are folded into (-2π, 2π] without
/// changing the unitary.
fn wrap_angle<T: Scalar>(angle: T) -> Result<T> {
    if !angle.is_finite() {
        return Err(Error::NonFinite(format!("rotation angle {angle}")));
    }
    let two_pi = T::TAU();
    let four_pi = two_pi + two_pi;
    if angle > -two_pi && angle <= two_pi {
        return Ok(angle);
    }
    let mut a = angle % four_pi;
    if a > two_pi {
        a -= four_pi;
    } else if a <= -two_pi {
        a += four_pi;
    }
    Ok(a)
}
