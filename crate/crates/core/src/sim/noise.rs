//! Shot sampling with an optional two-parameter noise model.
//!
//! Depolarizing noise is simulated by stochastic Pauli insertion: after each
//! gate, with probability `depolarizing_prob`, every qubit the gate touches
//! receives an independent uniformly drawn X, Y or Z. Readout noise flips the
//! measured bit with probability `readout_flip_prob`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use crate::sim::circuit::Circuit;
use crate::sim::gate::Gate;
use crate::sim::state::Statevector;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub readout_flip_prob: f64,
    pub depolarizing_prob: f64,
}

impl NoiseModel {
    pub fn new(readout_flip_prob: f64, depolarizing_prob: f64) -> Result<Self> {
        let m = Self {
            readout_flip_prob,
            depolarizing_prob,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("readout_flip_prob", self.readout_flip_prob)?;
        check_prob("depolarizing_prob", self.depolarizing_prob)
    }

    pub fn is_noiseless(&self) -> bool {
        self.readout_flip_prob == 0.0 && self.depolarizing_prob == 0.0
    }

    /// Probability of reading 1 given true probability `p1`.
    pub fn readout(&self, p1: f64) -> f64 {
        let r = self.readout_flip_prob;
        (p1 * (1.0 - r) + (1.0 - p1) * r).clamp(0.0, 1.0)
    }
}

fn check_prob(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) || value.is_nan() {
        return Err(Error::InvalidProbability { name, value });
    }
    Ok(())
}

fn binomial<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("probability checked to lie in (0, 1)")
        .sample(rng)
}

/// Number of 1-outcomes `L` in `shots` measurements of `qubit`.
pub fn measure_qubit<T: Scalar>(
    state: &Statevector<T>,
    qubit: usize,
    shots: u64,
    noise: Option<&NoiseModel>,
    seed: u64,
) -> Result<u64> {
    if shots == 0 {
        return Err(Error::InvalidSpec("shots must be at least 1".into()));
    }
    let p1 = state.marginal_prob_one(qubit)?.as_f64();
    let p = match noise {
        Some(n) => {
            n.validate()?;
            n.readout(p1)
        }
        None => p1,
    };
    Ok(binomial(&mut rng::seeded(seed), shots, p))
}

/// Runs `circuit` `shots` times under `noise` and counts 1-outcomes on `qubit`.
///
/// Shots without any Pauli insertion share one precomputed state; only the
/// faulty trajectories are simulated individually.
pub fn sample_circuit<T: Scalar>(
    circuit: &Circuit<T>,
    params: &[T],
    initial: &Statevector<T>,
    qubit: usize,
    shots: u64,
    noise: Option<&NoiseModel>,
    seed: u64,
) -> Result<u64> {
    if shots == 0 {
        return Err(Error::InvalidSpec("shots must be at least 1".into()));
    }
    let noise = noise.copied().unwrap_or_default();
    noise.validate()?;
    let gates = circuit.bind(params)?;
    let mut clean = initial.clone();
    for g in &gates {
        clean.apply_in_place(g)?;
    }
    let p1_clean = clean.marginal_prob_one(qubit)?.as_f64();
    let mut rng = rng::seeded(seed);

    let p = noise.depolarizing_prob;
    let n_gates = gates.len() as i32;
    let q_clean = if p > 0.0 {
        (1.0 - p).powi(n_gates)
    } else {
        1.0
    };
    let n_clean = binomial(&mut rng, shots, q_clean);
    let mut ones = binomial(&mut rng, n_clean, noise.readout(p1_clean));

    for _ in n_clean..shots {
        let first = first_fault(&mut rng, p, gates.len(), q_clean);
        let mut state = initial.clone();
        for (k, g) in gates.iter().enumerate() {
            state.apply_in_place(g)?;
            let faulty = k == first || (k > first && rng.random::<f64>() < p);
            if faulty {
                for &q in g.qubits() {
                    let pauli = match rng.random_range(0..3) {
                        0 => Gate::x(q),
                        1 => Gate::y(q),
                        _ => Gate::z(q),
                    };
                    state.apply_in_place(&pauli)?;
                }
            }
        }
        let p1 = noise.readout(state.marginal_prob_one(qubit)?.as_f64());
        if rng.random::<f64>() < p1 {
            ones += 1;
        }
    }
    Ok(ones)
}

/// Index of the first faulty gate, conditioned on at least one fault.
fn first_fault<R: Rng>(rng: &mut R, p: f64, n_gates: usize, q_clean: f64) -> usize {
    if p >= 1.0 {
        return 0;
    }
    let u: f64 = rng.random();
    let k = ((1.0 - u * (1.0 - q_clean)).ln() / (1.0 - p).ln()).floor();
    (k.max(0.0) as usize).min(n_gates.saturating_sub(1))
}
