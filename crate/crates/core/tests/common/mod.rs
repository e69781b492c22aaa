#![allow(dead_code)]

use num_complex::Complex;
use qae_core::sim::Statevector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Haar-like random state: normalised complex Gaussian amplitudes.
pub fn random_state(rng: &mut ChaCha8Rng, n_qubits: usize) -> Statevector<f64> {
    let mut amps: Vec<Complex<f64>> = (0..1usize << n_qubits)
        .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    Statevector::from_amplitudes(amps).unwrap()
}

/// Tensor product of independent random single-qubit states.
pub fn random_product_state(rng: &mut ChaCha8Rng, n_qubits: usize) -> Statevector<f64> {
    let singles: Vec<Statevector<f64>> = (0..n_qubits).map(|_| random_state(rng, 1)).collect();
    let amps = (0..1usize << n_qubits)
        .map(|i| {
            singles
                .iter()
                .enumerate()
                .map(|(q, s)| s.amplitudes()[(i >> q) & 1])
                .product()
        })
        .collect();
    Statevector::from_amplitudes(amps).unwrap()
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}
