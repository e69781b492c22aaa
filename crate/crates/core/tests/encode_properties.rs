use std::f64::consts::PI;

use proptest::prelude::*;
use qae_core::encode::{encode_sample, EncodingSpec, ScaleDomain, ScaledSample, Technique};
use qae_core::sim::MAX_QUBITS;
use qae_core::Error;

fn angles(values: Vec<f64>) -> ScaledSample<f64> {
    ScaledSample {
        values,
        domain: ScaleDomain::Angle,
        zero_row_fallback: false,
    }
}

fn unit(values: Vec<f64>) -> ScaledSample<f64> {
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    ScaledSample {
        values: values.iter().map(|v| v / norm).collect(),
        domain: ScaleDomain::UnitNorm,
        zero_row_fallback: false,
    }
}

fn technique() -> impl Strategy<Value = Technique> {
    prop_oneof![
        Just(Technique::Amplitude),
        Just(Technique::Angle),
        Just(Technique::DenseAngle),
        Just(Technique::EfficientSu2),
    ]
}

proptest! {
    #[test]
    fn qubit_counts_follow_the_formulas(n in 1usize..=24, t in technique()) {
        // Angle beyond 20 features exceeds the simulator register
        if t == Technique::Angle && n > MAX_QUBITS {
            prop_assert!(matches!(EncodingSpec::new(t, n), Err(Error::TooManyQubits(q)) if q == n));
            return Ok(());
        }
        let spec = EncodingSpec::new(t, n).unwrap();
        let q = spec.n_qubits();
        match t {
            Technique::Angle => prop_assert_eq!(q, n),
            Technique::DenseAngle => prop_assert_eq!(q, n.div_ceil(2)),
            // smallest register whose dimension holds every feature
            Technique::Amplitude => {
                prop_assert!(1usize << q >= n);
                prop_assert!(q == 1 || 1usize << (q - 1) < n);
            }
            Technique::EfficientSu2 => {
                prop_assert!(2 * q * (spec.su2_reps() + 1) >= n);
            }
        }
    }

    #[test]
    fn encoded_states_have_unit_norm(values in prop::collection::vec(0.0..PI, 1..=12), t in technique()) {
        let spec = EncodingSpec::new(t, values.len()).unwrap();
        let sample = if t == Technique::Amplitude {
            unit(values.iter().map(|v| v + 0.01).collect())
        } else {
            angles(values)
        };
        let s = encode_sample(&sample, &spec).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn amplitude_round_trip(values in prop::collection::vec(-5.0..5.0f64, 1..=16)) {
        prop_assume!(values.iter().any(|v| v.abs() > 1e-3));
        let spec = EncodingSpec::new(Technique::Amplitude, values.len()).unwrap();
        let sample = unit(values);
        let s = encode_sample(&sample, &spec).unwrap();
        for (a, v) in s.amplitudes().iter().zip(&sample.values) {
            prop_assert_eq!(a.re, *v);
            prop_assert_eq!(a.im, 0.0);
        }
        prop_assert!(s.amplitudes()[sample.values.len()..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn angle_marginals(values in prop::collection::vec(0.0..PI, 1..=8)) {
        let spec = EncodingSpec::new(Technique::Angle, values.len()).unwrap();
        let s = encode_sample(&angles(values.clone()), &spec).unwrap();
        for (j, x) in values.iter().enumerate() {
            let expected = (x / 2.0).sin().powi(2);
            prop_assert!((s.marginal_prob_one(j).unwrap() - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn dense_angle_rz_invisible_at_poles(
        values in prop::collection::vec(0.0..PI, 2..=8),
        poles in prop::collection::vec(any::<bool>(), 4),
        other_rz in 0.0..PI,
    ) {
        let mut values = values;
        let n_qubits = values.len().div_ceil(2);
        // put every Ry angle on a pole
        for j in 0..n_qubits {
            values[2 * j] = if poles[j] { PI } else { 0.0 };
        }
        let spec = EncodingSpec::new(Technique::DenseAngle, values.len()).unwrap();
        let a = encode_sample(&angles(values.clone()), &spec).unwrap();
        let mut moved = values.clone();
        for j in 0..n_qubits {
            if 2 * j + 1 < moved.len() {
                moved[2 * j + 1] = other_rz;
            }
        }
        let b = encode_sample(&angles(moved), &spec).unwrap();
        for (p, q) in a.probabilities().iter().zip(b.probabilities()) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }
}

#[test]
fn dense_angle_example_lands_on_basis_one() {
    let spec = EncodingSpec::new(Technique::DenseAngle, 8).unwrap();
    let mut v = vec![0.0; 8];
    v[0] = PI;
    let s = encode_sample(&angles(v), &spec).unwrap();
    assert!((s.probabilities()[0b0001] - 1.0).abs() < 1e-12);
}
