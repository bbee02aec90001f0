//! Property tests for the algebraic invariants of the core operators.

use num_complex::Complex64;
use proptest::prelude::*;
use qcmix::engine::{
    master_rhs, mix_update, ClassicalDistribution, PureState, Temperature, PHASE_FLOOR_DEFAULT,
};
use qcmix::ising::{apply_total_hamiltonian, classical_energies, sk_random, IsingInstance};
use qcmix::tls::TlsState;

fn instance_strategy() -> impl Strategy<Value = IsingInstance> {
    (2usize..=4, any::<u64>(), proptest::collection::vec(-1.0..1.0f64, 4))
        .prop_map(|(n, seed, fields)| {
            let base = sk_random(n, seed).unwrap();
            let pairs = base.pair_couplings();
            IsingInstance::from_pairs(n, &pairs, fields[..n].to_vec(), "prop").unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // H(s) acts linearly.
    #[test]
    fn hamiltonian_is_linear(
        (inst, s) in instance_strategy().prop_flat_map(|inst| (Just(inst), 0.0..=1.0f64)),
        scale_re in -2.0..2.0f64,
        scale_im in -2.0..2.0f64,
        seed_v in 0u64..1000,
    ) {
        let dim = inst.dim();
        let gen = |seed: u64| -> Vec<Complex64> {
            (0..dim).map(|i| {
                let a = ((i as u64 * 2654435761 + seed * 97) % 1000) as f64 / 500.0 - 1.0;
                let b = ((i as u64 * 40503 + seed * 31 + 7) % 1000) as f64 / 500.0 - 1.0;
                Complex64::new(a, b)
            }).collect()
        };
        let v = gen(seed_v);
        let w = gen(seed_v + 1);
        let a = Complex64::new(scale_re, scale_im);
        let combo: Vec<Complex64> = v.iter().zip(&w).map(|(x, y)| a * x + y).collect();
        let h_combo = apply_total_hamiltonian(&inst, s, &combo).unwrap();
        let hv = apply_total_hamiltonian(&inst, s, &v).unwrap();
        let hw = apply_total_hamiltonian(&inst, s, &w).unwrap();
        for i in 0..dim {
            let want = a * hv[i] + hw[i];
            prop_assert!((h_combo[i] - want).norm() < 1e-12);
        }
    }

    // <w|Hv> = conj(<v|Hw>).
    #[test]
    fn hamiltonian_is_hermitian(
        (inst, s) in instance_strategy().prop_flat_map(|inst| (Just(inst), 0.0..=1.0f64)),
        seed_v in 0u64..1000,
    ) {
        let dim = inst.dim();
        let gen = |seed: u64| -> Vec<Complex64> {
            (0..dim).map(|i| {
                let a = ((i as u64 * 48271 + seed * 13) % 997) as f64 / 498.5 - 1.0;
                let b = ((i as u64 * 69621 + seed * 7 + 3) % 997) as f64 / 498.5 - 1.0;
                Complex64::new(a, b)
            }).collect()
        };
        let v = gen(seed_v);
        let w = gen(seed_v + 5);
        let hv = apply_total_hamiltonian(&inst, s, &v).unwrap();
        let hw = apply_total_hamiltonian(&inst, s, &w).unwrap();
        let lhs: Complex64 = w.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
        let rhs: Complex64 = v.iter().zip(&hw).map(|(a, b)| a.conj() * b).sum();
        prop_assert!((lhs - rhs.conj()).norm() < 1e-12);
    }

    // Spin-glass couplings are symmetric with zero diagonal for every seed.
    #[test]
    fn sk_matrix_structure(seed in any::<u64>(), n in 2usize..=8) {
        let inst = sk_random(n, seed).unwrap();
        for i in 0..n {
            prop_assert_eq!(inst.coupling(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(inst.coupling(i, j), inst.coupling(j, i));
            }
        }
    }

    // The master operator conserves total probability and keeps the
    // Boltzmann distribution stationary.
    #[test]
    fn master_operator_structure(
        inst in instance_strategy(),
        beta in 0.1..3.0f64,
        seed_p in 0u64..1000,
    ) {
        let spectrum = classical_energies(&inst);
        let dim = inst.dim();
        let raw: Vec<f64> = (0..dim)
            .map(|i| 0.05 + ((i as u64 * 7919 + seed_p * 41) % 100) as f64 / 100.0)
            .collect();
        let p = ClassicalDistribution::from_probabilities(raw).unwrap();
        let temperature = Temperature::Finite(1.0 / beta);
        let rhs = master_rhs(&p, &spectrum, temperature).unwrap();
        let total: f64 = rhs.iter().sum();
        prop_assert!(total.abs() < 1e-12, "probability leak {}", total);

        let z: f64 = spectrum.energies().iter().map(|e| (-beta * e).exp()).sum();
        let boltzmann: Vec<f64> = spectrum.energies().iter().map(|e| (-beta * e).exp() / z).collect();
        let b = ClassicalDistribution::from_probabilities(boltzmann).unwrap();
        let stationary = master_rhs(&b, &spectrum, temperature).unwrap();
        for v in stationary {
            prop_assert!(v.abs() < 1e-12, "Boltzmann drift {}", v);
        }
    }

    // The blend conserves normalization and never leaves the simplex.
    #[test]
    fn mix_update_keeps_normalization(
        dim_pow in 1usize..=3,
        alpha in 0.0..=1.0f64,
        seed in 0u64..500,
    ) {
        let dim = 1usize << dim_pow;
        let amps: Vec<Complex64> = (0..dim).map(|i| {
            let a = ((i as u64 * 104729 + seed * 17) % 991) as f64 / 495.5 - 1.0;
            let b = ((i as u64 * 1299709 + seed * 5 + 1) % 991) as f64 / 495.5 - 1.0;
            Complex64::new(a, b)
        }).collect();
        let probs: Vec<f64> = (0..dim)
            .map(|i| 0.01 + ((i as u64 * 6151 + seed * 29) % 100) as f64)
            .collect();
        let psi = PureState::from_amplitudes(amps).unwrap();
        let p = ClassicalDistribution::from_probabilities(probs).unwrap();
        let (psi2, p2) = mix_update(&psi, &p, alpha, PHASE_FLOOR_DEFAULT).unwrap();
        prop_assert!(psi2.norm_defect() < 1e-12);
        prop_assert!(p2.sum_defect() < 1e-12);
        for (amp, prob) in psi2.amplitudes().iter().zip(p2.probabilities()) {
            prop_assert!(*prob >= 0.0);
            prop_assert!((amp.norm_sqr() - prob).abs() < 1e-12);
        }
    }

    // Reduced two-level coordinates round-trip through Cartesian form.
    #[test]
    fn tls_state_round_trip(z in 0.01..0.99f64, theta in -3.1..3.1f64) {
        let s = TlsState::new(z, theta).unwrap();
        let back = TlsState::from_xyz(s.x(), s.y(), s.z()).unwrap();
        prop_assert!((back.z() - z).abs() < 1e-12);
        prop_assert!((back.theta() - s.theta()).abs() < 1e-12);
        prop_assert!((s.x().powi(2) + s.y().powi(2) - z * (1.0 - z)).abs() < 1e-15);
    }

    // Instance JSON serialization round-trips bit-exactly.
    #[test]
    fn instance_json_round_trip(inst in instance_strategy()) {
        let text = inst.to_json_string();
        let back = IsingInstance::from_json_str(&text).unwrap();
        prop_assert_eq!(inst, back);
    }
}
