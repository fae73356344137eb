use proptest::prelude::*;

use sunburst::dynamics::{
    ground_product_state, linear_entropy, maximally_coherent_state, random_phases, reduce_to_qubits, reduce_to_ring,
    QuenchSystem, Propagator,
};
use sunburst::operators::{build_hamiltonian, build_parity, HamiltonianSpec, TransverseField};
use sunburst::spectral::{eigendecompose, spacing_ratios};
use sunburst::theory::{self, LimitingRegime};
use sunburst::{Complex, ComplexMatrix};

fn small_spec() -> impl Strategy<Value = HamiltonianSpec> {
    (3usize..=5, 1usize..=2, 0.0f64..1.5, 0.0f64..1.5, 0.2f64..1.5, 0.5f64..1.5, any::<u64>()).prop_map(
        |(l, n, h, kappa, delta, j, seed)| {
            HamiltonianSpec::ising(l, n, 1)
                .with_field(TransverseField::Interval([h, h + 0.3]))
                .with_hopping(j)
                .with_kappa(kappa)
                .with_delta(delta)
                .with_seed(seed)
        },
    )
}

/// `tr ρ_q²` by summing over explicit basis indices, ring sites in the
/// leading bits.
fn purity_by_indices(amps: &[Complex], ring: usize, qubits: usize) -> f64 {
    let qd = 1usize << qubits;
    let rd = 1usize << ring;
    let mut rho = vec![Complex::new(0.0, 0.0); qd * qd];
    for r in 0..rd {
        for a in 0..qd {
            for b in 0..qd {
                rho[a * qd + b] += amps[r * qd + a] * amps[r * qd + b].conj();
            }
        }
    }
    rho.iter().map(|z| z.norm_sqr()).sum()
}

fn purity_by_svd(psi: &ComplexMatrix) -> f64 {
    psi.clone().svd(false, false).singular_values.iter().map(|s| s.powi(4)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ratio_mean_invariant_under_shift_and_scale(
        mut levels in prop::collection::vec(-10.0f64..10.0, 5..60),
        shift in -100.0f64..100.0,
        scale in 0.01f64..100.0,
    ) {
        levels.sort_by(f64::total_cmp);
        let base = spacing_ratios(&levels).unwrap();
        let moved: Vec<f64> = levels.iter().map(|x| scale * x + shift).collect();
        let moved = spacing_ratios(&moved).unwrap();
        prop_assert!((base.mean - moved.mean).abs() < 1e-9);
        let mut flipped: Vec<f64> = levels.iter().map(|x| -x).collect();
        flipped.sort_by(f64::total_cmp);
        prop_assert!((spacing_ratios(&flipped).unwrap().mean - base.mean).abs() < 1e-12);
        prop_assert!(base.ratios.iter().all(|&r| (0.0..=1.0).contains(&r)));
    }

    #[test]
    fn evolution_invariants(spec in small_spec(), times in prop::collection::vec(0.0f64..50.0, 1..6)) {
        let system = QuenchSystem::new(&spec, &spec.ring_fields(0)).unwrap();
        let phases = random_phases(3, spec.seed, 0);
        let psi0 = maximally_coherent_state(&system.pre.ring, 3, &phases, &system.pre.qubit_ground()).unwrap();
        let e0 = psi0.energy(&system.hamiltonian);
        let scale = system.hamiltonian.scale().max(1.0);
        let prop = Propagator::new(&system.spectrum, &psi0).unwrap();
        let bound = 1.0 - 0.5f64.powi(spec.qubits as i32) + 1e-10;
        for state in prop.states_at(&times) {
            prop_assert!(state.norm_deviation() <= 1e-10);
            prop_assert!((state.energy(&system.hamiltonian) - e0).abs() <= 1e-9 * scale);
            let rq = reduce_to_qubits(&state);
            let rr = reduce_to_ring(&state);
            prop_assert!((rq.purity() - rr.purity()).abs() <= 1e-10);
            let p_idx = purity_by_indices(state.amplitudes(), spec.ring_len, spec.qubits);
            let p_svd = purity_by_svd(&state.amplitude_matrix());
            prop_assert!((rq.purity() - p_idx).abs() <= 1e-10);
            prop_assert!((rq.purity() - p_svd).abs() <= 1e-10);
            let s = linear_entropy(&rq);
            prop_assert!(s >= -1e-10 && s <= bound);
            prop_assert!((rq.trace().re - 1.0).abs() <= 1e-10);
            prop_assert!(rq.hermiticity_residual() <= 1e-12);
        }
    }

    #[test]
    fn hamiltonian_commutes_with_parity(spec in small_spec()) {
        let h = build_hamiltonian(&spec, &spec.ring_fields(1)).unwrap();
        let p = build_parity(spec.ring_len, spec.qubits).unwrap();
        prop_assert!(p.commutator_residual(&h) <= 1e-12);
        prop_assert!(h.hermiticity_residual() == 0.0);
    }

    #[test]
    fn ground_state_is_parity_even(spec in small_spec()) {
        let system = QuenchSystem::new(&spec, &spec.ring_fields(0)).unwrap();
        if let Ok(psi) = ground_product_state(&system.pre) {
            let p = build_parity(spec.ring_len, spec.qubits).unwrap();
            let amps: Vec<f64> = psi.amplitudes().iter().map(|z| z.norm_sqr()).collect();
            let parity: f64 = amps.iter().enumerate().map(|(i, a)| p.sign(i) * a).sum();
            prop_assert!((parity - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn limiting_entropy_periodic_and_bounded(kappa in 0.05f64..3.0, delta in 0.05f64..3.0, h in 0.0f64..2.0, t in 0.0f64..20.0) {
        for regime in [LimitingRegime::weak_field(kappa, delta).unwrap(), LimitingRegime::strong_field(kappa, delta, h).unwrap()] {
            let s = theory::limiting_entropy(t, &regime);
            prop_assert!((s - theory::limiting_entropy(t + regime.period(), &regime)).abs() <= 1e-12);
            prop_assert!((-1e-15..=0.5 + 1e-15).contains(&s));
        }
    }

    #[test]
    fn small_time_ratio_is_exact(t in 0.0f64..0.3, kappa in 0.1f64..2.0, n in 1usize..4, l in 3usize..10) {
        let inc = theory::small_time_entropy(t, kappa, n, theory::Coherence::Incoherent, l);
        let max = theory::small_time_entropy(t, kappa, n, theory::Coherence::Maximal, l);
        let ratio = 1.0 - 0.5f64.powi(l as i32);
        prop_assert!((max - ratio * inc).abs() <= 1e-15);
    }

    #[test]
    fn transition_curve_increases(t in 0.01f64..5.0, dt in 0.001f64..1.0, kappa in 0.1f64..3.0, dk in 0.01f64..1.0, n in 1usize..4) {
        let s_inf = theory::lubkin_value(n);
        let base = theory::full_transition_curve(t, kappa, n, s_inf);
        let later = theory::full_transition_curve(t + dt, kappa, n, s_inf);
        let stronger = theory::full_transition_curve(t, kappa + dk, n, s_inf);
        prop_assert!(later >= base && stronger >= base);
        prop_assert!(base < s_inf || (s_inf - base).abs() < 1e-15);
    }

    #[test]
    fn eigendecomposition_residuals(spec in small_spec()) {
        let h = build_hamiltonian(&spec, &spec.ring_fields(2)).unwrap();
        let s = eigendecompose(&h).unwrap();
        prop_assert!(s.residual(&h) <= 1e-10 * h.scale().max(1.0));
        prop_assert!(s.unitarity_residual() <= 1e-10);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
}
