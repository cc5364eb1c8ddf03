//! Property tests across the core modules, driven by seeded sampling.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qrecover_core::channels::{evolve_tripartite, standard_channel, ChannelSpec, QuantumChannel};
use qrecover_core::matkernel::{self, ComplexMatrix};
use qrecover_core::measures;
use qrecover_core::random;
use qrecover_core::recovery;
use qrecover_core::states::entangled_input;

const LN_2: f64 = std::f64::consts::LN_2;

fn rng_from(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn herm_eig_reconstructs_and_preserves_trace(seed in 0u64..1000, dim in 2usize..=64) {
        let mut rng = rng_from(seed);
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| random::complex_gaussian(&mut rng));
        let h = (&g + &g.dagger()).scale(0.5);
        let eig = matkernel::herm_eig(&h).unwrap();
        let residual = (&eig.reconstruct() - &h).max_abs();
        prop_assert!(residual <= 1e-10 * dim as f64, "residual {residual:.3e}");
        let sum: f64 = eig.eigenvalues.iter().sum();
        prop_assert!((sum - h.trace().re).abs() < 1e-9);
    }

    #[test]
    fn polar_trace_equals_singular_value_sum(seed in 0u64..1000, dim in 1usize..=8) {
        let mut rng = rng_from(seed);
        let m = ComplexMatrix::from_fn(dim, dim, |_, _| random::complex_gaussian(&mut rng));
        let w = matkernel::polar_unitary(&m).unwrap();
        let tr = (&w.dagger() * &m).trace().re;
        let s_sum: f64 = matkernel::svd(&m).singular_values.iter().sum();
        prop_assert!((tr - s_sum).abs() < 1e-9, "{tr} vs {s_sum}");
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity(seed in 0u64..1000) {
        let mut rng = rng_from(seed);
        let dr = rng.gen_range(2..=3);
        let dq = rng.gen_range(2..=4);
        let psi = random::random_entangled_pure(dr, dq, &mut rng);
        for keep in [["R"], ["Q"]] {
            let reduced = psi.partial_trace(&keep).unwrap().density_matrix();
            prop_assert!((reduced.trace().re - 1.0).abs() < 1e-10);
            prop_assert!(reduced.is_psd(1e-10));
        }
    }

    #[test]
    fn schmidt_spectra_symmetric_and_descending(seed in 0u64..1000) {
        let mut rng = rng_from(seed);
        let dr = rng.gen_range(2..=4);
        let dq = rng.gen_range(2..=4);
        let psi = random::random_entangled_pure(dr, dq, &mut rng);
        let schmidt = psi.schmidt().unwrap();
        for w in schmidt.coefficients.windows(2) {
            prop_assert!(w[0] >= w[1] - 1e-12);
        }
        // Nonzero spectra of both reductions match the squared coefficients.
        for keep in [["R"], ["Q"]] {
            let reduced = psi.partial_trace(&keep).unwrap().density_matrix();
            let eig = matkernel::herm_eig(&reduced).unwrap();
            let mut nonzero: Vec<f64> = eig
                .eigenvalues
                .iter()
                .copied()
                .filter(|&w| w > 1e-9)
                .collect();
            nonzero.sort_by(|a, b| b.partial_cmp(a).unwrap());
            prop_assert_eq!(nonzero.len(), schmidt.coefficients.len());
            for (w, c) in nonzero.iter().zip(&schmidt.coefficients) {
                prop_assert!((w - c * c).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn purify_roundtrips_partial_trace(seed in 0u64..1000, dim in 2usize..=5) {
        let mut rng = rng_from(seed);
        let rank = rng.gen_range(1..=dim);
        let rho = random::random_density(dim, rank, &mut rng);
        let state = qrecover_core::states::LabeledState::mixed(
            qrecover_core::states::SubsystemLayout::new(&[("Q", dim)]).unwrap(),
            rho.clone(),
        )
        .unwrap();
        let purified = state.purify("P", dim, ).unwrap();
        let back = purified.partial_trace(&["Q"]).unwrap().density_matrix();
        prop_assert!((&back - &rho).max_abs() < 1e-9);
    }

    #[test]
    fn dilation_matches_kraus_action(seed in 0u64..500) {
        let mut rng = rng_from(seed);
        let dim = rng.gen_range(2..=3);
        let env = rng.gen_range(1..=4);
        let ch = random::random_channel(dim, env, &mut rng);
        let d = ch.dilate();
        prop_assert!(d.u.is_unitary(1e-9));
        let rho = random::random_density(dim, dim, &mut rng);
        let sys = qrecover_core::states::LabeledState::mixed(
            qrecover_core::states::SubsystemLayout::new(&[("Q", dim)]).unwrap(),
            rho.clone(),
        )
        .unwrap();
        let env_state = qrecover_core::states::LabeledState::pure(
            qrecover_core::states::SubsystemLayout::new(&[("E", d.env_dim)]).unwrap(),
            d.env_init.clone(),
        )
        .unwrap();
        let evolved = sys
            .tensor(&env_state)
            .unwrap()
            .apply_unitary_on(&d.u, &["Q", "E"])
            .unwrap();
        let traced = evolved.partial_trace(&["Q"]).unwrap().density_matrix();
        let direct = ch.apply(&rho).unwrap();
        prop_assert!((&traced - &direct).max_abs() < 1e-9);
    }

    #[test]
    fn evolution_is_pure_and_leaves_reference_invariant(seed in 0u64..500) {
        // The reference never interacts, so its reduced state (and in
        // particular the Schmidt spectrum) is unchanged by the dynamics.
        let mut rng = rng_from(seed);
        let d = rng.gen_range(2..=4);
        let input = random::random_entangled_pure(d, d, &mut rng);
        let rho_r_before = input.partial_trace(&["R"]).unwrap().density_matrix();
        let ch = random::random_channel(d, rng.gen_range(1..=3), &mut rng);
        let out = evolve_tripartite(&input, &ch.dilate()).unwrap();
        let v = out.vector().expect("pure output");
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-10);
        let rho_r_after = out.partial_trace(&["R"]).unwrap().density_matrix();
        prop_assert!((&rho_r_after - &rho_r_before).max_abs() < 1e-9);
    }

    #[test]
    fn distance_measure_inequalities(seed in 0u64..500) {
        let mut rng = rng_from(seed);
        let dim = rng.gen_range(2..=6);
        let rho = random::random_density(dim, dim, &mut rng);
        // Mix in rank-deficient second arguments to exercise the infinite
        // branch of the relative entropy.
        let rank = if seed % 4 == 0 { rng.gen_range(1..=dim) } else { dim };
        let sigma = random::random_density(dim, rank, &mut rng);

        let d = measures::trace_distance(&rho, &sigma).unwrap();
        let f = measures::fidelity(&rho, &sigma).unwrap();
        let re = measures::relative_entropy(&rho, &sigma).unwrap();

        prop_assert!(f >= 1.0 - d - 1e-9, "F {f} vs 1-D {}", 1.0 - d);
        if let Some(re) = re.finite() {
            prop_assert!(re >= (2.0 / LN_2) * d * d - 1e-9, "pinsker {re} {d}");
            prop_assert!(f >= 1.0 - (LN_2 / 2.0 * re).sqrt() - 1e-9);
            prop_assert!(f >= 1.0 - re.sqrt() - 1e-9);
        }

        let split = measures::helstrom_split(&rho, &sigma).unwrap();
        prop_assert!((split.l1_difference() - 2.0 * d).abs() < 1e-9);
        let classical = measures::classical_relative_entropy(&split.p, &split.q).unwrap();
        prop_assert!(
            classical.as_f64() <= re.as_f64() + 1e-9,
            "measurement bound {classical} vs {re}"
        );
        if let Some(c) = classical.finite() {
            let l1 = split.l1_difference();
            prop_assert!(c >= l1 * l1 / (2.0 * LN_2) - 1e-9, "classical pinsker");
        }
    }

    #[test]
    fn monotonicity_under_random_channels(seed in 0u64..300) {
        let mut rng = rng_from(seed);
        let dim = rng.gen_range(2..=4);
        let rho = random::random_density(dim, dim, &mut rng);
        let sigma = random::random_density(dim, dim, &mut rng);
        let ch = random::random_channel(dim, rng.gen_range(1..=3), &mut rng);
        let report = measures::monotonicity_check(&ch, &rho, &sigma).unwrap();
        prop_assert!(report.is_monotone(1e-8), "{:?}", report.violations(1e-8));
    }

    #[test]
    fn correction_bound_and_uhlmann_agreement(seed in 0u64..200) {
        let mut rng = rng_from(seed);
        let d = rng.gen_range(2..=3);
        let input = random::random_entangled_pure(d, d, &mut rng);
        let ch = random::random_channel(d, rng.gen_range(1..=3), &mut rng);
        let out = recovery::correct(&input, &ch).unwrap();
        prop_assert!(out.truncated_weight < 1e-12);
        prop_assert!(out.achieved_f >= out.bound_f - 1e-8);
        prop_assert!(out.achieved_fe >= out.bound_fe - 1e-8);
        prop_assert!(out.achieved_f >= out.uhlmann_overlap - 1e-8);
        // Uhlmann cross-check: the alignment overlap equals the closed-form
        // fidelity of the RE marginal against the product of marginals.
        let final_state = evolve_tripartite(&input, &ch.dilate()).unwrap();
        let rho_re = final_state.partial_trace(&["R", "E"]).unwrap().density_matrix();
        let rho_r = final_state.partial_trace(&["R"]).unwrap().density_matrix();
        let rho_e = final_state.partial_trace(&["E"]).unwrap().density_matrix();
        let f = measures::fidelity(&rho_re, &rho_r.kron(&rho_e)).unwrap();
        prop_assert!((out.uhlmann_overlap - f).abs() < 1e-7, "{} vs {f}", out.uhlmann_overlap);
    }
}

#[test]
fn core_values_are_shareable_across_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<ComplexMatrix>();
    assert_send_sync::<qrecover_core::states::LabeledState>();
    assert_send_sync::<QuantumChannel>();
    assert_send_sync::<qrecover_core::channels::Dilation>();
    assert_send_sync::<qrecover_core::recovery::RecoveryPlan>();
    assert_send_sync::<qrecover_core::recovery::CorrectionOutcome>();
    assert_send_sync::<qrecover_core::measures::LossReport>();
}

#[test]
fn herm_eig_handles_large_dimensions() {
    let mut rng = rng_from(1);
    let n = 128;
    let g = ComplexMatrix::from_fn(n, n, |_, _| random::complex_gaussian(&mut rng));
    let h = (&g + &g.dagger()).scale(0.5);
    let eig = matkernel::herm_eig(&h).unwrap();
    let residual = (&eig.reconstruct() - &h).max_abs();
    assert!(residual <= 1e-10 * n as f64, "residual {residual:.3e}");
}

#[test]
fn correction_is_exact_for_scrambled_degenerate_inputs() {
    // Maximally entangled inputs have a fully degenerate Schmidt spectrum;
    // scrambling both local bases must not confuse the pairing between the
    // reference basis and the recovery's target basis.
    let mut rng = rng_from(29);
    for dim in [2usize, 3] {
        let uniform = vec![1.0 / dim as f64; dim];
        let base = entangled_input(&uniform, dim).unwrap();
        let u_r = random::random_unitary(dim, &mut rng);
        let u_q = random::random_unitary(dim, &mut rng);
        let scrambled = base
            .apply_unitary_on(&u_r, &["R"])
            .unwrap()
            .apply_unitary_on(&u_q, &["Q"])
            .unwrap();
        let u = random::random_unitary(dim, &mut rng);
        let ch = QuantumChannel::from_kraus(vec![u]).unwrap();
        let out = recovery::correct(&scrambled, &ch).unwrap();
        assert!(out.epsilon.abs() <= 1e-9);
        assert!(out.achieved_f >= 1.0 - 1e-7, "dim {dim}: {}", out.achieved_f);
    }
}

#[test]
fn relent_zero_iff_states_coincide() {
    let mut rng = rng_from(7);
    for trial in 0..200 {
        let dim = 2 + trial % 5;
        let rho = random::random_density(dim, dim, &mut rng);
        let sigma = if trial % 3 == 0 {
            rho.clone()
        } else {
            random::random_density(dim, dim, &mut rng)
        };
        let re = measures::relative_entropy(&rho, &sigma).unwrap();
        let d = measures::trace_distance(&rho, &sigma).unwrap();
        let f = measures::fidelity(&rho, &sigma).unwrap();
        let re_zero = matches!(re.finite(), Some(v) if v <= 1e-9);
        assert_eq!(re_zero, d <= 1e-8, "relent {re} vs trace_dist {d}");
        // Unit fidelity happens exactly where the states coincide.
        assert_eq!(f >= 1.0 - 1e-8, d <= 1e-8, "fidelity {f} vs trace_dist {d}");
    }
}

#[test]
fn standard_channels_complete_across_parameter_grid() {
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        for spec in [
            ChannelSpec::PhaseFlip { p },
            ChannelSpec::Depolarizing { p },
            ChannelSpec::AmplitudeDamping { gamma: p },
        ] {
            let ch = standard_channel(&spec).unwrap();
            // from_kraus re-verifies completeness.
            assert!(QuantumChannel::from_kraus(ch.kraus().to_vec()).is_ok(), "{spec:?}");
        }
    }
}

#[test]
fn composed_channels_keep_monotonicity() {
    let mut rng = rng_from(11);
    let a = random::random_channel(2, 2, &mut rng);
    let b = random::random_channel(2, 3, &mut rng);
    let composed = QuantumChannel::compose(&a, &b).unwrap();
    let rho = random::random_density(2, 2, &mut rng);
    let sigma = random::random_density(2, 2, &mut rng);
    let report = measures::monotonicity_check(&composed, &rho, &sigma).unwrap();
    assert!(report.is_monotone(1e-8));
}

#[test]
fn perfect_correction_iff_no_loss() {
    let mut rng = rng_from(13);
    // Unitary channels: zero loss, perfect correction.
    for dim in [2usize, 3, 4] {
        let input = random::random_entangled_pure(dim, dim, &mut rng);
        let u = random::random_unitary(dim, &mut rng);
        let ch = QuantumChannel::from_kraus(vec![u]).unwrap();
        let out = recovery::correct(&input, &ch).unwrap();
        assert!(out.epsilon.abs() <= 1e-9);
        assert!(out.achieved_f >= 1.0 - 1e-7);
    }
    // Channels whose dilation leaves the environment pure and uncorrelated
    // with the reference also lose nothing: a global phase, and a two-Kraus
    // family proportional to the identity (the environment ends in a
    // superposition but stays in a product with R).
    let phase = num_complex::Complex64::from_polar(1.0, 0.7);
    let amp = num_complex::Complex64::new(0.5f64.sqrt(), 0.0);
    let iamp = num_complex::Complex64::new(0.0, 0.5f64.sqrt());
    for kraus in [
        vec![ComplexMatrix::identity(3).scale_c(phase)],
        vec![
            ComplexMatrix::identity(3).scale_c(amp),
            ComplexMatrix::identity(3).scale_c(iamp),
        ],
    ] {
        let ch = QuantumChannel::from_kraus(kraus).unwrap();
        let input = random::random_entangled_pure(3, 3, &mut rng);
        let out = recovery::correct(&input, &ch).unwrap();
        assert!(out.epsilon.abs() <= 1e-9);
        assert!(out.achieved_f >= 1.0 - 1e-7);
    }
    // Noisy channels on entangled inputs lose coherent information and the
    // achieved fidelity drops below 1 accordingly.
    let bell = entangled_input(&[0.5, 0.5], 2).unwrap();
    let noisy = standard_channel(&ChannelSpec::PhaseFlip { p: 0.2 }).unwrap();
    let out = recovery::correct(&bell, &noisy).unwrap();
    assert!(out.epsilon > 1e-3);
    assert!(out.achieved_f < 1.0 - 1e-8);
}
