use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stcphase::analytic::{
    b_factor, correlated_dephasing_channel, geometric_phase_lossless, ideal_gate_unitary, intrinsic_dephasing_channel,
};
use stcphase::channel::TwoQubitChannel;
use stcphase::device::{
    cavity_decay, coupling_strengths, exchange_and_derivatives, gate_schedule, photon_detuning_shift, photon_voltage,
    QubitTuning, ResonatorSpec,
};
use stcphase::fidelity::{average_gate_fidelity, entanglement_fidelity_in_basis, pauli_basis, product_state_basis};
use stcphase::noise::{drive_factor, DriveExponent};
use stcphase::ops;
use stcphase::sweep::{Axis, RunConfig, SweepSpec};
use stcphase::units::Energy;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_channel(seed: u64, b: f64, g1: f64, g2: f64, t: f64) -> TwoQubitChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    intrinsic_dephasing_channel(g1, g2, t)
        .unwrap()
        .then(&correlated_dephasing_channel(b).unwrap())
        .then_unitary(&ops::random_unitary(4, &mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn schedule_identities(g1 in 1e-3f64..10.0, g2 in 1e-3f64..10.0, n in 1u32..12) {
        let s = gate_schedule(g1, g2, n).unwrap();
        prop_assert!(rel(s.delta * s.t_g, 2.0 * PI * n as f64) < 1e-14);
        prop_assert!(rel(s.delta, 2.0 * (n as f64 * g1 * g2).sqrt()) < 1e-14);
        // a closed loop at the schedule carries exactly π/4
        let g = (g1 * g2).sqrt();
        prop_assert!((geometric_phase_lossless(g, s.delta, s.t_g) - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn resonator_homogeneity(z in 10.0f64..1e5, q in 10.0f64..1e7, lambda in 0.1f64..10.0) {
        let r = ResonatorSpec::from_ghz(6.5, z, q).unwrap();
        let scaled_z = r.with_z_r(lambda * lambda * z).unwrap();
        let scaled_q = r.with_q(lambda * q).unwrap();
        prop_assert!(rel(photon_voltage(&scaled_z), lambda * photon_voltage(&r)) < 1e-12);
        prop_assert!(rel(cavity_decay(&scaled_q), cavity_decay(&r) / lambda) < 1e-12);
    }

    #[test]
    fn exchange_derivative_identity(j in 0.05f64..30.0, eps_a in 10.0f64..500.0, offset in -5.0f64..5.0) {
        let t = QubitTuning::at_exchange(
            Energy::from_ghz(1.0), Energy::from_microev(eps_a), Energy::from_ghz(j), 0.18, Energy::ZERO,
        ).unwrap();
        let eps = Energy::from_rad_per_ns(t.eps_0.rad_per_ns() + offset * t.eps_a.rad_per_ns());
        let d = exchange_and_derivatives(&t, eps).unwrap();
        let ea = t.eps_a.rad_per_ns();
        prop_assert!(rel(d.d1 * ea, d.j) < 1e-12);
        prop_assert!(rel(d.d2 * ea * ea, d.j) < 1e-12);
        prop_assert!(rel(d.d3 * ea * ea * ea, d.j) < 1e-12);
    }

    #[test]
    fn coupling_ratio_identity(
        j in 0.05f64..30.0, eps_d in 1.0f64..500.0, c_r in 0.01f64..1.0, z in 50.0f64..5e4,
    ) {
        let res = ResonatorSpec::from_ghz(6.5, z, 2e4).unwrap();
        let t = QubitTuning::at_exchange(
            Energy::from_ghz(1.0), Energy::from_microev(50.0), Energy::from_ghz(j), c_r, Energy::from_microev(eps_d),
        ).unwrap();
        let c = coupling_strengths(&t, &res).unwrap();
        let shift = photon_detuning_shift(&t, &res).rad_per_ns();
        prop_assert!(rel(c.chi * t.eps_d.rad_per_ns(), 2.0 * c.g * shift) < 1e-12);
    }

    #[test]
    fn drive_factor_exponent(eps_d in 0.0f64..1e3, beta in 0.05f64..0.99) {
        let ea = Energy::from_microev(50.0);
        let x = Energy::from_microev(eps_d) / ea;
        let f = drive_factor(Energy::from_microev(eps_d), ea, beta, DriveExponent::Exact);
        prop_assert!(rel(f, (1.0 + x * x / 4.0).powf(2.0 / (beta + 1.0))) < 1e-12);
    }

    #[test]
    fn b_splits_into_loss_and_entanglement(g in 0.01f64..3.0, kappa in 0.0f64..0.5, n in 1u32..6) {
        let s = gate_schedule(g, g, n).unwrap();
        let b = b_factor(g, s.delta, kappa, s.t_g).unwrap();
        prop_assert!(rel(b.b, b.b_l * b.b_e) < 1e-15);
        prop_assert!(b.b > 0.0 && b.b <= 1.0 + 1e-15);
    }

    #[test]
    fn channels_are_cptp(seed in 0u64..1000, b in 0.0f64..=1.0, g1 in 0.0f64..2.0, g2 in 0.0f64..2.0, t in 0.0f64..5.0) {
        let ch = random_channel(seed, b, g1, g2, t);
        prop_assert!(ch.completeness_error() < 1e-10);
        prop_assert!(ch.min_choi_eigenvalue() > -1e-8);
    }

    #[test]
    fn dephasing_steps_commute_with_gate(seed in 0u64..1000, b in 0.0f64..=1.0, g in 0.0f64..2.0, t in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = ops::random_density_matrix(4, &mut rng);
        let eq = intrinsic_dephasing_channel(g, g, t).unwrap();
        let eb = correlated_dephasing_channel(b).unwrap();
        let u = ideal_gate_unitary(PI / 4.0);
        let a = eq.then(&eb).then_unitary(&u).apply(&rho);
        let other = eb.then(&eq).then_unitary(&u).apply(&rho);
        let first = TwoQubitChannel::unitary(&u).then(&eb).then(&eq).apply(&rho);
        prop_assert!((&a - &other).norm() < 1e-12);
        prop_assert!((&a - &first).norm() < 1e-12);
    }

    #[test]
    fn fidelity_basis_independent_and_bounded(seed in 0u64..1000, b in 0.0f64..=1.0, g in 0.0f64..2.0, t in 0.0f64..5.0) {
        let ch = random_channel(seed, b, g, g, t);
        let target = ideal_gate_unitary(PI / 4.0);
        let (fp, _) = entanglement_fidelity_in_basis(&ch, &target, &pauli_basis());
        let (fs, _) = entanglement_fidelity_in_basis(&ch, &target, &product_state_basis());
        prop_assert!((fp - fs).norm() < 1e-12);
        let f = average_gate_fidelity(&ch, &target).unwrap().f_avg;
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
    }

    #[test]
    fn fidelity_local_unitary_invariance(seed in 0u64..1000, b in 0.0f64..=1.0, g in 0.0f64..2.0, t in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let ch = random_channel(seed, b, g, g, t);
        let target = ideal_gate_unitary(PI / 4.0);
        let v = ops::kron(&ops::random_unitary(2, &mut rng), &ops::random_unitary(2, &mut rng));
        let vd = v.adjoint();
        let ch_v = TwoQubitChannel::unitary(&vd).then(&ch).then_unitary(&v);
        let f = average_gate_fidelity(&ch, &target).unwrap().f_avg;
        let f_v = average_gate_fidelity(&ch_v, &(&v * &target * &vd)).unwrap().f_avg;
        prop_assert!((f - f_v).abs() < 1e-12);
    }

    #[test]
    fn unitary_target_fidelity_is_one_only_on_target(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = ops::random_unitary(4, &mut rng);
        let w = ops::random_unitary(4, &mut rng);
        let f_same = average_gate_fidelity(&TwoQubitChannel::unitary(&u), &u).unwrap().f_avg;
        prop_assert!((f_same - 1.0).abs() < 1e-12);
        let f_other = average_gate_fidelity(&TwoQubitChannel::unitary(&w), &u).unwrap().f_avg;
        prop_assert!(f_other < 1.0 - 1e-6);
    }

    #[test]
    fn config_json_round_trip(
        z in 1.0f64..1e6, q in 1.0f64..1e8, n in 1u32..8, seed in any::<u64>(),
        values in prop::collection::vec(1.0f64..1e5, 1..5),
    ) {
        let cfg = RunConfig {
            z_ohm: z,
            q,
            n,
            seed,
            sweep: Some(SweepSpec { axes: vec![Axis::list("q", values), Axis::log("z_ohm", 50.0, 5e4, 3)] }),
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        prop_assert_eq!(RunConfig::from_json_str(&text).unwrap(), cfg);
    }
}
