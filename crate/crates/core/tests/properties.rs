// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use transmon_synth::device::{pauli_decompose, relabel_map, DeviceSpec, TransmonSpec};
use transmon_synth::dynamics::{fidelity, project_to_computational, propagate, to_rotating_frame};
use transmon_synth::gates::{build_gate, GateName};
use transmon_synth::numeric::{expm, hermitian_eig, ComplexMatrix};
use transmon_synth::optimize::{evaluate_goal, prune_channel};
use transmon_synth::pulse::{Envelope, PulseSchedule, Tone};

fn tone_strategy(gate_time: f64) -> impl Strategy<Value = Tone> {
    (4.0..5.5f64, -PI..PI, -0.5..0.5f64, 0.2..0.4f64, -1.0..1.0f64, any::<bool>()).prop_map(
        move |(f, phase, amp, width, drag, gaussian)| {
            let env = if gaussian {
                Envelope::Gaussian { t0: gate_time / 2.0, sigma: width * gate_time }
            } else {
                Envelope::Rectangular
            };
            Tone::new(f, phase, amp, env).with_drag(drag)
        },
    )
}

fn hermitian_strategy(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |v| {
        let a = ComplexMatrix::from_fn(n, n, |i, j| C64::new(v[i * n + j].0, v[i * n + j].1));
        (&a + &a.adjoint()).scale_real(0.5)
    })
}

fn single() -> DeviceSpec {
    DeviceSpec::reference_single().with_line_transfer(1.0 / std::f64::consts::TAU)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn propagators_are_unitary(tones in prop::collection::vec(tone_strategy(8.0), 0..4)) {
        let u = propagate(&single(), &PulseSchedule::new(8.0, vec![tones])).unwrap();
        prop_assert!(u.matrix.unitarity_defect() < 1e-10);
    }

    #[test]
    fn ladder_energies_follow_closed_form(omega in 3.0..7.0f64, lambda in 0.05..0.4f64, levels in 2usize..8) {
        let t = TransmonSpec::with_truncation(omega, lambda, levels).unwrap();
        let eig = hermitian_eig(&t.drift()).unwrap().eigenvalues;
        for (n, e) in eig.iter().enumerate() {
            let nf = n as f64;
            prop_assert!((e - (nf * omega - nf * (nf - 1.0) * lambda / 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn pauli_round_trip(h in hermitian_strategy(4)) {
        let back = pauli_decompose(&h).unwrap().reconstruct();
        prop_assert!((&back - &h).max_abs() < 1e-10);
    }

    #[test]
    fn fidelity_ignores_global_phase(h in hermitian_strategy(4), phi in -PI..PI) {
        let u = expm(&h.scale(C64::new(0.0, -1.0))).unwrap();
        let target = build_gate(GateName::SqrtIswap);
        let a = fidelity(&u, &target).unwrap();
        let b = fidelity(&u.scale(C64::from_polar(1.0, phi)), &target).unwrap();
        prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
    }

    #[test]
    fn tone_order_is_irrelevant(tones in prop::collection::vec(tone_strategy(5.0), 2..5), rot in 1usize..4) {
        let spec = single();
        let mut shuffled = tones.clone();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        let a = propagate(&spec, &PulseSchedule::new(5.0, vec![tones])).unwrap().matrix;
        let b = propagate(&spec, &PulseSchedule::new(5.0, vec![shuffled])).unwrap().matrix;
        prop_assert!((&a - &b).max_abs() < 1e-12);
    }

    #[test]
    fn goal_is_deterministic(tones in prop::collection::vec(tone_strategy(4.0), 1..3)) {
        let spec = single();
        let schedule = PulseSchedule::new(4.0, vec![tones]);
        let map = relabel_map(&spec.levels()).unwrap();
        let target = build_gate(GateName::X90Q2);
        let a = evaluate_goal(&spec, &schedule, &target, &map).unwrap();
        let b = evaluate_goal(&spec, &schedule, &target, &map).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&a));
    }

    #[test]
    fn zero_frame_leaves_propagator_alone(tones in prop::collection::vec(tone_strategy(3.0), 0..3)) {
        let spec = single();
        let u = propagate(&spec, &PulseSchedule::new(3.0, vec![tones])).unwrap();
        let r = to_rotating_frame(&u, &spec, &[0.0]).unwrap();
        prop_assert!((&r.matrix - &u.matrix).max_abs() == 0.0);
    }

    #[test]
    fn projection_never_gains_norm(tones in prop::collection::vec(tone_strategy(6.0), 1..3)) {
        let spec = single();
        let u = propagate(&spec, &PulseSchedule::new(6.0, vec![tones])).unwrap();
        let p = project_to_computational(&u, &relabel_map(&spec.levels()).unwrap()).unwrap();
        for j in 0..4 {
            prop_assert!(p.column_norm(j) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn pruning_keeps_the_loudest(amps in prop::collection::vec(-1.0..1.0f64, 1..12), remove in 0usize..12) {
        let tones: Vec<Tone> = amps
            .iter()
            .enumerate()
            .map(|(k, &a)| Tone::new(3.0 + 0.1 * k as f64, 0.0, a, Envelope::Rectangular))
            .collect();
        let count = remove.min(tones.len() - 1);
        let kept = prune_channel(&tones, count);
        prop_assert_eq!(kept.len(), tones.len() - count);
        let kept_min = kept.iter().map(|t| t.amplitude.abs()).fold(f64::INFINITY, f64::min);
        let removed_max = tones
            .iter()
            .filter(|t| !kept.contains(t))
            .map(|t| t.amplitude.abs())
            .fold(0.0, f64::max);
        prop_assert!(count == 0 || removed_max <= kept_min);
    }
}
