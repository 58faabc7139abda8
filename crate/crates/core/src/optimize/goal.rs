// SPDX-License-Identifier: Apache-2.0

//! The gate-synthesis goal g = 1 − F and its exact gradient.

use super::{Objective, ParamAddress, ParameterSpace};
use crate::device::{BasisMap, DeviceSpec};
use crate::dynamics::{
    control_samples, fidelity, project_to_computational, propagate, to_rotating_frame, trace_overlap, Engine, GateTarget,
};
use crate::error::{Result, SynthError};
use crate::numeric::{ComplexMatrix, C64};
use crate::pulse::{PulseSchedule, ToneField};

/// g = 1 − F for a schedule in the lab frame.
pub fn evaluate_goal(spec: &DeviceSpec, schedule: &PulseSchedule, target: &GateTarget, basis: &BasisMap) -> Result<f64> {
    evaluate_goal_in_frame(spec, schedule, target, basis, None)
}

/// g = 1 − F, optionally after moving to a rotating frame.
pub fn evaluate_goal_in_frame(
    spec: &DeviceSpec,
    schedule: &PulseSchedule,
    target: &GateTarget,
    basis: &BasisMap,
    frame: Option<&[f64]>,
) -> Result<f64> {
    let mut u = propagate(spec, schedule)?;
    if let Some(f) = frame {
        u = to_rotating_frame(&u, spec, f)?;
    }
    let p = project_to_computational(&u, basis)?;
    Ok(1.0 - fidelity(&p, target)?)
}

/// Goal over the scaled coordinates of a [`ParameterSpace`].
///
/// Tone parameters get exact gradients through the propagation engine; a
/// free gate time falls back to a central difference.
#[derive(Clone, Debug)]
pub struct ScheduleGoal {
    spec: DeviceSpec,
    template: PulseSchedule,
    space: ParameterSpace,
    target: GateTarget,
    frame: Option<Vec<f64>>,
    engine: Engine,
    /// T_c·G·T_c† on the full space.
    lifted: ComplexMatrix,
}

impl ScheduleGoal {
    pub fn new(
        spec: DeviceSpec,
        template: PulseSchedule,
        space: ParameterSpace,
        target: GateTarget,
        basis: &BasisMap,
        frame: Option<Vec<f64>>,
    ) -> Result<Self> {
        spec.validate()?;
        template.validate_for(&spec)?;
        space.validate(&template)?;
        if basis.dim() != spec.dim() {
            return Err(SynthError::InvalidDimension(format!(
                "basis has dimension {} but the device has {}",
                basis.dim(),
                spec.dim()
            )));
        }
        if basis.register_dim() != target.dim() {
            return Err(SynthError::InvalidDimension(format!(
                "gate {} acts on {} states but the register has {}",
                target.name,
                target.dim(),
                basis.register_dim()
            )));
        }
        if let Some(f) = &frame {
            if f.len() != spec.transmons.len() {
                return Err(SynthError::Configuration("need one frame frequency per transmon".into()));
            }
        }
        let all: Vec<usize> = (0..basis.dim()).collect();
        let tc = basis.transform.submatrix(&all, &basis.computational_indices);
        let lifted = &(&tc * &target.ideal) * &tc.adjoint();
        let engine = Engine::new(&spec);
        Ok(Self { spec, template, space, target, frame, engine, lifted })
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn template(&self) -> &PulseSchedule {
        &self.template
    }

    pub fn target(&self) -> &GateTarget {
        &self.target
    }

    /// Schedule at scaled coordinates `u`.
    pub fn schedule_at(&self, u: &[f64]) -> Result<PulseSchedule> {
        self.space.write(&self.template, &self.space.from_scaled(u))
    }

    /// Scaled coordinates of the template.
    pub fn start_point(&self) -> Result<Vec<f64>> {
        Ok(self.space.to_scaled(&self.space.read(&self.template)?))
    }

    fn overlap_target(&self, gate_time: f64) -> ComplexMatrix {
        let Some(frame) = &self.frame else {
            return self.lifted.clone();
        };
        let n = self.lifted.rows();
        let r: Vec<C64> = (0..n)
            .map(|i| {
                let cycles: f64 = self.spec.split_index(i).iter().zip(frame).map(|(&k, &w)| k as f64 * w).sum();
                C64::from_polar(1.0, -std::f64::consts::TAU * cycles * gate_time)
            })
            .collect();
        ComplexMatrix::from_fn(n, n, |i, j| r[i] * self.lifted.get(i, j))
    }

    fn prepare(&self, schedule: &PulseSchedule) -> Result<(Vec<Vec<f64>>, f64)> {
        schedule.validate()?;
        Ok((control_samples(&self.spec, schedule)?, schedule.step()?))
    }

    /// Goal of an arbitrary schedule compatible with the template.
    pub fn goal_of(&self, schedule: &PulseSchedule) -> Result<f64> {
        let (controls, dt) = self.prepare(schedule)?;
        let u = self.engine.evolve(&controls, dt);
        let o = trace_overlap(&self.overlap_target(schedule.gate_time), &u);
        Ok(1.0 - o.norm() / self.target.dim() as f64)
    }

    /// Goal and the derivative with respect to every control sample.
    pub fn goal_and_sample_gradient(&self, schedule: &PulseSchedule) -> Result<(f64, Vec<Vec<f64>>)> {
        let (controls, dt) = self.prepare(schedule)?;
        let (o, _, dodv) = self.engine.overlap_gradient(&controls, dt, &self.overlap_target(schedule.gate_time));
        let d = self.target.dim() as f64;
        let mag = o.norm();
        let phase = if mag > 0.0 { o.conj() / mag } else { C64::new(1.0, 0.0) };
        let grad = dodv.iter().map(|row| row.iter().map(|z| -(phase * z).re / d).collect()).collect();
        Ok((1.0 - mag / d, grad))
    }
}

impl Objective for ScheduleGoal {
    fn dim(&self) -> usize {
        self.space.len()
    }

    fn parameter_name(&self, i: usize) -> String {
        self.space.entries[i].address.to_string()
    }

    fn frozen(&self) -> Vec<bool> {
        self.space.frozen_mask()
    }

    fn value(&self, u: &[f64]) -> Result<f64> {
        self.goal_of(&self.schedule_at(u)?)
    }

    fn value_and_gradient(&self, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        let schedule = self.schedule_at(u)?;
        let (g, dgdv) = self.goal_and_sample_gradient(&schedule)?;
        let times = schedule.sample_times()?;
        let dt = schedule.step()?;
        let mut grad = vec![0.0; u.len()];

        // Group free tone parameters by tone so partials are computed once.
        let mut by_tone: Vec<((usize, usize), Vec<(usize, ToneField)>)> = Vec::new();
        for (i, e) in self.space.entries.iter().enumerate() {
            if e.frozen {
                continue;
            }
            match e.address {
                ParamAddress::Tone { channel, tone, field } => match by_tone.iter_mut().find(|(k, _)| *k == (channel, tone)) {
                    Some((_, list)) => list.push((i, field)),
                    None => by_tone.push(((channel, tone), vec![(i, field)])),
                },
                ParamAddress::GateTime => {
                    let h = (1e-7 * u[i].abs()).max(1e-7);
                    let mut p = u.to_vec();
                    p[i] = u[i] + h;
                    let fp = self.value(&p);
                    p[i] = u[i] - h;
                    let fm = self.value(&p);
                    match (fp, fm) {
                        (Ok(a), Ok(b)) => grad[i] = (a - b) / (2.0 * h),
                        (Err(err), _) | (_, Err(err)) => {
                            return Err(SynthError::GradientEvaluation {
                                parameter: self.parameter_name(i),
                                reason: err.to_string(),
                            })
                        }
                    }
                }
            }
        }
        for ((channel, tone), fields) in by_tone {
            let t = &schedule.channels[channel][tone];
            let lambda = self.spec.transmons[channel].lambda;
            let mut acc = vec![0.0; fields.len()];
            for (k, &tk) in times.iter().enumerate() {
                let w = dgdv[channel][k];
                let (_, partials) = t.sample_with_partials(tk, schedule.gate_time, lambda, dt);
                for (a, &(_, field)) in acc.iter_mut().zip(&fields) {
                    *a += w * partials.get(field);
                }
            }
            for (a, &(i, _)) in acc.iter().zip(&fields) {
                grad[i] = a * self.space.entries[i].scale;
            }
        }
        Ok((g, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::relabel_map;
    use crate::gates::{build_gate, GateName};
    use crate::optimize::{finite_difference_gradient, ParameterEntry};
    use crate::pulse::{Envelope, Tone};

    fn addr(tone: usize, field: ToneField) -> ParamAddress {
        ParamAddress::Tone { channel: 0, tone, field }
    }

    fn x90_goal(frozen_sigma: bool) -> ScheduleGoal {
        let spec = DeviceSpec::reference_single();
        let tones = vec![
            Tone::new(5.0, 3.0, 0.012, Envelope::Gaussian { t0: 20.0, sigma: 8.0 }).with_drag(0.1),
            Tone::new(4.4, 3.0, 0.009, Envelope::Gaussian { t0: 20.0, sigma: 8.0 }),
        ];
        let template = PulseSchedule::new(40.0, vec![tones]);
        let mut entries = Vec::new();
        for tone in 0..2 {
            entries.push(ParameterEntry::new(addr(tone, ToneField::Frequency), 4.0, 5.5, 1e-3));
            entries.push(ParameterEntry::new(addr(tone, ToneField::Phase), -7.0, 7.0, 1.0));
            entries.push(ParameterEntry::new(addr(tone, ToneField::Amplitude), -1.0, 1.0, 0.01));
            entries.push(ParameterEntry::new(addr(tone, ToneField::Drag), -2.0, 2.0, 1.0));
            entries.push(ParameterEntry::new(addr(tone, ToneField::Center), 10.0, 30.0, 1.0));
            let s = ParameterEntry::new(addr(tone, ToneField::Sigma), 2.0, 20.0, 1.0);
            entries.push(if frozen_sigma { s.frozen() } else { s });
        }
        ScheduleGoal::new(
            spec,
            template,
            ParameterSpace::new(entries),
            build_gate(GateName::X90Q2),
            &relabel_map(&[5]).unwrap(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let goal = x90_goal(false);
        let u = goal.start_point().unwrap();
        let (g0, exact) = goal.value_and_gradient(&u).unwrap();
        assert!((g0 - goal.value(&u).unwrap()).abs() < 1e-12);
        let fd = finite_difference_gradient(&goal, &u).unwrap();
        let scale = fd.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for i in 0..u.len() {
            assert!((exact[i] - fd[i]).abs() < 1e-5 * scale + 1e-7, "{}: {} vs {}", goal.parameter_name(i), exact[i], fd[i]);
        }
    }

    #[test]
    fn frozen_components_are_zero() {
        let goal = x90_goal(true);
        let u = goal.start_point().unwrap();
        let (_, g) = goal.value_and_gradient(&u).unwrap();
        for (i, e) in goal.space().entries.iter().enumerate() {
            if e.frozen {
                assert_eq!(g[i], 0.0);
            }
        }
    }

    #[test]
    fn goal_matches_evaluate_goal() {
        let goal = x90_goal(false);
        let u = goal.start_point().unwrap();
        let s = goal.schedule_at(&u).unwrap();
        let direct = evaluate_goal(&DeviceSpec::reference_single(), &s, goal.target(), &relabel_map(&[5]).unwrap()).unwrap();
        assert!((direct - goal.value(&u).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn zero_drive_goals() {
        let spec = DeviceSpec::reference_single();
        let map = relabel_map(&[5]).unwrap();
        let idle = PulseSchedule::idle(40.0, 1);
        assert!(evaluate_goal(&spec, &idle, &build_gate(GateName::Identity), &map).unwrap() < 1e-9);
        let g = evaluate_goal(&spec, &idle, &build_gate(GateName::Iswap), &map).unwrap();
        assert!((g - 0.5).abs() < 1e-9);
    }

    #[test]
    fn frame_goal_matches_rotated_projection() {
        let spec = DeviceSpec::reference_single();
        let map = relabel_map(&[5]).unwrap();
        let tone = Tone::new(5.0, 0.3, 0.01, Envelope::Gaussian { t0: 20.0, sigma: 8.0 });
        let template = PulseSchedule::new(33.3, vec![vec![tone]]);
        let space = ParameterSpace::new(vec![ParameterEntry::new(addr(0, ToneField::Amplitude), -1.0, 1.0, 0.01)]);
        let target = build_gate(GateName::X90Q2);
        let goal = ScheduleGoal::new(spec.clone(), template.clone(), space, target.clone(), &map, Some(vec![5.0])).unwrap();
        let direct = evaluate_goal_in_frame(&spec, &template, &target, &map, Some(&[5.0])).unwrap();
        assert!((goal.value(&goal.start_point().unwrap()).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let spec = DeviceSpec::reference_single();
        let r = ScheduleGoal::new(
            spec,
            PulseSchedule::idle(40.0, 1),
            ParameterSpace::default(),
            build_gate(GateName::Cz),
            &relabel_map(&[5]).unwrap(),
            None,
        );
        assert!(matches!(r, Err(SynthError::InvalidDimension(_))));
    }
}
