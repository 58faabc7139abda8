// SPDX-License-Identifier: Apache-2.0

//! Multi-tone comb drives and the prune-then-reoptimize loop.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{minimize, MinimizerSettings, Objective, ParamAddress, ParameterEntry, ParameterSpace, OptimizationReport, ScheduleGoal};
use crate::device::{BasisMap, DeviceSpec};
use crate::dynamics::GateTarget;
use crate::error::{Result, SynthError};
use crate::pulse::{Envelope, PulseSchedule, Tone, ToneField};

/// Tones removed from each channel per round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Removal {
    Count(usize),
    /// Fraction of the channel's current tones, rounded up.
    Fraction(f64),
}

/// Initial rectangular comb on every channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CombLayout {
    pub band_low: f64,
    pub band_high: f64,
    /// Initial amplitude on transmon 1.
    pub amplitude: f64,
    /// Transmon-2 amplitudes relative to transmon 1.
    pub second_channel_ratio: f64,
    /// Amplitude bound as a multiple of the channel's initial amplitude.
    pub amplitude_bound: f64,
    /// Frequencies may move this far outside the band (GHz).
    pub frequency_margin: f64,
    /// Seed of the uniformly random initial phases.
    pub seed: u64,
}

impl Default for CombLayout {
    fn default() -> Self {
        Self {
            band_low: 2.5,
            band_high: 5.5,
            amplitude: 1e-3,
            second_channel_ratio: 0.01,
            amplitude_bound: 100.0,
            frequency_margin: 0.5,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PruningSchedule {
    /// Tones per channel before the first optimization.
    pub initial_tone_count: usize,
    pub removal: Removal,
    /// Pruning stops once every channel is down to this many tones.
    pub min_tones: usize,
    /// Pruning stops after a stage whose goal exceeds this value.
    pub stop_goal: Option<f64>,
    pub layout: CombLayout,
}

impl Default for PruningSchedule {
    fn default() -> Self {
        Self { initial_tone_count: 200, removal: Removal::Fraction(0.2), min_tones: 10, stop_goal: None, layout: CombLayout::default() }
    }
}

impl PruningSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.min_tones == 0 {
            return Err(SynthError::Configuration("pruning.min_tones must be at least 1".into()));
        }
        if self.initial_tone_count < self.min_tones {
            return Err(SynthError::Configuration(format!(
                "pruning.initial_tone_count ({}) is below pruning.min_tones ({})",
                self.initial_tone_count, self.min_tones
            )));
        }
        match self.removal {
            Removal::Count(0) => return Err(SynthError::Configuration("pruning.removal count must be positive".into())),
            Removal::Fraction(f) if !(f > 0.0 && f < 1.0) => {
                return Err(SynthError::Configuration(format!("pruning.removal fraction must lie in (0, 1), got {f}")))
            }
            _ => {}
        }
        let l = &self.layout;
        if !(l.band_low > 0.0 && l.band_low < l.band_high && l.amplitude > 0.0 && l.second_channel_ratio > 0.0 && l.amplitude_bound > 1.0)
        {
            return Err(SynthError::Configuration("pruning.layout: need 0 < band_low < band_high, positive amplitudes and amplitude_bound > 1".into()));
        }
        Ok(())
    }

    fn removal_count(&self, current: usize) -> usize {
        let k = match self.removal {
            Removal::Count(k) => k,
            Removal::Fraction(f) => ((current as f64) * f).ceil() as usize,
        };
        k.max(1).min(current.saturating_sub(self.min_tones))
    }

    fn channel_amplitude(&self, channel: usize) -> f64 {
        if channel == 0 {
            self.layout.amplitude
        } else {
            self.layout.amplitude * self.layout.second_channel_ratio
        }
    }
}

/// Equally spaced rectangular tones over the band on every channel, with
/// seeded random phases.
pub fn comb_schedule(spec: &DeviceSpec, pruning: &PruningSchedule, gate_time: f64, sample_dt: f64) -> Result<PulseSchedule> {
    pruning.validate()?;
    let n = pruning.initial_tone_count;
    let l = &pruning.layout;
    let mut rng = ChaCha8Rng::seed_from_u64(l.seed);
    let channels = (0..spec.transmons.len())
        .map(|c| {
            (0..n)
                .map(|k| {
                    let f = if n == 1 { (l.band_low + l.band_high) / 2.0 } else { l.band_low + (l.band_high - l.band_low) * k as f64 / (n - 1) as f64 };
                    let phase = rng.random_range(-PI..PI);
                    Tone::new(f, phase, pruning.channel_amplitude(c), Envelope::Rectangular)
                })
                .collect()
        })
        .collect();
    let schedule = PulseSchedule { gate_time, sample_dt, channels };
    schedule.validate_for(spec)?;
    Ok(schedule)
}

/// Frequency, phase and amplitude of every tone, scaled so that a unit step
/// moves a tone's accumulated phase over the gate by about one radian.
pub fn comb_space(schedule: &PulseSchedule, pruning: &PruningSchedule) -> ParameterSpace {
    let l = &pruning.layout;
    let f_scale = 1.0 / (TAU * schedule.gate_time);
    let mut entries = Vec::new();
    for (c, tones) in schedule.channels.iter().enumerate() {
        let a = pruning.channel_amplitude(c);
        for (k, t) in tones.iter().enumerate() {
            let addr = |field| ParamAddress::Tone { channel: c, tone: k, field };
            let (flo, fhi) = (l.band_low - l.frequency_margin, l.band_high + l.frequency_margin);
            entries.push(ParameterEntry::new(addr(ToneField::Frequency), flo.min(t.frequency), fhi.max(t.frequency), f_scale));
            let pb = 4.0 * PI + t.phase.abs();
            entries.push(ParameterEntry::new(addr(ToneField::Phase), -pb, pb, 1.0));
            let ab = (l.amplitude_bound * a).max(2.0 * t.amplitude.abs());
            entries.push(ParameterEntry::new(addr(ToneField::Amplitude), -ab, ab, a));
        }
    }
    ParameterSpace::new(entries)
}

/// Removes the `count` tones with the smallest |A|; ties go to the lowest
/// frequency first.
pub fn prune_channel(tones: &[Tone], count: usize) -> Vec<Tone> {
    let mut order: Vec<usize> = (0..tones.len()).collect();
    order.sort_by(|&a, &b| {
        tones[a]
            .amplitude
            .abs()
            .total_cmp(&tones[b].amplitude.abs())
            .then(tones[a].frequency.total_cmp(&tones[b].frequency))
    });
    let drop: Vec<usize> = order.into_iter().take(count.min(tones.len().saturating_sub(1))).collect();
    tones.iter().enumerate().filter(|(i, _)| !drop.contains(i)).map(|(_, t)| t.clone()).collect()
}

/// One point of the pruning curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruningStage {
    pub tone_counts: Vec<usize>,
    pub goal: f64,
    pub fidelity: f64,
    pub schedule: PulseSchedule,
    pub report: OptimizationReport,
}

impl PruningStage {
    /// Tones on the busiest channel.
    pub fn tone_count(&self) -> usize {
        self.tone_counts.iter().copied().max().unwrap_or(0)
    }
}

/// CSV with header `tone_count,fidelity,goal`.
pub fn pruning_curve_csv(stages: &[PruningStage]) -> String {
    let mut out = String::from("tone_count,fidelity,goal\n");
    for s in stages {
        out.push_str(&format!("{},{},{}\n", s.tone_count(), s.fidelity, s.goal));
    }
    out
}

/// Optimizes `start` (or a fresh comb), then repeatedly drops the weakest
/// tones of every channel and reoptimizes until `min_tones` is reached.
#[allow(clippy::too_many_arguments)]
pub fn prune_and_reoptimize(
    spec: &DeviceSpec,
    target: &GateTarget,
    basis: &BasisMap,
    pruning: &PruningSchedule,
    start: PulseSchedule,
    settings: &MinimizerSettings,
    frame: Option<Vec<f64>>,
    mut on_stage: impl FnMut(&PruningStage),
) -> Result<Vec<PruningStage>> {
    pruning.validate()?;
    let mut schedule = start;
    let mut stages = Vec::new();
    loop {
        let space = comb_space(&schedule, pruning);
        let goal = ScheduleGoal::new(spec.clone(), schedule.clone(), space, target.clone(), basis, frame.clone())?;
        let (lo, hi) = goal.space().scaled_bounds();
        let u0 = goal.start_point()?;
        let report = minimize(&goal, &u0, &lo, &hi, settings)?;
        schedule = goal.schedule_at(&report.final_point)?;
        let g = goal.value(&report.final_point)?;
        let stage = PruningStage {
            tone_counts: schedule.channels.iter().map(Vec::len).collect(),
            goal: g,
            fidelity: 1.0 - g,
            schedule: schedule.clone(),
            report,
        };
        log::info!("pruning stage {:?}: goal {:.4e}", stage.tone_counts, g);
        on_stage(&stage);
        stages.push(stage);
        if pruning.stop_goal.is_some_and(|t| g > t) {
            break;
        }
        let mut removed = false;
        for tones in &mut schedule.channels {
            let k = pruning.removal_count(tones.len());
            if k > 0 {
                *tones = prune_channel(tones, k);
                removed = true;
            }
        }
        if !removed {
            break;
        }
    }
    Ok(stages)
}
