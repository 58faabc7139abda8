// SPDX-License-Identifier: Apache-2.0

//! TOML experiment description.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::device::{basis_map, BasisKind, BasisMap, DeviceSpec, TransmonSpec};
use crate::error::{Result, SynthError};
use crate::gates::{build_gate, GateName};
use crate::optimize::{MinimizerSettings, ParamAddress, ParameterEntry, ParameterSpace, PruningSchedule};
use crate::pulse::{Envelope, PulseSchedule, Tone, ToneField, DEFAULT_SAMPLE_DT};

/// A scalar that is either fixed or optimized within bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Fixed(f64),
    Free {
        value: f64,
        min: f64,
        max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
    },
}

impl Param {
    pub fn free(value: f64, min: f64, max: f64) -> Self {
        Param::Free { value, min, max, scale: None }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Param::Fixed(v) | Param::Free { value: v, .. } => v,
        }
    }

    fn entry(&self, address: ParamAddress, default_scale: f64) -> Option<ParameterEntry> {
        match *self {
            Param::Fixed(_) => None,
            Param::Free { min, max, scale, .. } => Some(ParameterEntry::new(address, min, max, scale.unwrap_or(default_scale))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnvelopeConfig {
    Gaussian { t0: Param, sigma: Param },
    Rectangular,
    Flattop { rise: Param },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToneConfig {
    /// Index of the driven transmon.
    #[serde(default)]
    pub channel: usize,
    pub frequency: Param,
    pub phase: Param,
    pub amplitude: Param,
    #[serde(default = "zero_param")]
    pub drag: Param,
    pub envelope: EnvelopeConfig,
}

fn zero_param() -> Param {
    Param::Fixed(0.0)
}

fn default_dt() -> f64 {
    DEFAULT_SAMPLE_DT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub gate_time: Param,
    #[serde(default = "default_dt")]
    pub sample_dt: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tones: Vec<ToneConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub transmons: Vec<TransmonSpec>,
    #[serde(default)]
    pub coupling_j: f64,
    #[serde(default = "unit")]
    pub line_transfer: f64,
}

fn unit() -> f64 {
    1.0
}

impl DeviceConfig {
    pub fn to_spec(&self) -> Result<DeviceSpec> {
        for t in &self.transmons {
            t.validate()?;
        }
        let spec = DeviceSpec { transmons: self.transmons.clone(), coupling_j: self.coupling_j, line_transfer: self.line_transfer };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub target: GateName,
    pub basis: BasisKind,
    /// Run succeeds when the final goal is at or below this value.
    pub threshold: f64,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the runner's output root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    /// Rotating-frame frequency per transmon; lab frame when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<f64>>,
    pub device: DeviceConfig,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub optimizer: MinimizerSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pruning: Option<PruningSchedule>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SynthError::Configuration(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SynthError::Configuration(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SynthError::Io(format!("{}: {e}", path.display())))?;
        let cfg = Self::from_toml(&text).map_err(|e| SynthError::Configuration(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn device_spec(&self) -> Result<DeviceSpec> {
        self.device.to_spec()
    }

    pub fn basis_map(&self) -> Result<BasisMap> {
        basis_map(&self.device_spec()?, self.basis)
    }

    /// Checks every cross-field invariant; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let spec = self.device_spec()?;
        let map = self.basis_map()?;
        let gate = build_gate(self.target);
        if gate.dim() != map.register_dim() {
            return Err(SynthError::InvalidDimension(format!(
                "target: gate {} acts on {} states ({} transmon(s)) but the device register has {} states ({} transmon(s))",
                self.target,
                gate.dim(),
                self.target.transmons(),
                map.register_dim(),
                spec.transmons.len()
            )));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(SynthError::Configuration(format!("threshold: must be a non-negative number, got {}", self.threshold)));
        }
        if let Some(f) = &self.frame {
            if f.len() != spec.transmons.len() {
                return Err(SynthError::Configuration(format!(
                    "frame: need {} frequencies, got {}",
                    spec.transmons.len(),
                    f.len()
                )));
            }
        }
        if !(self.schedule.sample_dt > 0.0) {
            return Err(SynthError::Configuration("schedule.sample_dt: must be positive".into()));
        }
        for (i, t) in self.schedule.tones.iter().enumerate() {
            if t.channel >= spec.transmons.len() {
                return Err(SynthError::Configuration(format!(
                    "schedule.tones[{i}].channel: transmon {} does not exist",
                    t.channel
                )));
            }
        }
        match &self.pruning {
            Some(p) => {
                p.validate()?;
                if !self.schedule.tones.is_empty() {
                    return Err(SynthError::Configuration("schedule.tones: must be empty when pruning lays out a comb".into()));
                }
            }
            None if self.schedule.tones.is_empty() => {
                return Err(SynthError::Configuration("schedule.tones: at least one tone is required without pruning".into()));
            }
            None => {}
        }
        let schedule = self.initial_schedule()?;
        schedule.validate_for(&spec)?;
        if self.pruning.is_none() {
            self.parameter_space()?.validate(&schedule).map_err(|e| match e {
                SynthError::Configuration(m) => SynthError::Configuration(format!("schedule.{m}")),
                other => other,
            })?;
        }
        Ok(())
    }

    fn channel_count(&self) -> usize {
        self.device.transmons.len()
    }

    /// Schedule built from the tone templates (empty channels when pruning).
    pub fn initial_schedule(&self) -> Result<PulseSchedule> {
        let mut channels = vec![Vec::new(); self.channel_count()];
        for (i, t) in self.schedule.tones.iter().enumerate() {
            let envelope = match &t.envelope {
                EnvelopeConfig::Gaussian { t0, sigma } => Envelope::Gaussian { t0: t0.value(), sigma: sigma.value() },
                EnvelopeConfig::Rectangular => Envelope::Rectangular,
                EnvelopeConfig::Flattop { rise } => Envelope::Flattop { rise: rise.value() },
            };
            let tone = Tone::new(t.frequency.value(), t.phase.value(), t.amplitude.value(), envelope).with_drag(t.drag.value());
            channels
                .get_mut(t.channel)
                .ok_or_else(|| SynthError::Configuration(format!("schedule.tones[{i}].channel: out of range")))?
                .push(tone);
        }
        let s = PulseSchedule { gate_time: self.schedule.gate_time.value(), sample_dt: self.schedule.sample_dt, channels };
        s.validate()?;
        Ok(s)
    }

    /// Free parameters of the tone templates, in declaration order.
    pub fn parameter_space(&self) -> Result<ParameterSpace> {
        let gate_time = self.schedule.gate_time.value();
        let mut index = vec![0usize; self.channel_count()];
        let mut entries = Vec::new();
        for t in &self.schedule.tones {
            let k = index[t.channel];
            index[t.channel] += 1;
            let addr = |field| ParamAddress::Tone { channel: t.channel, tone: k, field };
            let amp_scale = t.amplitude.value().abs().max(1e-6);
            let mut fields = vec![
                (&t.frequency, ToneField::Frequency, 1.0 / (TAU * gate_time)),
                (&t.phase, ToneField::Phase, 1.0),
                (&t.amplitude, ToneField::Amplitude, amp_scale),
                (&t.drag, ToneField::Drag, 1.0),
            ];
            match &t.envelope {
                EnvelopeConfig::Gaussian { t0, sigma } => {
                    fields.push((t0, ToneField::Center, 1.0));
                    fields.push((sigma, ToneField::Sigma, 1.0));
                }
                EnvelopeConfig::Flattop { rise } => fields.push((rise, ToneField::Rise, 1.0)),
                EnvelopeConfig::Rectangular => {}
            }
            entries.extend(fields.into_iter().filter_map(|(p, f, s)| p.entry(addr(f), s)));
        }
        if let Some(e) = self.schedule.gate_time.entry(ParamAddress::GateTime, 1.0) {
            entries.push(e);
        }
        Ok(ParameterSpace::new(entries))
    }
}
