// SPDX-License-Identifier: Apache-2.0

//! Control-signal chain: carrier tones, envelopes, DRAG, and the sampled
//! drive waveform of each transmon.
//!
//! Times are in ns, frequencies in GHz, amplitudes in V. A tone contributes
//! `A·Re[s̃(t)·exp(i(2π f t + φ))]` where `s̃ = s − iδ·ṡ/λ` is the (possibly
//! DRAG-corrected) envelope. With δ = 0 this is the usual
//! `A·s(t)·cos(2π f t + φ)`.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::device::DeviceSpec;
use crate::error::{Result, SynthError};
use crate::numeric::{ComplexMatrix, C64};

/// Default sampling interval (ns).
pub const DEFAULT_SAMPLE_DT: f64 = 0.02;

/// Slack when checking that a time lies inside `[0, T]`.
const TIME_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Envelope {
    /// Unnormalized Gaussian `exp(−(t−t0)²/(2σ²))`.
    Gaussian { t0: f64, sigma: f64 },
    Rectangular,
    /// Unit plateau with raised-cosine ramps of duration `rise` at both ends.
    Flattop { rise: f64 },
}

impl Envelope {
    pub fn validate(&self, gate_time: f64) -> Result<()> {
        match *self {
            Envelope::Gaussian { t0, sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(SynthError::InvalidInput(format!("gaussian sigma must be positive, got {sigma}")));
                }
                if !(t0 >= -TIME_SLACK && t0 <= gate_time + TIME_SLACK) {
                    return Err(SynthError::InvalidInput(format!(
                        "gaussian center {t0} outside the gate window [0, {gate_time}]"
                    )));
                }
            }
            Envelope::Rectangular => {}
            Envelope::Flattop { rise } => {
                if !(rise >= 0.0 && rise.is_finite()) {
                    return Err(SynthError::InvalidInput(format!("flattop rise must be non-negative, got {rise}")));
                }
            }
        }
        Ok(())
    }

    /// Envelope value without the window check.
    pub(crate) fn eval(&self, t: f64, gate_time: f64) -> f64 {
        match *self {
            Envelope::Gaussian { t0, sigma } => (-(t - t0).powi(2) / (2.0 * sigma * sigma)).exp(),
            Envelope::Rectangular => 1.0,
            Envelope::Flattop { rise } => flattop(t, gate_time, rise),
        }
    }

    /// ṡ(t): analytic for Gaussians, central difference with step `h` otherwise.
    pub(crate) fn derivative(&self, t: f64, gate_time: f64, h: f64) -> f64 {
        match *self {
            Envelope::Gaussian { t0, sigma } => -(t - t0) / (sigma * sigma) * self.eval(t, gate_time),
            Envelope::Rectangular => 0.0,
            Envelope::Flattop { .. } => (self.eval(t + h, gate_time) - self.eval(t - h, gate_time)) / (2.0 * h),
        }
    }
}

fn flattop(t: f64, gate_time: f64, rise: f64) -> f64 {
    if rise <= 0.0 {
        return 1.0;
    }
    let ramp = |x: f64| {
        if x <= 0.0 {
            0.0
        } else if x >= rise {
            1.0
        } else {
            0.5 * (1.0 - (PI * x / rise).cos())
        }
    };
    ramp(t).min(ramp(gate_time - t))
}

/// Envelope value at `t ∈ [0, T]`.
pub fn envelope_value(env: &Envelope, t: f64, gate_time: f64) -> Result<f64> {
    check_time(t, gate_time)?;
    Ok(env.eval(t, gate_time))
}

fn check_time(t: f64, gate_time: f64) -> Result<()> {
    if !(t >= -TIME_SLACK && t <= gate_time + TIME_SLACK) {
        return Err(SynthError::InvalidInput(format!("time {t} outside the gate window [0, {gate_time}]")));
    }
    Ok(())
}

/// DRAG-corrected complex envelope `s(t) − iδ·ṡ(t)/λ`.
///
/// `h` is the finite-difference step used for non-Gaussian envelopes
/// (normally the sampling interval).
pub fn drag_envelope(env: &Envelope, t: f64, gate_time: f64, lambda: f64, delta: f64, h: f64) -> Result<C64> {
    check_time(t, gate_time)?;
    if lambda == 0.0 {
        return Err(SynthError::DivisionByZero("DRAG correction with zero anharmonicity".into()));
    }
    let s = env.eval(t, gate_time);
    if delta == 0.0 {
        return Ok(C64::new(s, 0.0));
    }
    Ok(C64::new(s, -delta * env.derivative(t, gate_time, h) / lambda))
}

/// One carrier with its envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    /// Carrier frequency (GHz).
    pub frequency: f64,
    /// Carrier phase (rad).
    #[serde(default)]
    pub phase: f64,
    /// Amplitude (V).
    pub amplitude: f64,
    pub envelope: Envelope,
    /// DRAG coefficient δ.
    #[serde(default)]
    pub drag: f64,
}

impl Tone {
    pub fn new(frequency: f64, phase: f64, amplitude: f64, envelope: Envelope) -> Self {
        Self { frequency, phase, amplitude, envelope, drag: 0.0 }
    }

    pub fn with_drag(mut self, delta: f64) -> Self {
        self.drag = delta;
        self
    }

    pub fn validate(&self, gate_time: f64, sample_dt: f64) -> Result<()> {
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(SynthError::InvalidInput(format!("carrier frequency must be positive, got {}", self.frequency)));
        }
        let nyquist = 0.5 / sample_dt;
        if self.frequency >= nyquist {
            return Err(SynthError::InvalidInput(format!(
                "carrier frequency {} GHz is at or above the Nyquist limit {nyquist} GHz",
                self.frequency
            )));
        }
        if !self.amplitude.is_finite() || !self.phase.is_finite() || !self.drag.is_finite() {
            return Err(SynthError::InvalidInput("tone amplitude, phase and DRAG must be finite".into()));
        }
        self.envelope.validate(gate_time)
    }

    /// Contribution of this tone at time `t` (V).
    pub fn sample(&self, t: f64, gate_time: f64, lambda: f64, h: f64) -> f64 {
        let theta = TAU * self.frequency * t + self.phase;
        let (sin, cos) = theta.sin_cos();
        let s = self.envelope.eval(t, gate_time);
        if self.drag == 0.0 {
            return self.amplitude * (s * cos);
        }
        let sdot = self.envelope.derivative(t, gate_time, h);
        self.amplitude * (s * cos + self.drag * sdot / lambda * sin)
    }
}

/// Tone fields that can be addressed by the optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToneField {
    Frequency,
    Phase,
    Amplitude,
    Drag,
    /// Gaussian center t0.
    Center,
    /// Gaussian width σ.
    Sigma,
    /// Flat-top ramp duration.
    Rise,
}

impl ToneField {
    pub fn get(self, tone: &Tone) -> Option<f64> {
        match (self, &tone.envelope) {
            (ToneField::Frequency, _) => Some(tone.frequency),
            (ToneField::Phase, _) => Some(tone.phase),
            (ToneField::Amplitude, _) => Some(tone.amplitude),
            (ToneField::Drag, _) => Some(tone.drag),
            (ToneField::Center, Envelope::Gaussian { t0, .. }) => Some(*t0),
            (ToneField::Sigma, Envelope::Gaussian { sigma, .. }) => Some(*sigma),
            (ToneField::Rise, Envelope::Flattop { rise }) => Some(*rise),
            _ => None,
        }
    }

    pub fn set(self, tone: &mut Tone, value: f64) -> Option<()> {
        match (self, &mut tone.envelope) {
            (ToneField::Frequency, _) => tone.frequency = value,
            (ToneField::Phase, _) => tone.phase = value,
            (ToneField::Amplitude, _) => tone.amplitude = value,
            (ToneField::Drag, _) => tone.drag = value,
            (ToneField::Center, Envelope::Gaussian { t0, .. }) => *t0 = value,
            (ToneField::Sigma, Envelope::Gaussian { sigma, .. }) => *sigma = value,
            (ToneField::Rise, Envelope::Flattop { rise }) => *rise = value,
            _ => return None,
        }
        Some(())
    }

    pub fn name(self) -> &'static str {
        match self {
            ToneField::Frequency => "frequency",
            ToneField::Phase => "phase",
            ToneField::Amplitude => "amplitude",
            ToneField::Drag => "drag",
            ToneField::Center => "center",
            ToneField::Sigma => "sigma",
            ToneField::Rise => "rise",
        }
    }
}

/// Partial derivatives of a tone's sample with respect to each of its fields,
/// evaluated at one time. Fields that do not apply to the envelope are zero.
#[derive(Clone, Copy, Debug, Default)]
pub struct TonePartials {
    pub frequency: f64,
    pub phase: f64,
    pub amplitude: f64,
    pub drag: f64,
    pub center: f64,
    pub sigma: f64,
    pub rise: f64,
}

impl TonePartials {
    pub fn get(&self, field: ToneField) -> f64 {
        match field {
            ToneField::Frequency => self.frequency,
            ToneField::Phase => self.phase,
            ToneField::Amplitude => self.amplitude,
            ToneField::Drag => self.drag,
            ToneField::Center => self.center,
            ToneField::Sigma => self.sigma,
            ToneField::Rise => self.rise,
        }
    }
}

impl Tone {
    /// Sample value and all partial derivatives at `t`.
    pub fn sample_with_partials(&self, t: f64, gate_time: f64, lambda: f64, h: f64) -> (f64, TonePartials) {
        let theta = TAU * self.frequency * t + self.phase;
        let (sin, cos) = theta.sin_cos();
        let a = self.amplitude;
        let d = self.drag / lambda;
        let s = self.envelope.eval(t, gate_time);
        let sdot = self.envelope.derivative(t, gate_time, h);

        let value = a * (s * cos + d * sdot * sin);
        let dphase = a * (-s * sin + d * sdot * cos);
        let mut p = TonePartials {
            frequency: TAU * t * dphase,
            phase: dphase,
            amplitude: s * cos + d * sdot * sin,
            drag: a * sdot / lambda * sin,
            ..Default::default()
        };
        match self.envelope {
            Envelope::Gaussian { t0, sigma } => {
                let u = t - t0;
                let s2 = sigma * sigma;
                // ∂s/∂t0 = −ṡ_true, ∂s/∂σ = u²/σ³ s; ṡ = −u/σ² s.
                let sdot_true = -u / s2 * s;
                let ds_dt0 = -sdot_true;
                let ds_dsigma = u * u / (s2 * sigma) * s;
                let dsdot_dt0 = s / s2 - u / s2 * ds_dt0;
                let dsdot_dsigma = 2.0 * u / (s2 * sigma) * s - u / s2 * ds_dsigma;
                p.center = a * (ds_dt0 * cos + d * dsdot_dt0 * sin);
                p.sigma = a * (ds_dsigma * cos + d * dsdot_dsigma * sin);
            }
            Envelope::Flattop { rise } => {
                let eps = 1e-6 * rise.max(1.0);
                let mut up = self.clone();
                let mut down = self.clone();
                up.envelope = Envelope::Flattop { rise: rise + eps };
                down.envelope = Envelope::Flattop { rise: (rise - eps).max(0.0) };
                let span = rise + eps - (rise - eps).max(0.0);
                p.rise = (up.sample(t, gate_time, lambda, h) - down.sample(t, gate_time, lambda, h)) / span;
            }
            Envelope::Rectangular => {}
        }
        (value, p)
    }
}

/// Gate time, sampling interval and the tones driving each transmon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    /// T (ns).
    pub gate_time: f64,
    /// Sampling / piecewise-constant step (ns).
    #[serde(default = "default_dt")]
    pub sample_dt: f64,
    /// One tone list per transmon.
    pub channels: Vec<Vec<Tone>>,
}

fn default_dt() -> f64 {
    DEFAULT_SAMPLE_DT
}

impl PulseSchedule {
    pub fn new(gate_time: f64, channels: Vec<Vec<Tone>>) -> Self {
        Self { gate_time, sample_dt: DEFAULT_SAMPLE_DT, channels }
    }

    /// An undriven schedule for `n_channels` transmons.
    pub fn idle(gate_time: f64, n_channels: usize) -> Self {
        Self::new(gate_time, vec![Vec::new(); n_channels])
    }

    /// Number of piecewise-constant steps, `round(T/dt)`.
    pub fn n_steps(&self) -> Result<usize> {
        if !(self.gate_time > 0.0 && self.gate_time.is_finite()) {
            return Err(SynthError::InvalidInput(format!("gate time must be positive, got {}", self.gate_time)));
        }
        if !(self.sample_dt > 0.0 && self.sample_dt.is_finite()) {
            return Err(SynthError::InvalidInput(format!("sample_dt must be positive, got {}", self.sample_dt)));
        }
        let ratio = self.gate_time / self.sample_dt;
        let n = ratio.round();
        if n < 1.0 || ((ratio - n) / ratio).abs() > 1e-9 {
            return Err(SynthError::InvalidInput(format!(
                "gate time {} is not an integer multiple of sample_dt {}",
                self.gate_time, self.sample_dt
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.n_steps()?;
        for tones in &self.channels {
            for tone in tones {
                tone.validate(self.gate_time, self.sample_dt)?;
            }
        }
        Ok(())
    }

    /// Checks that the schedule has one channel per transmon.
    pub fn validate_for(&self, spec: &DeviceSpec) -> Result<()> {
        self.validate()?;
        if self.channels.len() != spec.transmons.len() {
            return Err(SynthError::Configuration(format!(
                "schedule has {} channels but the device has {} transmons",
                self.channels.len(),
                spec.transmons.len()
            )));
        }
        Ok(())
    }

    /// Midpoint sample times `(k + ½)·dt`.
    pub fn sample_times(&self) -> Result<Vec<f64>> {
        let n = self.n_steps()?;
        let dt = self.gate_time / n as f64;
        Ok((0..n).map(|k| (k as f64 + 0.5) * dt).collect())
    }

    /// Effective step length `T / round(T/dt)`.
    pub fn step(&self) -> Result<f64> {
        Ok(self.gate_time / self.n_steps()? as f64)
    }

    pub fn tone_count(&self) -> usize {
        self.channels.iter().map(Vec::len).sum()
    }
}

/// Sampled drive of one channel (V) at the step midpoints.
///
/// `lambda` is the anharmonicity of the driven transmon (used by DRAG).
pub fn sample_channel(tones: &[Tone], gate_time: f64, dt: f64, lambda: f64) -> Result<Vec<f64>> {
    let probe = PulseSchedule { gate_time, sample_dt: dt, channels: vec![tones.to_vec()] };
    probe.validate()?;
    if lambda == 0.0 && tones.iter().any(|t| t.drag != 0.0) {
        return Err(SynthError::DivisionByZero("DRAG correction with zero anharmonicity".into()));
    }
    let times = probe.sample_times()?;
    let h = probe.step()?;
    let mut out = vec![0.0; times.len()];
    for tone in tones {
        for (v, &t) in out.iter_mut().zip(&times) {
            *v += tone.sample(t, gate_time, lambda, h);
        }
    }
    Ok(out)
}

/// Drive value of every channel at an arbitrary time (V).
pub fn channel_values_at(spec: &DeviceSpec, schedule: &PulseSchedule, t: f64) -> Result<Vec<f64>> {
    check_time(t, schedule.gate_time)?;
    let h = schedule.step()?;
    Ok(schedule
        .channels
        .iter()
        .zip(&spec.transmons)
        .map(|(tones, tr)| tones.iter().map(|tone| tone.sample(t, schedule.gate_time, tr.lambda, h)).sum())
        .collect())
}

/// H_d(t) = Σ_i κ·v_i(t)·(a_i + a_i†) in GHz, with κ the device line transfer.
pub fn drive_hamiltonian_at(spec: &DeviceSpec, schedule: &PulseSchedule, t: f64) -> Result<ComplexMatrix> {
    schedule.validate_for(spec)?;
    let values = channel_values_at(spec, schedule, t)?;
    let mut h = ComplexMatrix::zeros(spec.dim(), spec.dim());
    for (i, v) in values.iter().enumerate() {
        if *v != 0.0 {
            h = &h + &spec.drive_operator(i).scale_real(spec.line_transfer * v);
        }
    }
    Ok(h)
}

/// Waveform of one channel as CSV with header `time_ns,value`.
pub fn waveform_csv(spec: &DeviceSpec, schedule: &PulseSchedule, channel: usize) -> Result<String> {
    let lambda = spec.transmons[channel].lambda;
    let samples = sample_channel(&schedule.channels[channel], schedule.gate_time, schedule.sample_dt, lambda)?;
    let times = schedule.sample_times()?;
    let mut out = String::from("time_ns,value\n");
    for (t, v) in times.iter().zip(&samples) {
        writeln!(out, "{t},{v}").expect("write to string");
    }
    Ok(out)
}

/// Normalized spectrum of one channel as CSV with header `freq_GHz,normalized_magnitude`.
pub fn spectrum_csv(spec: &DeviceSpec, schedule: &PulseSchedule, channel: usize) -> Result<String> {
    let lambda = spec.transmons[channel].lambda;
    let samples = sample_channel(&schedule.channels[channel], schedule.gate_time, schedule.sample_dt, lambda)?;
    // Pad to at least 16k points so narrow lines are resolved on the plot grid.
    let (freqs, mags) = crate::numeric::fft_spectrum_padded(&samples, schedule.step()?, 1 << 14)?;
    let mut out = String::from("freq_GHz,normalized_magnitude\n");
    for (f, m) in freqs.iter().zip(&mags) {
        writeln!(out, "{f},{m}").expect("write to string");
    }
    Ok(out)
}
