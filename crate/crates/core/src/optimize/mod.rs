// SPDX-License-Identifier: Apache-2.0

//! Parameter spaces, goal functions, L-BFGS minimization and tone pruning.

mod goal;
mod lbfgs;
mod pruning;

use std::fmt;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SynthError};
use crate::pulse::{PulseSchedule, ToneField};

pub use goal::{evaluate_goal, evaluate_goal_in_frame, ScheduleGoal};
pub use lbfgs::{minimize, MinimizerSettings, OptimizationReport, Termination, TraceRow};
pub use pruning::{
    comb_schedule, comb_space, prune_and_reoptimize, prune_channel, pruning_curve_csv, CombLayout, PruningSchedule, PruningStage,
    Removal,
};

/// Location of one optimizable number inside a [`PulseSchedule`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamAddress {
    Tone { channel: usize, tone: usize, field: ToneField },
    /// Gate time; the step count is held fixed when it changes.
    GateTime,
}

impl fmt::Display for ParamAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamAddress::Tone { channel, tone, field } => write!(f, "ch{channel}.tone{tone}.{}", field.name()),
            ParamAddress::GateTime => f.write_str("gate_time"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterEntry {
    pub address: ParamAddress,
    pub lower: f64,
    pub upper: f64,
    /// Optimizer coordinate is `value / scale`.
    pub scale: f64,
    #[serde(default)]
    pub frozen: bool,
}

impl ParameterEntry {
    pub fn new(address: ParamAddress, lower: f64, upper: f64, scale: f64) -> Self {
        Self { address, lower, upper, scale, frozen: false }
    }

    pub fn frozen(mut self) -> Self {
        self.frozen = true;
        self
    }
}

/// Ordered list of addressed schedule fields with bounds and scales.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    pub entries: Vec<ParameterEntry>,
}

impl ParameterSpace {
    pub fn new(entries: Vec<ParameterEntry>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.address.to_string()).collect()
    }

    pub fn frozen_mask(&self) -> Vec<bool> {
        self.entries.iter().map(|e| e.frozen).collect()
    }

    /// Checks bounds, scales and that every address resolves exactly once.
    pub fn validate(&self, schedule: &PulseSchedule) -> Result<()> {
        for (i, e) in self.entries.iter().enumerate() {
            let name = e.address.to_string();
            if !(e.lower.is_finite() && e.upper.is_finite() && e.lower < e.upper) {
                return Err(SynthError::Configuration(format!(
                    "{name}: bounds must be finite with lower < upper, got [{}, {}]",
                    e.lower, e.upper
                )));
            }
            if !(e.scale.is_finite() && e.scale > 0.0) {
                return Err(SynthError::Configuration(format!("{name}: scale must be positive, got {}", e.scale)));
            }
            if self.entries[..i].iter().any(|o| o.address == e.address) {
                return Err(SynthError::Configuration(format!("{name}: parameter listed twice")));
            }
            let v = read_field(schedule, e.address)
                .ok_or_else(|| SynthError::Configuration(format!("{name}: address does not resolve in the schedule")))?;
            if v < e.lower || v > e.upper {
                return Err(SynthError::Configuration(format!(
                    "{name}: initial value {v} outside bounds [{}, {}]",
                    e.lower, e.upper
                )));
            }
        }
        Ok(())
    }

    /// Physical values of every entry.
    pub fn read(&self, schedule: &PulseSchedule) -> Result<Vec<f64>> {
        self.entries
            .iter()
            .map(|e| {
                read_field(schedule, e.address)
                    .ok_or_else(|| SynthError::Configuration(format!("{}: address does not resolve", e.address)))
            })
            .collect()
    }

    /// Copy of `template` with every entry set from physical values `x`.
    pub fn write(&self, template: &PulseSchedule, x: &[f64]) -> Result<PulseSchedule> {
        if x.len() != self.len() {
            return Err(SynthError::InvalidDimension(format!(
                "parameter vector has {} entries, space has {}",
                x.len(),
                self.len()
            )));
        }
        let steps = template.n_steps()?;
        let mut s = template.clone();
        for (e, &v) in self.entries.iter().zip(x) {
            match e.address {
                ParamAddress::Tone { channel, tone, field } => {
                    let t = s
                        .channels
                        .get_mut(channel)
                        .and_then(|c| c.get_mut(tone))
                        .ok_or_else(|| SynthError::Configuration(format!("{}: address does not resolve", e.address)))?;
                    field
                        .set(t, v)
                        .ok_or_else(|| SynthError::Configuration(format!("{}: field not present on this envelope", e.address)))?;
                }
                ParamAddress::GateTime => {
                    s.gate_time = v;
                    s.sample_dt = v / steps as f64;
                }
            }
        }
        Ok(s)
    }

    pub fn to_scaled(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.entries).map(|(v, e)| v / e.scale).collect()
    }

    pub fn from_scaled(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.entries).map(|(v, e)| v * e.scale).collect()
    }

    /// Bounds in scaled coordinates.
    pub fn scaled_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        self.entries.iter().map(|e| (e.lower / e.scale, e.upper / e.scale)).unzip()
    }
}

fn read_field(schedule: &PulseSchedule, address: ParamAddress) -> Option<f64> {
    match address {
        ParamAddress::Tone { channel, tone, field } => field.get(schedule.channels.get(channel)?.get(tone)?),
        ParamAddress::GateTime => Some(schedule.gate_time),
    }
}

/// A scalar goal over scaled coordinates.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    /// Names used in error messages and reports.
    fn parameter_name(&self, i: usize) -> String {
        format!("x{i}")
    }

    /// Components that must not move; their gradient is exactly zero.
    fn frozen(&self) -> Vec<bool> {
        vec![false; self.dim()]
    }

    fn value(&self, u: &[f64]) -> Result<f64>;

    fn value_and_gradient(&self, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        let f = self.value(u)?;
        let g = finite_difference_gradient(self, u)?;
        Ok((f, g))
    }
}

/// Central differences with `h_i = max(1e-7, 1e-7·|u_i|)`; frozen components
/// are exactly zero. Stencil points are evaluated on all available cores.
pub fn finite_difference_gradient<O: Objective + ?Sized>(obj: &O, u: &[f64]) -> Result<Vec<f64>> {
    let frozen = obj.frozen();
    let free: Vec<usize> = (0..u.len()).filter(|&i| !frozen.get(i).copied().unwrap_or(false)).collect();
    let one = |i: usize| -> Result<f64> {
        let h = (1e-7 * u[i].abs()).max(1e-7);
        let mut p = u.to_vec();
        p[i] = u[i] + h;
        let wrap = |e: SynthError| SynthError::GradientEvaluation { parameter: obj.parameter_name(i), reason: e.to_string() };
        let fp = obj.value(&p).map_err(wrap)?;
        p[i] = u[i] - h;
        let fm = obj.value(&p).map_err(wrap)?;
        Ok((fp - fm) / (2.0 * h))
    };
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(free.len().max(1));
    let partials: Vec<Result<f64>> = if workers <= 1 {
        free.iter().map(|&i| one(i)).collect()
    } else {
        let chunk = free.len().div_ceil(workers);
        thread::scope(|s| {
            let handles: Vec<_> = free
                .chunks(chunk)
                .map(|part| s.spawn(|| part.iter().map(|&i| one(i)).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("gradient worker panicked")).collect()
        })
    };
    let mut g = vec![0.0; u.len()];
    for (&i, r) in free.iter().zip(partials) {
        g[i] = r?;
    }
    Ok(g)
}
