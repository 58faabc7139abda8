// SPDX-License-Identifier: Apache-2.0

//! Declarative experiments: load a config, synthesize a pulse, write artifacts.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{DeviceConfig, EnvelopeConfig, ExperimentConfig, Param, ScheduleConfig, ToneConfig};

use crate::device::{assign_bare_labels, BasisKind, DeviceSpec};
use crate::dynamics::{
    error_matrix, error_matrix_anchored, hinton_csv, leakage, project_to_computational, propagate, propagator_csv,
    stark_shifted_eigensystem, to_rotating_frame,
};
use crate::error::{Result, SynthError};
use crate::gates::{build_gate, GateName};
use crate::optimize::{
    comb_schedule, minimize, prune_and_reoptimize, pruning_curve_csv, OptimizationReport, PruningStage, ScheduleGoal, Termination,
};
use crate::pulse::{spectrum_csv, waveform_csv, Envelope, PulseSchedule};

/// Summary of one pruning round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub tone_counts: Vec<usize>,
    pub goal: f64,
    pub fidelity: f64,
    pub evaluations: usize,
    pub termination: Termination,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub target: GateName,
    pub basis: BasisKind,
    pub threshold: f64,
    pub reached: bool,
    pub initial_goal: f64,
    pub final_goal: f64,
    pub fidelity: f64,
    pub leakage: f64,
    /// Optimization of the final schedule (last pruning round when pruning).
    pub optimization: OptimizationReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pruning: Vec<StageSummary>,
    pub wall_time_s: f64,
}

/// Outcome of [`synthesize`].
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub report: ExperimentReport,
    pub schedule: PulseSchedule,
    pub stages: Vec<PruningStage>,
    /// Free-parameter names and final values.
    pub parameters: Vec<(String, f64)>,
}

fn goal_for(config: &ExperimentConfig, spec: &DeviceSpec, template: PulseSchedule) -> Result<ScheduleGoal> {
    ScheduleGoal::new(
        spec.clone(),
        template,
        config.parameter_space()?,
        build_gate(config.target),
        &config.basis_map()?,
        config.frame.clone(),
    )
}

/// Runs the optimization (and pruning, if configured) without touching disk.
/// `on_stage` sees every pruning round as soon as it finishes.
pub fn synthesize(config: &ExperimentConfig, on_stage: impl FnMut(&PruningStage)) -> Result<Synthesis> {
    config.validate()?;
    let start = Instant::now();
    let spec = config.device_spec()?;
    let map = config.basis_map()?;
    let target = build_gate(config.target);

    let (schedule, optimization, stages, parameters) = match &config.pruning {
        None => {
            let goal = goal_for(config, &spec, config.initial_schedule()?)?;
            let (lo, hi) = goal.space().scaled_bounds();
            let report = minimize(&goal, &goal.start_point()?, &lo, &hi, &config.optimizer)?;
            let schedule = goal.schedule_at(&report.final_point)?;
            let values = goal.space().from_scaled(&report.final_point);
            let params = goal.space().names().into_iter().zip(values).collect();
            (schedule, report, Vec::new(), params)
        }
        Some(pruning) => {
            let mut pruning = pruning.clone();
            pruning.layout.seed = pruning.layout.seed.wrapping_add(config.seed);
            let comb = comb_schedule(&spec, &pruning, config.schedule.gate_time.value(), config.schedule.sample_dt)?;
            let stages = prune_and_reoptimize(&spec, &target, &map, &pruning, comb, &config.optimizer, config.frame.clone(), on_stage)?;
            let last = stages.last().ok_or_else(|| SynthError::InvalidInput("pruning produced no stages".into()))?;
            let space = crate::optimize::comb_space(&last.schedule, &pruning);
            let values = space.read(&last.schedule)?;
            let params = space.names().into_iter().zip(values).collect();
            let report = OptimizationReport {
                initial_goal: stages[0].report.initial_goal,
                evaluations: stages.iter().map(|s| s.report.evaluations).sum(),
                wall_time_s: stages.iter().map(|s| s.report.wall_time_s).sum(),
                ..last.report.clone()
            };
            (last.schedule.clone(), report, stages, params)
        }
    };

    let mut u = propagate(&spec, &schedule)?;
    if let Some(f) = &config.frame {
        u = to_rotating_frame(&u, &spec, f)?;
    }
    let proj = project_to_computational(&u, &map)?;
    let fidelity = crate::dynamics::fidelity(&proj, &target)?;
    let final_goal = 1.0 - fidelity;
    let initial_goal = optimization.initial_goal;
    let report = ExperimentReport {
        name: config.name.clone(),
        target: config.target,
        basis: config.basis,
        threshold: config.threshold,
        reached: final_goal <= config.threshold,
        initial_goal,
        final_goal,
        fidelity,
        leakage: leakage(&proj),
        optimization,
        pruning: stages
            .iter()
            .map(|s| StageSummary {
                tone_counts: s.tone_counts.clone(),
                goal: s.goal,
                fidelity: s.fidelity,
                evaluations: s.report.evaluations,
                termination: s.report.termination,
            })
            .collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(Synthesis { report, schedule, stages, parameters })
}

/// Tables of the final drive in physical units, one entry per tone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterTable {
    pub gate: GateName,
    pub gate_time_ns: f64,
    pub infidelity: f64,
    pub line_transfer: f64,
    pub channels: Vec<ChannelTable>,
    pub free_parameters: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelTable {
    pub transmon: usize,
    pub drives: Vec<DriveRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveRow {
    pub frequency_ghz: f64,
    pub phase_rad: f64,
    pub amplitude_mv: f64,
    pub envelope: Envelope,
    pub drag: f64,
}

pub fn parameter_table(spec: &DeviceSpec, synthesis: &Synthesis) -> ParameterTable {
    ParameterTable {
        gate: synthesis.report.target,
        gate_time_ns: synthesis.schedule.gate_time,
        infidelity: synthesis.report.final_goal,
        line_transfer: spec.line_transfer,
        channels: synthesis
            .schedule
            .channels
            .iter()
            .enumerate()
            .map(|(c, tones)| ChannelTable {
                transmon: c + 1,
                drives: tones
                    .iter()
                    .map(|t| DriveRow {
                        frequency_ghz: t.frequency,
                        phase_rad: t.phase,
                        amplitude_mv: t.amplitude * 1e3,
                        envelope: t.envelope.clone(),
                        drag: t.drag,
                    })
                    .collect(),
            })
            .collect(),
        free_parameters: synthesis.parameters.clone(),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::write(dir.join(name), contents).map_err(|e| SynthError::Io(format!("{}: {e}", dir.join(name).display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| SynthError::Io(e.to_string()))
}

/// Synthesizes and writes every artifact into `dir`.
pub fn run_experiment(config: &ExperimentConfig, dir: &Path) -> Result<ExperimentReport> {
    config.validate()?;
    fs::create_dir_all(dir).map_err(|e| SynthError::Io(format!("{}: {e}", dir.display())))?;
    let mut curve: Vec<PruningStage> = Vec::new();
    let synthesis = synthesize(config, |stage| {
        curve.push(stage.clone());
        if let Err(e) = write(dir, "pruning_curve.csv", &pruning_curve_csv(&curve)) {
            log::warn!("could not update pruning curve: {e}");
        }
    })?;
    write_artifacts(config, &synthesis, dir)?;
    Ok(synthesis.report)
}

pub fn write_artifacts(config: &ExperimentConfig, synthesis: &Synthesis, dir: &Path) -> Result<()> {
    let spec = config.device_spec()?;
    let map = config.basis_map()?;
    let target = build_gate(config.target);
    let s = &synthesis.schedule;

    write(dir, "report.json", &to_json(&synthesis.report)?)?;
    write(dir, "parameters.json", &to_json(&parameter_table(&spec, synthesis))?)?;
    write(dir, "trace.csv", &synthesis.report.optimization.trace_csv())?;
    for c in 0..s.channels.len() {
        let suffix = if c == 0 { String::new() } else { format!("_t{}", c + 1) };
        write(dir, &format!("waveform{suffix}.csv"), &waveform_csv(&spec, s, c)?)?;
        write(dir, &format!("spectrum{suffix}.csv"), &spectrum_csv(&spec, s, c)?)?;
    }
    let mut u = propagate(&spec, s)?;
    if let Some(f) = &config.frame {
        u = to_rotating_frame(&u, &spec, f)?;
    }
    let proj = project_to_computational(&u, &map)?;
    write(dir, "propagator.csv", &propagator_csv(&proj))?;
    write(dir, "hinton.csv", &hinton_csv(&proj))?;
    let err = match error_matrix(&proj, &target) {
        Err(SynthError::AnchorUndefined { suggestion, .. }) => error_matrix_anchored(&proj, &target, suggestion)?,
        other => other?,
    };
    write(dir, "error_matrix.csv", &propagator_csv(&err))?;
    write(dir, "resonances.csv", &annotate_spectrum(config, s)?)?;
    if !synthesis.stages.is_empty() {
        write(dir, "pruning_curve.csv", &pruning_curve_csv(&synthesis.stages))?;
    }
    Ok(())
}

/// Band of the resonance annotation (GHz).
pub const ANNOTATION_BAND: (f64, f64) = (2.0, 6.0);

/// Single-excitation transitions of the Stark-shifted spectrum at T/2 inside
/// [`ANNOTATION_BAND`], as CSV with header `freq_GHz,label`.
pub fn annotate_spectrum(config: &ExperimentConfig, schedule: &PulseSchedule) -> Result<String> {
    let spec = config.device_spec()?;
    let lines = resonances(&spec, schedule)?;
    let mut out = String::from("freq_GHz,label\n");
    for (f, label) in lines {
        writeln!(out, "{f},{label}").expect("write to string");
    }
    Ok(out)
}

/// Frequencies (ascending) and labels of the Stark-shifted single-excitation
/// transitions inside [`ANNOTATION_BAND`].
pub fn resonances(spec: &DeviceSpec, schedule: &PulseSchedule) -> Result<Vec<(f64, String)>> {
    let eig = stark_shifted_eigensystem(spec, schedule)?;
    let n = spec.dim();
    let labels = assign_bare_labels(&eig.eigenvectors).unwrap_or_else(|_| (0..n).collect());
    let label = |b: usize| {
        let parts: Vec<String> = spec.split_index(b).iter().map(|k| k.to_string()).collect();
        format!("|{}>", parts.join(","))
    };
    let mut lines = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let (la, lb) = (spec.split_index(labels[a]), spec.split_index(labels[b]));
            let diffs: Vec<i64> = la.iter().zip(&lb).map(|(x, y)| *y as i64 - *x as i64).collect();
            let single = diffs.iter().filter(|&&d| d == 1).count() == 1 && diffs.iter().all(|&d| d == 0 || d == 1);
            if !single {
                continue;
            }
            let f = eig.eigenvalues[b] - eig.eigenvalues[a];
            if f >= ANNOTATION_BAND.0 && f <= ANNOTATION_BAND.1 {
                lines.push((f, format!("{}-{}", label(labels[a]), label(labels[b]))));
            }
        }
    }
    lines.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| x.1.cmp(&y.1)));
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_transmon_resonances() {
        let spec = DeviceSpec::reference_single();
        let lines = resonances(&spec, &PulseSchedule::idle(40.0, 1)).unwrap();
        let f: Vec<f64> = lines.iter().map(|l| l.0).collect();
        for (got, want) in f.iter().zip([4.1, 4.4, 4.7, 5.0]) {
            assert!((got - want).abs() < 1e-9, "{f:?}");
        }
        assert_eq!(lines[3].1, "|0>-|1>");
    }

    #[test]
    fn pair_resonances_include_second_transmon() {
        let spec = DeviceSpec::reference_pair();
        let lines = resonances(&spec, &PulseSchedule::idle(40.0, 2)).unwrap();
        assert!(lines.iter().any(|(f, l)| (f - 4.5).abs() < 0.01 && l == "|0,0>-|0,1>"));
        assert!(lines.iter().any(|(f, l)| (f - 5.0).abs() < 0.01 && l == "|0,0>-|1,0>"));
    }
}
