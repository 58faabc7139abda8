// SPDX-License-Identifier: Apache-2.0

//! Propagators, frames, subspace projection and gate-quality diagnostics.

pub mod engine;

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::device::{drift_hamiltonian, BasisKind, BasisMap, DeviceSpec, TransmonSpec};
use crate::error::{Result, SynthError};
use crate::numeric::{hermitian_eig, ComplexMatrix, C64};
use crate::pulse::{drive_hamiltonian_at, PulseSchedule};

pub use engine::{trace_overlap, Engine};

/// A propagator in the bare product basis, optionally in a rotating frame.
#[derive(Clone, Debug)]
pub struct UnitaryResult {
    pub matrix: ComplexMatrix,
    pub gate_time: f64,
    /// Frame frequency per transmon (GHz); empty for the lab frame.
    pub frame: Vec<f64>,
}

/// An ideal gate on the relabeled qubit register (4×4 or 16×16).
#[derive(Clone, Debug)]
pub struct GateTarget {
    pub name: String,
    pub ideal: ComplexMatrix,
}

impl GateTarget {
    pub fn dim(&self) -> usize {
        self.ideal.rows()
    }
}

/// Control samples `v_c[k]` (V) of every channel at the step midpoints.
pub fn control_samples(spec: &DeviceSpec, schedule: &PulseSchedule) -> Result<Vec<Vec<f64>>> {
    schedule.validate_for(spec)?;
    schedule
        .channels
        .iter()
        .zip(&spec.transmons)
        .map(|(tones, t)| crate::pulse::sample_channel(tones, schedule.gate_time, schedule.sample_dt, t.lambda))
        .collect()
}

/// U = Π_k exp(−2πi(H0 + H_J + H_d(t_k))·dt), later steps to the left.
pub fn propagate(spec: &DeviceSpec, schedule: &PulseSchedule) -> Result<UnitaryResult> {
    spec.validate()?;
    let controls = control_samples(spec, schedule)?;
    let engine = Engine::new(spec);
    let matrix = engine.evolve(&controls, schedule.step()?);
    Ok(UnitaryResult { matrix, gate_time: schedule.gate_time, frame: Vec::new() })
}

/// Diagonal of exp(−2πi·t·Σ_i ω_i n_i) over the bare product basis.
fn frame_phases(spec: &DeviceSpec, frame: &[f64], t: f64) -> Vec<C64> {
    (0..spec.dim())
        .map(|idx| {
            let cycles: f64 = spec.split_index(idx).iter().zip(frame).map(|(&n, &w)| n as f64 * w).sum();
            C64::from_polar(1.0, -TAU * cycles * t)
        })
        .collect()
}

/// Ũ = R(T)†·U·R(0) with R(t) = exp(−2πi·t·Σ_i ω_frame,i·n_i).
pub fn to_rotating_frame(u: &UnitaryResult, spec: &DeviceSpec, frame_freqs: &[f64]) -> Result<UnitaryResult> {
    if !u.frame.is_empty() {
        return Err(SynthError::InvalidInput("propagator is already in a rotating frame".into()));
    }
    if frame_freqs.len() != spec.transmons.len() {
        return Err(SynthError::Configuration(format!(
            "need one frame frequency per transmon ({}), got {}",
            spec.transmons.len(),
            frame_freqs.len()
        )));
    }
    let r = frame_phases(spec, frame_freqs, u.gate_time);
    let n = u.matrix.rows();
    let matrix = ComplexMatrix::from_fn(n, n, |i, j| r[i].conj() * u.matrix.get(i, j));
    Ok(UnitaryResult { matrix, gate_time: u.gate_time, frame: frame_freqs.to_vec() })
}

/// d×d block of U on the computational register; dressed maps conjugate by
/// the dressed transform first. Not re-unitarized.
pub fn project_to_computational(u: &UnitaryResult, map: &BasisMap) -> Result<ComplexMatrix> {
    if u.matrix.rows() != map.dim() {
        return Err(SynthError::InvalidDimension(format!(
            "propagator dimension {} does not match basis dimension {}",
            u.matrix.rows(),
            map.dim()
        )));
    }
    let idx = &map.computational_indices;
    Ok(match map.kind {
        BasisKind::Dressed => {
            let t = map.transform.submatrix(&(0..map.dim()).collect::<Vec<_>>(), idx);
            &(&t.adjoint() * &u.matrix) * &t
        }
        BasisKind::Bare | BasisKind::Relabeled => u.matrix.submatrix(idx, idx),
    })
}

fn check_dims(u: &ComplexMatrix, g: &GateTarget) -> Result<()> {
    if u.rows() != g.dim() || u.cols() != g.dim() {
        return Err(SynthError::InvalidDimension(format!(
            "projected propagator is {}x{} but gate {} is {}x{}",
            u.rows(),
            u.cols(),
            g.name,
            g.dim(),
            g.dim()
        )));
    }
    Ok(())
}

/// F = |tr(U†G)|/d.
pub fn fidelity(u_proj: &ComplexMatrix, target: &GateTarget) -> Result<f64> {
    check_dims(u_proj, target)?;
    Ok(trace_overlap(&target.ideal, u_proj).norm() / target.dim() as f64)
}

/// Population lost from the register: 1 − mean squared column norm.
pub fn leakage(u_proj: &ComplexMatrix) -> f64 {
    let d = u_proj.cols();
    1.0 - (0..d).map(|j| u_proj.column_norm(j).powi(2)).sum::<f64>() / d as f64
}

/// U·e^{iφ} − G with φ = arg(G₀₀) − arg(U₀₀).
pub fn error_matrix(u_proj: &ComplexMatrix, target: &GateTarget) -> Result<ComplexMatrix> {
    error_matrix_anchored(u_proj, target, 0)
}

/// Like [`error_matrix`] with the phase anchored on diagonal entry `anchor`.
pub fn error_matrix_anchored(u_proj: &ComplexMatrix, target: &GateTarget, anchor: usize) -> Result<ComplexMatrix> {
    check_dims(u_proj, target)?;
    let d = target.dim();
    let tol = 1e-12;
    let usable = |k: usize| u_proj.get(k, k).norm() > tol && target.ideal.get(k, k).norm() > tol;
    if anchor >= d || !usable(anchor) {
        let suggestion = (0..d).find(|&k| usable(k)).unwrap_or(0);
        return Err(SynthError::AnchorUndefined { index: anchor, suggestion });
    }
    let phi = target.ideal.get(anchor, anchor).arg() - u_proj.get(anchor, anchor).arg();
    Ok(&u_proj.scale(C64::from_polar(1.0, phi)) - &target.ideal)
}

fn distance_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Gate times (ns) up to `t_max` at which every computational level's
/// rotating-frame phase `(E_n − n·frame)·t` is an integer number of cycles
/// within `tol`. Candidates come from a grid of spacing `grid` and are
/// refined onto the phase lattice of the fastest level.
pub fn phase_alignment_times(
    spec: &TransmonSpec,
    frame: f64,
    t_max: f64,
    tol: f64,
    include_leakage: bool,
    grid: f64,
) -> Result<Vec<f64>> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(SynthError::InvalidInput(format!("tolerance must lie in (0, 0.5), got {tol}")));
    }
    if !(grid > 0.0 && t_max > 0.0) {
        return Err(SynthError::InvalidInput("grid spacing and t_max must be positive".into()));
    }
    let top = if include_leakage { 4 } else { 3 };
    let rates: Vec<f64> = (1..=top).map(|n| spec.energy(n) - n as f64 * frame).collect();
    let misalignment = |t: f64| rates.iter().map(|r| distance_to_integer(r * t)).fold(0.0, f64::max);
    let fastest = rates.iter().map(|r| r.abs()).fold(0.0, f64::max);

    let mut found: Vec<f64> = Vec::new();
    let steps = (t_max / grid).floor() as usize;
    for g in 1..=steps {
        let t = g as f64 * grid;
        let mut candidates = vec![t];
        if fastest > 0.0 {
            let lo = ((t - grid) * fastest).ceil() as i64;
            let hi = ((t + grid) * fastest).floor() as i64;
            candidates.extend((lo.max(1)..=hi).map(|j| j as f64 / fastest));
        }
        for c in candidates {
            if c > 0.0 && c <= t_max + 1e-12 && misalignment(c) < tol && !found.iter().any(|&f| (f - c).abs() < 1e-9) {
                found.push(c);
            }
        }
    }
    found.sort_by(f64::total_cmp);
    Ok(found)
}

/// Eigenvalues (ascending, GHz) of H0 + H_J + H_d(T/2).
pub fn stark_shifted_spectrum(spec: &DeviceSpec, schedule: &PulseSchedule) -> Result<Vec<f64>> {
    Ok(stark_shifted_eigensystem(spec, schedule)?.eigenvalues)
}

pub(crate) fn stark_shifted_eigensystem(spec: &DeviceSpec, schedule: &PulseSchedule) -> Result<crate::numeric::Spectrum> {
    let h = &drift_hamiltonian(spec) + &drive_hamiltonian_at(spec, schedule, schedule.gate_time / 2.0)?;
    hermitian_eig(&h)
}

/// Complex entries as CSV with header `row,col,re,im`.
pub fn propagator_csv(u: &ComplexMatrix) -> String {
    let mut out = String::from("row,col,re,im\n");
    for i in 0..u.rows() {
        for j in 0..u.cols() {
            let z = u.get(i, j);
            writeln!(out, "{i},{j},{},{}", z.re, z.im).expect("write to string");
        }
    }
    out
}

/// Magnitude/phase table (Hinton-style plots) with header `row,col,magnitude,phase`.
pub fn hinton_csv(u: &ComplexMatrix) -> String {
    let mut out = String::from("row,col,magnitude,phase\n");
    for i in 0..u.rows() {
        for j in 0..u.cols() {
            let z = u.get(i, j);
            writeln!(out, "{i},{j},{},{}", z.norm(), z.arg()).expect("write to string");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{dressed_map, relabel_map};
    use crate::numeric::expm;
    use crate::pulse::{Envelope, Tone};

    fn gate(name: &str, ideal: ComplexMatrix) -> GateTarget {
        GateTarget { name: name.into(), ideal }
    }

    #[test]
    fn free_evolution_aligns_at_40ns() {
        let spec = DeviceSpec::reference_single();
        let u = propagate(&spec, &PulseSchedule::idle(40.0, 1)).unwrap();
        let p = project_to_computational(&u, &relabel_map(&[5]).unwrap()).unwrap();
        let f = fidelity(&p, &gate("id", ComplexMatrix::identity(4))).unwrap();
        assert!(1.0 - f < 1e-9);
    }

    #[test]
    fn free_evolution_is_diagonal_phases() {
        let spec = DeviceSpec::reference_single();
        let u = propagate(&spec, &PulseSchedule::idle(13.0, 1)).unwrap();
        for n in 0..5 {
            let expect = C64::from_polar(1.0, -TAU * spec.transmons[0].energy(n) * 13.0);
            assert!((u.matrix.get(n, n) - expect).norm() < 1e-9);
        }
        assert!(u.matrix.is_diagonal(1e-12));
    }

    #[test]
    fn frame_of_identity() {
        let spec = DeviceSpec::reference_single();
        let u = UnitaryResult { matrix: ComplexMatrix::identity(5), gate_time: 7.3, frame: vec![] };
        let r = to_rotating_frame(&u, &spec, &[5.0]).unwrap();
        for n in 0..5 {
            let expect = C64::from_polar(1.0, TAU * 5.0 * n as f64 * 7.3);
            assert!((r.matrix.get(n, n) - expect).norm() < 1e-12);
        }
        let z = to_rotating_frame(&u, &spec, &[0.0]).unwrap();
        assert_eq!(z.matrix, u.matrix);
        assert!(to_rotating_frame(&r, &spec, &[5.0]).is_err());
    }

    #[test]
    fn frame_leaves_anharmonic_phases() {
        let spec = DeviceSpec::reference_single();
        let t = 7.3;
        let u = propagate(&spec, &PulseSchedule::new(t, vec![vec![]]).clone()).unwrap_or_else(|_| {
            // 7.3 is not a multiple of 0.02 in floating point; fall back to 7.32.
            propagate(&spec, &PulseSchedule::idle(7.32, 1)).unwrap()
        });
        let r = to_rotating_frame(&u, &spec, &[5.0]).unwrap();
        let t = u.gate_time;
        for n in 0..5 {
            let nf = n as f64;
            let expect = C64::from_polar(1.0, TAU * nf * (nf - 1.0) * 0.3 * t / 2.0);
            assert!((r.matrix.get(n, n) - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn projection_of_identity() {
        let u = UnitaryResult { matrix: ComplexMatrix::identity(25), gate_time: 1.0, frame: vec![] };
        let p = project_to_computational(&u, &relabel_map(&[5, 5]).unwrap()).unwrap();
        assert_eq!(p, ComplexMatrix::identity(16));
        let m = dressed_map(&DeviceSpec::reference_pair()).unwrap();
        let p = project_to_computational(&u, &m).unwrap();
        assert!((&p - &ComplexMatrix::identity(16)).frobenius_norm() < 1e-12);
        assert!(leakage(&p).abs() < 1e-12);
    }

    #[test]
    fn full_transfer_to_leakage_level() {
        // Weak resonant π pulse on 3 ↔ 4 (4.1 GHz) with a long Gaussian.
        let spec = DeviceSpec::reference_single();
        let sigma = 40.0;
        let t = 400.0;
        let area = sigma * (TAU).sqrt();
        let amp = 1.0 / (2.0 * 2.0 * area); // θ = 2π·A·√4·area = π
        let tone = Tone::new(4.1, 0.0, amp, Envelope::Gaussian { t0: t / 2.0, sigma });
        let u = propagate(&spec, &PulseSchedule::new(t, vec![vec![tone]])).unwrap();
        let p = project_to_computational(&u, &relabel_map(&[5]).unwrap()).unwrap();
        assert!(p.column_norm(3) < 0.05, "column norm {}", p.column_norm(3));
        assert!(p.column_norm(0) > 0.99);
    }

    #[test]
    fn fidelity_examples() {
        let x90 = ComplexMatrix::from_row_major(
            2,
            2,
            vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0)],
        )
        .unwrap()
        .scale_real(1.0 / 2f64.sqrt());
        let g = gate("x90", crate::numeric::kron(&x90, &ComplexMatrix::identity(2)));
        assert!((fidelity(&g.ideal, &g).unwrap() - 1.0).abs() < 1e-15);
        let phased = g.ideal.scale(C64::from_polar(1.0, 1.234));
        assert!((fidelity(&phased, &g).unwrap() - 1.0).abs() < 1e-15);
        let f = fidelity(&ComplexMatrix::identity(4), &g).unwrap();
        assert!((f - (TAU / 8.0).cos()).abs() < 1e-15);
        assert!(fidelity(&ComplexMatrix::identity(2), &g).is_err());
    }

    #[test]
    fn error_matrix_examples() {
        let g = gate("id", ComplexMatrix::identity(4));
        let e = error_matrix(&g.ideal.scale(C64::from_polar(1.0, 0.7)), &g).unwrap();
        assert!(e.frobenius_norm() < 1e-15);
        let beta = 0.9;
        let mut diag = vec![C64::new(1.0, 0.0); 4];
        diag[3] = C64::from_polar(1.0, beta);
        let e = error_matrix(&ComplexMatrix::from_diagonal(&diag), &g).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if (i, j) != (3, 3) {
                    assert_eq!(e.get(i, j).norm(), 0.0);
                }
            }
        }
        assert!((e.get(3, 3).norm() - 2.0 * (beta / 2.0).sin().abs()).abs() < 1e-15);

        let swap = gate("swap", ComplexMatrix::from_real_row_major(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap());
        assert!(matches!(error_matrix(&swap.ideal, &swap), Err(SynthError::AnchorUndefined { .. })));
    }

    #[test]
    fn alignment_times() {
        let t = TransmonSpec::new(5.0, 0.3, 5).unwrap();
        let found = phase_alignment_times(&t, 5.0, 40.0, 1e-6, false, 1.0).unwrap();
        for target in [10.0, 20.0, 30.0, 40.0] {
            assert!(found.iter().any(|&x| (x - target).abs() < 1e-9), "{target} missing from {found:?}");
        }
        assert!((found[0] - 10.0 / 3.0).abs() < 1e-9);
        let with_leak = phase_alignment_times(&t, 5.0, 40.0, 1e-6, true, 1.0).unwrap();
        assert!(with_leak.iter().any(|&x| (x - 10.0).abs() < 1e-9));
        // Lab frame: multiples of 10 ns only.
        let lab = phase_alignment_times(&t, 0.0, 40.0, 1e-6, false, 1.0).unwrap();
        assert!((lab[0] - 10.0).abs() < 1e-9);
        let slow = TransmonSpec::new(5.0, 0.0123, 5).unwrap();
        assert!(phase_alignment_times(&slow, 5.0, 40.0, 1e-6, false, 1.0).unwrap().is_empty());
        assert!(phase_alignment_times(&t, 5.0, 40.0, 0.5, false, 1.0).is_err());
    }

    #[test]
    fn rabi_on_two_level_truncation() {
        // Weak resonant rectangular drive. Piecewise-constant sampling scales
        // the resonant component by sinc(π·f·dt).
        let t = TransmonSpec::with_truncation(5.0, 0.3, 2).unwrap();
        let spec = DeviceSpec::single(t);
        let gate_time = 500.0;
        let amp = 0.25 / gate_time; // θ = π/2
        let tone = Tone::new(5.0, 0.0, amp, Envelope::Rectangular);
        let u = propagate(&spec, &PulseSchedule::new(gate_time, vec![vec![tone]])).unwrap();
        let r = to_rotating_frame(&u, &spec, &[5.0]).unwrap();
        let x = std::f64::consts::PI * 5.0 * 0.02;
        let hold = x.sin() / x;
        let expect = expm(&crate::numeric::pauli_x().scale(C64::new(0.0, -TAU / 8.0 * hold))).unwrap();
        let f = trace_overlap(&expect, &r.matrix).norm() / 2.0;
        assert!(1.0 - f < 1e-6, "infidelity {}", 1.0 - f);
    }

    #[test]
    fn stark_shift_zero_drive() {
        let spec = DeviceSpec::reference_single();
        let e = stark_shifted_spectrum(&spec, &PulseSchedule::idle(40.0, 1)).unwrap();
        for (n, v) in e.iter().enumerate() {
            assert!((v - spec.transmons[0].energy(n)).abs() < 1e-12);
        }
    }
}
