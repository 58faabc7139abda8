// SPDX-License-Identifier: Apache-2.0

//! Limited-memory BFGS with projected box bounds and Armijo backtracking.

use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::Objective;
use crate::error::{Result, SynthError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizerSettings {
    /// Maximum number of objective calls (value or value-and-gradient).
    pub budget: usize,
    pub memory: usize,
    pub gradient_tol: f64,
    pub relative_tol: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
    /// Stop as soon as the goal drops to this value.
    pub stop_below: Option<f64>,
}

impl Default for MinimizerSettings {
    fn default() -> Self {
        Self {
            budget: 2000,
            memory: 10,
            gradient_tol: 1e-8,
            relative_tol: 1e-12,
            armijo: 1e-4,
            max_backtracks: 30,
            stop_below: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientNorm,
    RelativeChange,
    Budget,
    LineSearch,
    Target,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub goal: f64,
    pub gradient_norm: f64,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub initial_goal: f64,
    pub final_goal: f64,
    pub trace: Vec<TraceRow>,
    /// Final point in optimizer (scaled) coordinates.
    pub final_point: Vec<f64>,
    pub gradient_norm: f64,
    pub termination: Termination,
    pub evaluations: usize,
    pub wall_time_s: f64,
}

impl OptimizationReport {
    /// CSV with header `iteration,goal,gradient_norm`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,goal,gradient_norm\n");
        for r in &self.trace {
            out.push_str(&format!("{},{},{}\n", r.iteration, r.goal, r.gradient_norm));
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Gradient with frozen components and bound-blocked components removed.
fn projected(g: &[f64], u: &[f64], lower: &[f64], upper: &[f64], frozen: &[bool]) -> Vec<f64> {
    (0..g.len())
        .map(|i| {
            let blocked = frozen[i] || (u[i] <= lower[i] && g[i] > 0.0) || (u[i] >= upper[i] && g[i] < 0.0);
            if blocked {
                0.0
            } else {
                g[i]
            }
        })
        .collect()
}

fn two_loop(pg: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = pg.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in &mut q {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|x| -x).collect()
}

/// Minimizes `obj` from `u0` inside the box `[lower, upper]`.
///
/// Every trial point is evaluated with its gradient. Failed evaluations at
/// trial points are treated as rejected steps; a failure at `u0` is returned
/// as an error.
pub fn minimize<O: Objective + ?Sized>(
    obj: &O,
    u0: &[f64],
    lower: &[f64],
    upper: &[f64],
    settings: &MinimizerSettings,
) -> Result<OptimizationReport> {
    let n = obj.dim();
    if u0.len() != n || lower.len() != n || upper.len() != n {
        return Err(SynthError::InvalidDimension(format!(
            "start point, bounds and objective disagree on dimension ({}, {}, {}, {n})",
            u0.len(),
            lower.len(),
            upper.len()
        )));
    }
    if let Some(i) = (0..n).find(|&i| !(lower[i] <= u0[i] && u0[i] <= upper[i])) {
        return Err(SynthError::InvalidInput(format!("start point component {} lies outside its bounds", obj.parameter_name(i))));
    }
    let start = Instant::now();
    let frozen = obj.frozen();

    if settings.budget == 0 {
        let f = obj.value(u0)?;
        return Ok(OptimizationReport {
            initial_goal: f,
            final_goal: f,
            trace: vec![TraceRow { iteration: 0, goal: f, gradient_norm: f64::NAN, evaluations: 1 }],
            final_point: u0.to_vec(),
            gradient_norm: f64::NAN,
            termination: Termination::Budget,
            evaluations: 1,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }

    let mut u = u0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&u)?;
    let mut evaluations = 1;
    let initial_goal = f;
    let mut pg = projected(&g, &u, lower, upper, &frozen);
    let mut trace = vec![TraceRow { iteration: 0, goal: f, gradient_norm: norm(&pg), evaluations }];
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iteration = 0;

    let termination = loop {
        let gnorm = norm(&pg);
        if settings.stop_below.is_some_and(|t| f <= t) {
            break Termination::Target;
        }
        if gnorm < settings.gradient_tol {
            break Termination::GradientNorm;
        }
        if evaluations >= settings.budget {
            break Termination::Budget;
        }

        let mut d = two_loop(&pg, &memory);
        for i in 0..n {
            if pg[i] == 0.0 {
                d[i] = 0.0;
            }
        }
        if memory.is_empty() || dot(&d, &pg) >= 0.0 {
            memory.clear();
            d = pg.iter().map(|x| -x / gnorm.max(1.0)).collect();
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        let mut out_of_budget = false;
        for _ in 0..=settings.max_backtracks {
            if evaluations >= settings.budget {
                out_of_budget = true;
                break;
            }
            let trial: Vec<f64> = (0..n).map(|i| (u[i] + alpha * d[i]).clamp(lower[i], upper[i])).collect();
            let step: Vec<f64> = trial.iter().zip(&u).map(|(a, b)| a - b).collect();
            if step.iter().all(|&s| s == 0.0) {
                break;
            }
            evaluations += 1;
            if let Ok((ft, gt)) = obj.value_and_gradient(&trial) {
                if ft.is_finite() && ft <= f + settings.armijo * dot(&pg, &step) {
                    accepted = Some((trial, ft, gt, step));
                    break;
                }
            }
            alpha *= 0.5;
        }

        let Some((trial, ft, gt, step)) = accepted else {
            if out_of_budget {
                break Termination::Budget;
            }
            if !memory.is_empty() {
                memory.clear();
                continue;
            }
            break Termination::LineSearch;
        };

        let y: Vec<f64> = gt.iter().zip(&g).enumerate().map(|(i, (a, b))| if frozen[i] { 0.0 } else { a - b }).collect();
        let sy = dot(&step, &y);
        if sy > 1e-10 * norm(&step) * norm(&y) {
            memory.push_back((step, y, 1.0 / sy));
            if memory.len() > settings.memory {
                memory.pop_front();
            }
        }
        let change = (f - ft).abs();
        let reference = f.abs().max(ft.abs());
        u = trial;
        f = ft;
        g = gt;
        pg = projected(&g, &u, lower, upper, &frozen);
        iteration += 1;
        trace.push(TraceRow { iteration, goal: f, gradient_norm: norm(&pg), evaluations });
        log::debug!("iteration {iteration}: goal {f:.6e}, |g| {:.3e}, {evaluations} evaluations", norm(&pg));
        if change <= settings.relative_tol * reference {
            break Termination::RelativeChange;
        }
    };

    Ok(OptimizationReport {
        initial_goal,
        final_goal: f,
        gradient_norm: norm(&pg),
        trace,
        final_point: u,
        termination,
        evaluations,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
