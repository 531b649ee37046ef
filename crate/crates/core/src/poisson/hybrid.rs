//! Network-then-iterative hybrid: train a network on the energy loss, then
//! hand its grid values to Jacobi or Gauss–Seidel as the initial iterate.

use std::collections::VecDeque;
use std::io::Write;
use std::time::Instant;

use super::{iterate, IterateOptions, IterativeRun, Method, ReferenceSolution, TridiagSystem};
use crate::csvfmt::fmt17;
use crate::{Error, Result};

/// A network being trained to solve the Poisson problem on a fixed grid.
pub trait DnnSolver {
    /// Performs one training step and returns the loss evaluated before the
    /// parameter update.
    fn train_step(&mut self) -> Result<f64>;

    /// Current network values at every grid point `x_0 .. x_n`.
    fn grid_values(&self) -> Result<Vec<f64>>;
}

/// When to stop training and start iterating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwitchRule {
    /// After exactly this many training steps.
    AtStep(usize),
    /// When the loss has flattened: the mean of the last `window` losses
    /// differs from the mean of the `window` before it by less than
    /// `rel_tol` relative. Gives up and switches at `max_steps`.
    Plateau {
        window: usize,
        rel_tol: f64,
        max_steps: usize,
    },
}

#[derive(Debug, Clone)]
pub struct HybridConfig {
    pub switch: SwitchRule,
    pub method: Method,
    /// Phase 2 stops once `‖u − u*‖_∞ ≤ target_eps`.
    pub target_eps: f64,
    pub max_iters: usize,
    /// Phase-1 sup-errors are recorded every this many training steps.
    pub record_every: usize,
    pub wall_clock: bool,
}

impl HybridConfig {
    fn validate(&self) -> Result<()> {
        if !(self.target_eps > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "target tolerance must be positive, got {}",
                self.target_eps
            )));
        }
        if let SwitchRule::Plateau { window, rel_tol, .. } = self.switch {
            if window < 2 || !(rel_tol > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "plateau rule needs window >= 2 and positive tolerance, got {window} and {rel_tol}"
                )));
            }
        }
        Ok(())
    }
}

/// Moving-average plateau test on a stream of loss values.
#[derive(Debug, Clone)]
pub struct PlateauDetector {
    window: usize,
    rel_tol: f64,
    recent: VecDeque<f64>,
}

impl PlateauDetector {
    pub fn new(window: usize, rel_tol: f64) -> Self {
        Self {
            window,
            rel_tol,
            recent: VecDeque::with_capacity(2 * window),
        }
    }

    /// Adds a loss value; returns true once the two most recent windows have
    /// means within `rel_tol` of each other.
    pub fn push(&mut self, loss: f64) -> bool {
        if self.recent.len() == 2 * self.window {
            self.recent.pop_front();
        }
        self.recent.push_back(loss);
        if self.recent.len() < 2 * self.window {
            return false;
        }
        let w = self.window as f64;
        let older = self.recent.iter().take(self.window).sum::<f64>() / w;
        let newer = self.recent.iter().skip(self.window).sum::<f64>() / w;
        (newer - older).abs() < self.rel_tol * older.abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridRecord {
    /// `dnn` for training steps, otherwise the iterative method name.
    pub phase: String,
    pub step_or_iter: usize,
    pub cum_wall_ms: f64,
    pub sup_error: f64,
}

#[derive(Debug, Clone)]
pub struct HybridReport {
    pub switch_step: usize,
    pub plateau_detected: bool,
    /// Loss at every training step.
    pub losses: Vec<f64>,
    /// `‖Υ − u*‖_∞` on the grid at the switch.
    pub switch_sup_error: f64,
    pub records: Vec<HybridRecord>,
    pub iterative: IterativeRun,
    /// Sweeps needed after the switch to reach the target, if reached.
    pub post_switch_iters: Option<usize>,
    pub dnn_wall_ms: f64,
    pub iterative_wall_ms: f64,
}

impl HybridReport {
    /// Header `phase,step_or_iter,cum_wall_ms,sup_error`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "phase,step_or_iter,cum_wall_ms,sup_error")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{}",
                r.phase,
                r.step_or_iter,
                fmt17(r.cum_wall_ms),
                fmt17(r.sup_error)
            )?;
        }
        Ok(())
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Phase 1 trains `dnn` until the switch rule fires; phase 2 iterates from
/// the interior network values (boundary values dropped, since the
/// iteration holds them at zero) until `target_eps` or `max_iters`.
pub fn run_hybrid(
    system: &TridiagSystem,
    reference: &ReferenceSolution,
    dnn: &mut dyn DnnSolver,
    cfg: &HybridConfig,
) -> Result<HybridReport> {
    cfg.validate()?;
    let start = Instant::now();
    let elapsed_ms = |on: bool| {
        if on {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    };
    let every = cfg.record_every.max(1);
    let mut records = Vec::new();
    let mut losses = Vec::new();
    let mut detector = match cfg.switch {
        SwitchRule::Plateau { window, rel_tol, .. } => Some(PlateauDetector::new(window, rel_tol)),
        SwitchRule::AtStep(_) => None,
    };
    let budget = match cfg.switch {
        SwitchRule::AtStep(m) => m,
        SwitchRule::Plateau { max_steps, .. } => max_steps,
    };

    let mut step = 0;
    let mut plateau_detected = false;
    let mut values = dnn.grid_values()?;
    records.push(HybridRecord {
        phase: "dnn".into(),
        step_or_iter: 0,
        cum_wall_ms: elapsed_ms(cfg.wall_clock),
        sup_error: sup_distance(&values, &reference.full),
    });
    while step < budget {
        let loss = dnn.train_step()?;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("training loss at step {step}")));
        }
        losses.push(loss);
        step += 1;
        let flat = detector.as_mut().is_some_and(|d| d.push(loss));
        if flat || step == budget || step % every == 0 {
            values = dnn.grid_values()?;
            records.push(HybridRecord {
                phase: "dnn".into(),
                step_or_iter: step,
                cum_wall_ms: elapsed_ms(cfg.wall_clock),
                sup_error: sup_distance(&values, &reference.full),
            });
        }
        if flat {
            plateau_detected = true;
            break;
        }
    }
    if records.last().map(|r| r.step_or_iter) != Some(step) || step == 0 {
        values = dnn.grid_values()?;
    }
    let dnn_wall_ms = elapsed_ms(true);
    let n = system.n();
    if values.len() != n + 1 {
        return Err(Error::Shape(format!(
            "network returned {} grid values, expected {}",
            values.len(),
            n + 1
        )));
    }
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!(
            "network output at grid point {bad} is {} at switch step {step}",
            values[bad]
        )));
    }
    let switch_sup_error = sup_distance(&values, &reference.full);

    let mut opts = IterateOptions::new(cfg.method, cfg.max_iters, cfg.target_eps);
    opts.wall_clock = cfg.wall_clock;
    let phase2_start = Instant::now();
    let iterative = iterate(system, &values[1..n], &reference.interior, &opts)?;
    let iterative_wall_ms = phase2_start.elapsed().as_secs_f64() * 1e3;
    let offset = if cfg.wall_clock { dnn_wall_ms } else { 0.0 };
    let method = cfg.method.to_string();
    records.extend(iterative.records.iter().map(|r| HybridRecord {
        phase: method.clone(),
        step_or_iter: r.iteration,
        cum_wall_ms: offset + r.wall_ms,
        sup_error: r.sup_error,
    }));

    Ok(HybridReport {
        switch_step: step,
        plateau_detected,
        losses,
        switch_sup_error,
        records,
        post_switch_iters: iterative.converged_at,
        iterative,
        dnn_wall_ms,
        iterative_wall_ms,
    })
}
