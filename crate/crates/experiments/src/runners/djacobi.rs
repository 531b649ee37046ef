use fprinciple::poisson::{iterate, run_hybrid, DnnSolver, HybridConfig, HybridReport, IterateOptions, Method, SwitchRule};
use serde_json::{json, Value};

use super::poisson::{energy_trainer, problem};
use super::step_or_none;
use crate::config::Config;
use crate::error::{RunError, RunResult};
use crate::output::{line_chart_svg, RunDir, Series};
use crate::train::Trainer;

/// Trains for real and keeps the loss and grid values of every step, so
/// later switches can be replayed without retraining.
struct LiveSolver {
    trainer: Trainer,
    /// `values[s]` are the grid values after `s` steps.
    values: Vec<Vec<f64>>,
    losses: Vec<f64>,
}

impl LiveSolver {
    fn store_current(&mut self) -> RunResult<()> {
        if self.values.len() == self.trainer.step() {
            let (_, out) = self.trainer.evaluate()?;
            self.values.push(out.column(0).to_vec());
        }
        Ok(())
    }
}

fn to_core(e: RunError) -> fprinciple::Error {
    match e {
        RunError::Core(e) => e,
        other => fprinciple::Error::NonFinite(other.to_string()),
    }
}

impl DnnSolver for LiveSolver {
    fn train_step(&mut self) -> fprinciple::Result<f64> {
        let step = self.trainer.step();
        let (loss, outputs) = self.trainer.train_step().map_err(to_core)?;
        if self.values.len() == step {
            if let Some(out) = outputs {
                self.values.push(out.column(0).to_vec());
            }
        }
        self.losses.push(loss);
        Ok(loss)
    }

    fn grid_values(&self) -> fprinciple::Result<Vec<f64>> {
        match self.values.get(self.trainer.step()) {
            Some(v) => Ok(v.clone()),
            None => Ok(self.trainer.evaluate().map_err(to_core)?.1.column(0).to_vec()),
        }
    }
}

/// Plays back a recorded training run.
struct ReplaySolver<'a> {
    values: &'a [Vec<f64>],
    losses: &'a [f64],
    step: usize,
}

impl DnnSolver for ReplaySolver<'_> {
    fn train_step(&mut self) -> fprinciple::Result<f64> {
        let loss = *self.losses.get(self.step).ok_or_else(|| {
            fprinciple::Error::InvalidArgument(format!("no recorded step {}", self.step))
        })?;
        self.step += 1;
        Ok(loss)
    }

    fn grid_values(&self) -> fprinciple::Result<Vec<f64>> {
        self.values
            .get(self.step)
            .cloned()
            .ok_or_else(|| fprinciple::Error::InvalidArgument(format!("no recorded values at step {}", self.step)))
    }
}

#[derive(Debug, Clone)]
pub struct SwitchOutcome {
    pub method: Method,
    pub fraction: f64,
    pub switch_step: usize,
    pub switch_sup_error: f64,
    /// Sweeps after the switch to reach the target, if reached.
    pub post_iters: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct DJacobiOutcome {
    pub plateau_step: usize,
    pub plateau_detected: bool,
    pub target_eps: f64,
    pub u_star_sup_norm: f64,
    pub switches: Vec<SwitchOutcome>,
    /// Sweeps from the zero vector, per method.
    pub cold: Vec<(Method, Option<usize>)>,
}

impl DJacobiOutcome {
    pub fn switch(&self, method: Method, fraction: f64) -> Option<&SwitchOutcome> {
        self.switches.iter().find(|s| s.method == method && s.fraction == fraction)
    }

    pub fn cold(&self, method: Method) -> Option<usize> {
        self.cold.iter().find(|c| c.0 == method).and_then(|c| c.1)
    }

    pub fn metrics(&self) -> Value {
        json!({
            "plateau_step": self.plateau_step,
            "plateau_detected": self.plateau_detected,
            "target_eps": self.target_eps,
            "u_star_sup_norm": self.u_star_sup_norm,
            "switches": self.switches.iter().map(|s| json!({
                "method": s.method.to_string(),
                "fraction": s.fraction,
                "switch_step": s.switch_step,
                "switch_sup_error": s.switch_sup_error,
                "post_switch_iters": step_or_none(s.post_iters),
            })).collect::<Vec<_>>(),
            "cold_start": self.cold.iter().map(|(m, i)| json!({
                "method": m.to_string(),
                "iters": step_or_none(*i),
            })).collect::<Vec<_>>(),
        })
    }
}

fn hybrid_series(report: &HybridReport, label: String) -> Series {
    let offset = report.switch_step as f64;
    Series {
        label,
        points: report
            .records
            .iter()
            .map(|r| {
                let x = if r.phase == "dnn" { r.step_or_iter as f64 } else { offset + r.step_or_iter as f64 };
                (x, r.sup_error)
            })
            .collect(),
    }
}

/// Trains on the energy loss until the loss plateaus, then replays switches
/// to the iterative solvers at fractions of the plateau step, next to a
/// start from zero.
pub fn run_d_jacobi(config: &Config, out: &mut RunDir) -> RunResult<DJacobiOutcome> {
    let (system, reference) = problem(config)?;
    let target_eps = config.eps_rel * reference.sup_norm();
    let methods = config.post_methods();
    let hybrid_config = |switch, method| HybridConfig {
        switch,
        method,
        target_eps,
        max_iters: config.max_iters,
        record_every: config.record_every,
        wall_clock: config.wall_clock,
    };

    let mut live = LiveSolver {
        trainer: energy_trainer(config, system.grid())?,
        values: Vec::new(),
        losses: Vec::new(),
    };
    let plateau_rule = SwitchRule::Plateau {
        window: config.plateau_window,
        rel_tol: config.plateau_delta,
        max_steps: config.steps(),
    };
    let first_method = methods.first().copied().unwrap_or(Method::Jacobi);
    let plateau = run_hybrid(&system, &reference, &mut live, &hybrid_config(plateau_rule, first_method))?;
    let p = plateau.switch_step;

    let steps: Vec<usize> = config
        .switch_fractions
        .iter()
        .map(|f| (f * p as f64).round() as usize)
        .collect();
    let last = steps.iter().copied().max().unwrap_or(0);
    live.store_current()?;
    while live.trainer.step() < last {
        live.train_step().map_err(RunError::from)?;
        live.store_current()?;
    }
    live.store_current()?;
    let rows: Vec<Vec<f64>> = live.losses.iter().enumerate().map(|(s, l)| vec![s as f64, *l]).collect();
    out.write_table("loss.csv", &["step", "loss"], &rows)?;

    let mut switches = Vec::new();
    let mut cold = Vec::new();
    for &method in &methods {
        let mut series = Vec::new();
        for (&fraction, &step) in config.switch_fractions.iter().zip(&steps) {
            let mut replay = ReplaySolver {
                values: &live.values,
                losses: &live.losses,
                step: 0,
            };
            let report = run_hybrid(&system, &reference, &mut replay, &hybrid_config(SwitchRule::AtStep(step), method))?;
            out.write(&format!("hybrid_{method}_f{fraction}.csv"), |w| report.write_csv(w))?;
            series.push(hybrid_series(&report, format!("switch {fraction} P")));
            switches.push(SwitchOutcome {
                method,
                fraction,
                switch_step: step,
                switch_sup_error: report.switch_sup_error,
                post_iters: report.post_switch_iters,
            });
        }

        let mut opts = IterateOptions::new(method, config.max_iters, target_eps);
        opts.record_every = config.record_every;
        opts.wall_clock = config.wall_clock;
        let zero = vec![0.0; reference.interior.len()];
        let run = iterate(&system, &zero, &reference.interior, &opts)?;
        out.write(&format!("cold_{method}.csv"), |w| run.write_csv(w))?;
        series.push(Series {
            label: "from zero".into(),
            points: run.records.iter().map(|r| (r.iteration as f64, r.sup_error)).collect(),
        });
        cold.push((method, run.converged_at));

        if config.svg {
            out.write_str(
                &format!("hybrid_{method}.svg"),
                &line_chart_svg(&format!("network warm start, {method}"), "step / iteration", "sup error", &series),
            )?;
        }
    }

    Ok(DJacobiOutcome {
        plateau_step: p,
        plateau_detected: plateau.plateau_detected,
        target_eps,
        u_star_sup_norm: reference.sup_norm(),
        switches,
        cold,
    })
}
