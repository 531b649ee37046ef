use fprinciple::loss::EnergyLossConfig;
use fprinciple::nn::OutputActivation;
use fprinciple::poisson::{
    assemble_poisson, g_rhs, halving_count, iterate, jacobi_eigen, Grid1D, IterateOptions, IterativeRun, ReferenceSolution,
    TridiagSystem, G_RHS_FORMULA,
};
use fprinciple::spectral::{dft_uniform, pick_peaks};
use fprinciple::rng::GaussianSampler;
use ndarray::Array2;
use serde_json::{json, Value};

use super::{step_or_none, train_recording, SpectralOutcome, SpectralTracker};
use crate::config::Config;
use crate::error::RunResult;
use crate::output::{line_chart_svg, RunDir, Series};
use crate::train::{Objective, Trainer};

pub(crate) fn problem(config: &Config) -> RunResult<(TridiagSystem, ReferenceSolution)> {
    let grid = Grid1D::symmetric(config.grid_n)?;
    let system = assemble_poisson(&grid, g_rhs)?;
    let reference = fprinciple::poisson::thomas_solve(&system)?;
    Ok((system, reference))
}

/// Energy-loss objective on every grid point, with the grid as inputs.
pub(crate) fn energy_trainer(config: &Config, grid: &Grid1D) -> RunResult<Trainer> {
    let points: Vec<f64> = grid.points().collect();
    let xs = Array2::from_shape_vec((points.len(), 1), points.clone()).expect("column");
    let objective = Objective::Energy {
        g: points.iter().map(|&x| g_rhs(x)).collect(),
        config: EnergyLossConfig::new(config.beta, grid.clone())?,
    };
    Trainer::new(config, xs, 1, OutputActivation::Identity, objective)
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[derive(Debug, Clone)]
pub struct DirectOutcome {
    pub n: usize,
    /// `‖A u* − rhs‖_∞ / ‖rhs‖_∞`.
    pub relative_residual: f64,
    pub sup_norm: f64,
}

impl DirectOutcome {
    pub fn metrics(&self) -> Value {
        json!({
            "n": self.n,
            "rhs": G_RHS_FORMULA,
            "relative_residual": self.relative_residual,
            "u_star_sup_norm": self.sup_norm,
        })
    }
}

pub fn run_poisson_direct(config: &Config, out: &mut RunDir) -> RunResult<DirectOutcome> {
    let (system, reference) = problem(config)?;
    let rhs_norm = system.rhs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let relative_residual = system.residual_sup(&reference.interior)? / rhs_norm;
    let rows: Vec<Vec<f64>> = system
        .grid()
        .points()
        .zip(&reference.full)
        .map(|(x, u)| vec![x, *u])
        .collect();
    out.write_table("solution.csv", &["x", "u_star"], &rows)?;
    Ok(DirectOutcome {
        n: config.grid_n,
        relative_residual,
        sup_norm: reference.sup_norm(),
    })
}

#[derive(Debug, Clone)]
pub struct JacobiOutcome {
    pub run: IterativeRun,
    /// `(k, λ_k, closed-form halving count, first recorded halving)`.
    pub halving: Vec<(usize, f64, usize, Option<usize>)>,
}

impl JacobiOutcome {
    pub fn metrics(&self) -> Value {
        json!({
            "method": self.run.method.to_string(),
            "iterations": self.run.iterations(),
            "converged_at": step_or_none(self.run.converged_at),
            "final_sup_error": self.run.final_sup_error(),
            "halving": self.halving.iter()
                .map(|(k, l, c, e)| json!({"k": k, "lambda": l, "closed_form": c, "empirical": step_or_none(*e)}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Sine modes matching the spectral peaks of `u*`. Mode `k` spans `k/2`
/// periods of the interval, so peak `γ` maps to `k = 2γ`.
fn modes_near_peaks(config: &Config, reference: &ReferenceSolution) -> RunResult<Vec<usize>> {
    let spectrum = dft_uniform(&reference.full)?;
    let mut modes: Vec<usize> = pick_peaks(&spectrum, config.max_peaks, config.min_rel_amplitude)
        .into_iter()
        .map(|g| 2 * g)
        .filter(|&k| k >= 1 && k < config.grid_n)
        .collect();
    modes.dedup();
    Ok(modes)
}

/// Iterates from zero or from `u*` plus Gaussian noise and traces the sine
/// mode amplitudes of the error.
pub fn run_poisson_jacobi(config: &Config, out: &mut RunDir) -> RunResult<JacobiOutcome> {
    let (system, reference) = problem(config)?;
    let u0: Vec<f64> = match config.jacobi_init.as_str() {
        "zero" => vec![0.0; reference.interior.len()],
        _ => {
            let mut rng = GaussianSampler::new(config.seed);
            reference.interior.iter().map(|u| u + rng.standard()).collect()
        }
    };
    let modes = if config.track_modes.is_empty() {
        modes_near_peaks(config, &reference)?
    } else {
        config.track_modes.clone()
    };
    let mut opts = IterateOptions::new(config.iter_method(), config.max_iters, config.iter_tol);
    opts.track_modes = modes.clone();
    opts.record_every = config.record_every;
    opts.wall_clock = config.wall_clock;
    let run = iterate(&system, &u0, &reference.interior, &opts)?;
    out.write("iterations.csv", |w| run.write_csv(w))?;

    let halving = modes
        .iter()
        .map(|&k| {
            Ok((
                k,
                jacobi_eigen(config.grid_n, k)?,
                halving_count(config.grid_n, k)?,
                run.first_halving(k),
            ))
        })
        .collect::<RunResult<Vec<_>>>()?;
    out.write("halving.csv", |w| {
        writeln!(w, "k,lambda,closed_form,empirical")?;
        for (k, l, c, e) in &halving {
            let e = e.map_or("none".to_string(), |e| e.to_string());
            writeln!(w, "{k},{},{c},{e}", fprinciple::csvfmt::fmt17(*l))?;
        }
        Ok(())
    })?;
    if config.svg {
        let series: Vec<Series> = run
            .tracked_modes
            .iter()
            .enumerate()
            .map(|(c, k)| Series {
                label: format!("k = {k}"),
                points: run.records.iter().map(|r| (r.iteration as f64, r.alphas[c].abs())).collect(),
            })
            .collect();
        out.write_str("iterations.svg", &line_chart_svg("mode amplitudes", "iteration", "|alpha_k|", &series))?;
    }
    Ok(JacobiOutcome { run, halving })
}

#[derive(Debug, Clone)]
pub struct PoissonDnnOutcome {
    pub spectral: SpectralOutcome,
    /// `(step, ‖Υ − u*‖_∞)` at every recording.
    pub sup_errors: Vec<(usize, f64)>,
    pub u_star_sup_norm: f64,
}

impl PoissonDnnOutcome {
    pub fn final_sup_error(&self) -> f64 {
        self.sup_errors.last().map_or(f64::NAN, |e| e.1)
    }

    pub fn metrics(&self) -> Value {
        json!({
            "spectral": self.spectral.metrics(),
            "final_sup_error": self.final_sup_error(),
            "u_star_sup_norm": self.u_star_sup_norm,
        })
    }
}

/// Trains a scalar network on the energy loss over the grid and compares it
/// with the direct solution in the frequency domain.
pub fn run_poisson_dnn(config: &Config, out: &mut RunDir) -> RunResult<PoissonDnnOutcome> {
    let (system, reference) = problem(config)?;
    let mut trainer = energy_trainer(config, system.grid())?;
    let mut tracker = SpectralTracker::new(config, reference.full.clone(), None)?;
    let mut sup_errors = Vec::new();
    let mut last = Vec::new();
    let final_loss = train_recording(&mut trainer, config, |t, wall, loss, outputs| {
        let values = outputs.column(0).to_vec();
        sup_errors.push((t.step(), sup_distance(&values, &reference.full)));
        tracker.record(t.step(), t.epoch(), wall, loss, &values)?;
        last = values;
        Ok(())
    })?;
    let spectral = tracker.finish(config, out, "Poisson, energy loss", final_loss)?;
    let rows: Vec<Vec<f64>> = sup_errors.iter().map(|&(s, e)| vec![s as f64, e]).collect();
    out.write_table("sup_error.csv", &["step", "sup_error"], &rows)?;
    let rows: Vec<Vec<f64>> = system
        .grid()
        .points()
        .zip(reference.full.iter().zip(&last))
        .map(|(x, (u, v))| vec![x, *u, *v])
        .collect();
    out.write_table("solution.csv", &["x", "u_star", "u_dnn"], &rows)?;
    Ok(PoissonDnnOutcome {
        spectral,
        sup_errors,
        u_star_sup_norm: reference.sup_norm(),
    })
}
