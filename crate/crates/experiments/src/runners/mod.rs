//! One function per experiment, plus the machinery they share.

mod diagnose;
mod djacobi;
mod images;
mod poisson;
mod toy;

use std::path::PathBuf;
use std::time::Instant;

use fprinciple::spectral::{dft_uniform, nufft_direct, pick_peaks, rel_freq_diff, Denominator, FreqTrace, Spectrum, TraceRow};
use ndarray::Array2;
use serde_json::{json, Value};

use crate::config::{Config, Experiment};
use crate::error::{RunError, RunResult};
use crate::output::{line_chart_svg, RunDir, Series};
use crate::train::Trainer;

pub use diagnose::{run_diagnose_grad, DiagnoseCase, DiagnoseOutcome};
pub use djacobi::{run_d_jacobi, DJacobiOutcome, SwitchOutcome};
pub use images::{run_mnist_pca, ImagesOutcome};
pub use poisson::{run_poisson_direct, run_poisson_dnn, run_poisson_jacobi, DirectOutcome, JacobiOutcome, PoissonDnnOutcome};
pub use toy::{run_toy_ce, target_toy};

/// Result of a run, by experiment.
#[derive(Debug, Clone)]
pub enum Outcome {
    ToyCe(SpectralOutcome),
    MnistPca(ImagesOutcome),
    PoissonDirect(DirectOutcome),
    PoissonJacobi(JacobiOutcome),
    PoissonDnn(PoissonDnnOutcome),
    DJacobi(DJacobiOutcome),
    DiagnoseGrad(DiagnoseOutcome),
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub seed: u64,
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub outcome: Outcome,
}

/// Runs every seed of `config`, each in `out_dir/<experiment>/seed_<seed>`.
pub fn run(config: &Config) -> RunResult<Vec<RunOutput>> {
    config.validate()?;
    (0..config.seeds as u64)
        .map(|i| {
            let seeded = config.with_seed(config.seed + i);
            let dir = PathBuf::from(&config.out_dir)
                .join(config.experiment.name())
                .join(format!("seed_{}", seeded.seed));
            run_seed(&seeded, dir)
        })
        .collect()
}

/// Runs one seed into `dir`, writing the resolved config and a JSON report
/// next to the experiment's own files.
pub fn run_seed(config: &Config, dir: impl Into<PathBuf>) -> RunResult<RunOutput> {
    config.validate()?;
    let mut out = RunDir::create(dir)?;
    out.write_str("config.toml", &config.to_toml())?;
    let start = Instant::now();
    let (outcome, metrics) = match config.experiment {
        Experiment::ToyCe => {
            let o = run_toy_ce(config, &mut out)?;
            let m = o.metrics();
            (Outcome::ToyCe(o), m)
        }
        Experiment::MnistPca => {
            let o = run_mnist_pca(config, &mut out)?;
            let m = o.metrics();
            (Outcome::MnistPca(o), m)
        }
        Experiment::PoissonDirect => {
            let o = run_poisson_direct(config, &mut out)?;
            let m = o.metrics();
            (Outcome::PoissonDirect(o), m)
        }
        Experiment::PoissonJacobi => {
            let o = run_poisson_jacobi(config, &mut out)?;
            let m = o.metrics();
            (Outcome::PoissonJacobi(o), m)
        }
        Experiment::PoissonDnn => {
            let o = run_poisson_dnn(config, &mut out)?;
            let m = o.metrics();
            (Outcome::PoissonDnn(o), m)
        }
        Experiment::DJacobi => {
            let o = run_d_jacobi(config, &mut out)?;
            let m = o.metrics();
            (Outcome::DJacobi(o), m)
        }
        Experiment::DiagnoseGrad => {
            let o = run_diagnose_grad(config, &mut out)?;
            let m = o.metrics();
            (Outcome::DiagnoseGrad(o), m)
        }
    };
    let mut files = out.relative_files();
    files.push("report.json".into());
    let report = json!({
        "experiment": config.experiment.name(),
        "seed": config.seed,
        "config": "config.toml",
        "files": files,
        "metrics": metrics,
        "wall_ms": start.elapsed().as_secs_f64() * 1e3,
    });
    out.write_str("report.json", &serde_json::to_string_pretty(&report).expect("json"))?;
    Ok(RunOutput {
        seed: config.seed,
        dir: out.path.clone(),
        files: out.files,
        outcome,
    })
}

/// `None` serialises as the string `none`.
fn step_or_none(s: Option<usize>) -> Value {
    s.map_or(Value::from("none"), Value::from)
}

/// Δ_F history at the peaks of a fixed target, plus per-record spectra.
#[derive(Debug, Clone)]
pub struct SpectralOutcome {
    pub trace: FreqTrace,
    /// `|F[target](γ)|` at each selected peak.
    pub peak_amplitudes: Vec<f64>,
    /// First recording step with `Δ_F ≤ τ`, per peak.
    pub first_passage: Vec<(usize, Option<usize>)>,
    pub final_loss: f64,
}

impl SpectralOutcome {
    pub fn metrics(&self) -> Value {
        json!({
            "peaks": self.trace.selected_peaks(),
            "peak_amplitudes": self.peak_amplitudes,
            "final_loss": self.final_loss,
            "first_passage": self.first_passage.iter()
                .map(|(g, s)| json!({"gamma": g, "step": step_or_none(*s)}))
                .collect::<Vec<_>>(),
        })
    }

    /// Whether first-passage steps never decrease with frequency. A peak
    /// that never passes counts as passing after every recorded step.
    pub fn passage_ordered(&self) -> bool {
        let key = |s: Option<usize>| s.unwrap_or(usize::MAX);
        self.first_passage.windows(2).all(|w| key(w[0].1) <= key(w[1].1))
    }
}

/// Computes model spectra on the target's sample set and records Δ_F.
pub(crate) struct SpectralTracker {
    /// Non-uniform nodes in `[0, 1]`; `None` for uniform samples.
    points: Option<Vec<f64>>,
    k: usize,
    target: Vec<f64>,
    target_spec: Spectrum,
    denominator: Denominator,
    tau: f64,
    trace: FreqTrace,
    spectra: Vec<Vec<f64>>,
}

impl SpectralTracker {
    pub fn new(config: &Config, target: Vec<f64>, points: Option<Vec<f64>>) -> RunResult<Self> {
        let k = if points.is_some() { config.nufft_k } else { target.len() };
        let target_spec = transform(points.as_deref(), &target, k)?;
        let peaks = pick_peaks(&target_spec, config.max_peaks, config.min_rel_amplitude);
        Ok(Self {
            points,
            k,
            target,
            target_spec,
            denominator: config.denominator(),
            tau: config.tau,
            trace: FreqTrace::new(peaks),
            spectra: Vec::new(),
        })
    }

    pub fn peaks(&self) -> &[usize] {
        self.trace.selected_peaks()
    }

    pub fn record(&mut self, step: usize, epoch: usize, wall_ms: f64, loss: f64, model: &[f64]) -> RunResult<()> {
        let model_spec = transform(self.points.as_deref(), model, self.k)?;
        let deltas = self
            .trace
            .selected_peaks()
            .iter()
            .map(|&g| rel_freq_diff(&model_spec, &self.target_spec, g, self.denominator))
            .collect::<Result<Vec<_>, _>>()?;
        self.trace.push(TraceRow {
            step,
            epoch,
            wall_ms,
            loss,
            deltas,
        })?;
        // The target spectrum is recomputed here so the output shows it is
        // unaffected by training.
        let target_spec = transform(self.points.as_deref(), &self.target, self.k)?;
        let (t, m) = (target_spec.amplitudes(), model_spec.amplitudes());
        for g in 0..=self.k / 2 {
            self.spectra.push(vec![step as f64, g as f64, t[g], m[g]]);
        }
        Ok(())
    }

    pub fn finish(self, config: &Config, out: &mut RunDir, title: &str, final_loss: f64) -> RunResult<SpectralOutcome> {
        out.write("trace.csv", |w| self.trace.write_csv(w))?;
        out.write_table("spectra.csv", &["step", "gamma", "target_amp", "model_amp"], &self.spectra)?;
        let amplitudes = self.target_spec.amplitudes();
        let peak_amplitudes: Vec<f64> = self.peaks().iter().map(|&g| amplitudes[g]).collect();
        let first_passage = self
            .peaks()
            .iter()
            .map(|&g| Ok((g, self.trace.step_to_threshold(g, self.tau)?)))
            .collect::<RunResult<Vec<_>>>()?;
        out.write("first_passage.csv", |w| {
            writeln!(w, "gamma,target_amp,first_step")?;
            for ((g, s), a) in first_passage.iter().zip(&peak_amplitudes) {
                let s = s.map_or("none".to_string(), |s| s.to_string());
                writeln!(w, "{g},{},{s}", fprinciple::csvfmt::fmt17(*a))?;
            }
            Ok(())
        })?;
        if config.svg {
            let series: Vec<Series> = self
                .peaks()
                .iter()
                .map(|&g| {
                    let col = self.trace.column(g).expect("tracked");
                    Series {
                        label: format!("γ = {g}"),
                        points: self.trace.rows().iter().zip(col).map(|(r, d)| (r.step as f64, d)).collect(),
                    }
                })
                .collect();
            out.write_str("trace.svg", &line_chart_svg(title, "recording step", "relative difference", &series))?;
        }
        Ok(SpectralOutcome {
            trace: self.trace,
            peak_amplitudes,
            first_passage,
            final_loss,
        })
    }
}

fn transform(points: Option<&[f64]>, values: &[f64], k: usize) -> RunResult<Spectrum> {
    Ok(match points {
        Some(p) => nufft_direct(p, values, k)?,
        None => dft_uniform(values)?,
    })
}

/// Trains for `config.steps()` steps, calling `record` with the full-data
/// loss and outputs at step 0, every `record_every` steps, and at the end.
/// Returns the final full-data loss.
pub(crate) fn train_recording<F>(trainer: &mut Trainer, config: &Config, mut record: F) -> RunResult<f64>
where
    F: FnMut(&Trainer, f64, f64, &Array2<f64>) -> RunResult<()>,
{
    let start = Instant::now();
    let wall = || {
        if config.wall_clock {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    };
    let steps = config.steps();
    let (mut loss, out) = trainer.evaluate()?;
    record(trainer, wall(), loss, &out)?;
    for s in 1..=steps {
        trainer.train_step()?;
        if s % config.record_every == 0 || s == steps {
            let (l, out) = trainer.evaluate()?;
            if !l.is_finite() {
                return Err(RunError::Diverged {
                    step: s,
                    detail: format!("loss is {l}"),
                });
            }
            loss = l;
            record(trainer, wall(), loss, &out)?;
        }
    }
    Ok(loss)
}
