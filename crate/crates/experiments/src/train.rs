//! Gradient-descent loop shared by the network experiments.

use fprinciple::loss::{BatchLoss, EnergyLossConfig};
use fprinciple::nn::{shuffled_batches, value_and_grad, InitSpec, LrSchedule, Mlp, OutputActivation};
use fprinciple::rng::GaussianSampler;
use ndarray::{Array2, ArrayView2, Axis};

use crate::config::Config;
use crate::error::{RunError, RunResult};

/// Offset between the initialisation seed and the mini-batch shuffling seed.
const SHUFFLE_STREAM: u64 = 0x005e_ed0f_ba7c;

/// What the network is trained to minimise.
#[derive(Debug, Clone)]
pub enum Objective {
    Mse(Array2<f64>),
    CrossEntropy(Array2<f64>),
    Energy { g: Vec<f64>, config: EnergyLossConfig },
}

impl Objective {
    pub fn loss(&self) -> BatchLoss<'_> {
        match self {
            Objective::Mse(t) => BatchLoss::Mse(t.view()),
            Objective::CrossEntropy(t) => BatchLoss::CrossEntropy(t.view()),
            Objective::Energy { g, config } => BatchLoss::Energy { g, config },
        }
    }

    fn rows(&self, idx: &[usize]) -> RunResult<Objective> {
        match self {
            Objective::Mse(t) => Ok(Objective::Mse(t.select(Axis(0), idx))),
            Objective::CrossEntropy(t) => Ok(Objective::CrossEntropy(t.select(Axis(0), idx))),
            Objective::Energy { .. } => Err(RunError::Config(
                "the energy loss couples grid points and needs full-batch training".into(),
            )),
        }
    }
}

/// A network with its data, objective and optimiser state.
pub struct Trainer {
    pub mlp: Mlp,
    pub xs: Array2<f64>,
    pub objective: Objective,
    schedule: LrSchedule,
    batch_size: usize,
    shuffler: GaussianSampler,
    epochs_per_step: usize,
    epoch: usize,
    step: usize,
}

impl Trainer {
    pub fn new(
        config: &Config,
        xs: Array2<f64>,
        output_dim: usize,
        output: OutputActivation,
        objective: Objective,
    ) -> RunResult<Self> {
        let mut widths = vec![xs.ncols()];
        widths.extend(&config.hidden_widths);
        widths.push(output_dim);
        let mlp = Mlp::new(&widths, config.activation(), output, &InitSpec::new(config.init_std, config.seed))?;
        Ok(Self {
            mlp,
            xs,
            objective,
            schedule: LrSchedule::new(config.lr, config.lr_halve_every as u64)?,
            batch_size: config.batch_size,
            shuffler: GaussianSampler::new(config.seed ^ SHUFFLE_STREAM),
            epochs_per_step: config.epochs_per_step,
            epoch: 0,
            step: 0,
        })
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// One pass over the data. Returns the summed mini-batch losses and, for
    /// full-batch training, the outputs seen before the update.
    fn run_epoch(&mut self) -> RunResult<(f64, Option<Array2<f64>>)> {
        let lr = self.schedule.lr_at(self.epoch as u64);
        let n = self.xs.nrows();
        let batches = shuffled_batches(n, self.batch_size, &mut self.shuffler);
        let mut total = 0.0;
        let mut outputs = None;
        for idx in &batches {
            let eval = if idx.len() == n {
                value_and_grad(&self.mlp, self.xs.view(), &self.objective.loss())?
            } else {
                let xb = self.xs.select(Axis(0), idx);
                let ob = self.objective.rows(idx)?;
                value_and_grad(&self.mlp, xb.view(), &ob.loss())?
            };
            if !eval.loss.is_finite() {
                return Err(self.diverged(format!("loss is {}", eval.loss)));
            }
            total += eval.loss;
            if let Err(e) = self.mlp.sgd_step(&eval.grad, lr) {
                return Err(self.diverged(e.to_string()));
            }
            if batches.len() == 1 {
                outputs = Some(eval.outputs);
            }
        }
        self.epoch += 1;
        Ok((total, outputs))
    }

    fn diverged(&self, detail: String) -> RunError {
        RunError::Diverged {
            step: self.step,
            detail: format!("{detail} (epoch {})", self.epoch),
        }
    }

    /// One training step of `epochs_per_step` epochs. Returns the loss of the
    /// first epoch and the full-batch outputs before any update, when known.
    pub fn train_step(&mut self) -> RunResult<(f64, Option<Array2<f64>>)> {
        let (loss, outputs) = self.run_epoch()?;
        for _ in 1..self.epochs_per_step {
            self.run_epoch()?;
        }
        self.step += 1;
        Ok((loss, outputs))
    }

    /// Outputs and loss on the full data set at the current parameters.
    pub fn evaluate(&self) -> RunResult<(f64, Array2<f64>)> {
        let out = self.mlp.predict(self.xs.view())?;
        let (loss, _) = self.objective.loss().evaluate(out.view())?;
        Ok((loss, out))
    }

    pub fn inputs(&self) -> ArrayView2<'_, f64> {
        self.xs.view()
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive, as an `n × 1` column.
pub fn linspace_column(a: f64, b: f64, n: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, 1), |(j, _)| {
        if j + 1 == n {
            b
        } else {
            a + (b - a) * j as f64 / (n - 1) as f64
        }
    })
}
