use fprinciple::nn::OutputActivation;
use ndarray::Array2;

use super::{train_recording, SpectralOutcome, SpectralTracker};
use crate::config::Config;
use crate::error::RunResult;
use crate::output::RunDir;
use crate::train::{linspace_column, Objective, Trainer};

/// Two-class step target `(1{x ≥ 0}, 1{x ≤ 0})`; both are 1 at `x = 0`.
pub fn target_toy(x: f64) -> (f64, f64) {
    (f64::from(u8::from(x >= 0.0)), f64::from(u8::from(x <= 0.0)))
}

/// Softmax classifier on evenly spaced samples of `[−1, 1]`, tracking the
/// first output against the first target dimension.
pub fn run_toy_ce(config: &Config, out: &mut RunDir) -> RunResult<SpectralOutcome> {
    let xs = linspace_column(-1.0, 1.0, config.samples);
    let targets = Array2::from_shape_fn((config.samples, 2), |(j, d)| {
        let (y1, y2) = target_toy(xs[[j, 0]]);
        if d == 0 { y1 } else { y2 }
    });
    let mut tracker = SpectralTracker::new(config, targets.column(0).to_vec(), None)?;
    let mut trainer = Trainer::new(config, xs, 2, OutputActivation::Softmax, Objective::CrossEntropy(targets))?;
    let final_loss = train_recording(&mut trainer, config, |t, wall, loss, outputs| {
        tracker.record(t.step(), t.epoch(), wall, loss, &outputs.column(0).to_vec())
    })?;
    tracker.finish(config, out, "toy classification, cross entropy", final_loss)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_values() {
        assert_eq!(target_toy(0.5), (1.0, 0.0));
        assert_eq!(target_toy(-0.5), (0.0, 1.0));
        assert_eq!(target_toy(0.0), (1.0, 1.0));
    }
}
