use fprinciple::data::{read_idx_file, two_blobs, ImageSet, PcaProjection, PowerIterOptions};
use fprinciple::nn::OutputActivation;
use ndarray::Array2;
use serde_json::{json, Value};

use super::{train_recording, SpectralOutcome, SpectralTracker};
use crate::config::Config;
use crate::error::{RunError, RunResult};
use crate::output::RunDir;
use crate::train::{Objective, Trainer};

const MNIST_PIXELS: usize = 784;

#[derive(Debug, Clone)]
pub struct ImagesOutcome {
    pub spectral: SpectralOutcome,
    pub synthetic: bool,
    pub images: usize,
}

impl ImagesOutcome {
    pub fn metrics(&self) -> Value {
        json!({
            "synthetic": self.synthetic,
            "images": self.images,
            "spectral": self.spectral.metrics(),
        })
    }
}

fn load(config: &Config) -> RunResult<ImageSet> {
    if config.synthetic {
        return Ok(two_blobs(config.samples, MNIST_PIXELS, config.seed));
    }
    let images = read_idx_file(&config.mnist_images).map_err(|e| match e {
        fprinciple::Error::Io(source) => RunError::Io {
            path: config.mnist_images.clone().into(),
            source,
        },
        other => other.into(),
    })?;
    let labels = read_idx_file(&config.mnist_labels).map_err(|e| match e {
        fprinciple::Error::Io(source) => RunError::Io {
            path: config.mnist_labels.clone().into(),
            source,
        },
        other => other.into(),
    })?;
    let mut set = ImageSet::from_idx(&images, &labels)?;
    set.truncate(config.samples);
    Ok(set)
}

/// Projects the images onto their first principal direction, rescaled to
/// `[0, 1]`, and trains a 10-way softmax classifier on that scalar. The
/// first output is compared with the first one-hot column through the
/// non-uniform transform over the projected points.
pub fn run_mnist_pca(config: &Config, out: &mut RunDir) -> RunResult<ImagesOutcome> {
    let set = load(config)?;
    let pca = PcaProjection::fit(
        set.images.view(),
        PowerIterOptions {
            seed: config.seed,
            ..Default::default()
        },
    )?;
    let n = set.len();
    let onehot = set.onehot();
    out.write("dataset.csv", |w| {
        write!(w, "x,label")?;
        for d in 0..10 {
            write!(w, ",y{d}")?;
        }
        writeln!(w)?;
        for (i, x) in pca.x.iter().enumerate() {
            write!(w, "{},{}", fprinciple::csvfmt::fmt17(*x), set.labels[i])?;
            for d in 0..10 {
                write!(w, ",{}", onehot[[d, i]])?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;

    let xs = Array2::from_shape_vec((n, 1), pca.x.clone()).expect("n scalars");
    let targets = onehot.t().to_owned();
    let mut tracker = SpectralTracker::new(config, targets.column(0).to_vec(), Some(pca.x.clone()))?;
    let mut trainer = Trainer::new(config, xs, 10, OutputActivation::Softmax, Objective::CrossEntropy(targets))?;
    let final_loss = train_recording(&mut trainer, config, |t, wall, loss, outputs| {
        tracker.record(t.step(), t.epoch(), wall, loss, &outputs.column(0).to_vec())
    })?;
    let spectral = tracker.finish(config, out, "first principal component, cross entropy", final_loss)?;
    Ok(ImagesOutcome {
        spectral,
        synthetic: config.synthetic,
        images: n,
    })
}
