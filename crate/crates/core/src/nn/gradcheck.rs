use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Mlp, ParamGrad};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GradCheckOptions {
    /// Central-difference step.
    pub fd_step: f64,
    /// Check at most this many parameters, chosen at random without
    /// replacement. Networks with fewer parameters are checked exhaustively.
    pub max_params: usize,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            fd_step: 1e-6,
            max_params: 200,
            seed: 0,
        }
    }
}

/// Compares an analytic gradient against central finite differences of
/// `loss` and returns the worst relative error
/// `|analytic − fd| / (|analytic| + |fd| + 1e−12)` over the checked
/// parameters.
pub fn grad_check<F>(
    mlp: &Mlp,
    analytic: &ParamGrad,
    mut loss: F,
    opts: GradCheckOptions,
) -> Result<f64>
where
    F: FnMut(&Mlp) -> Result<f64>,
{
    if !analytic.is_congruent(mlp) {
        return Err(Error::Shape("gradient does not match the network".into()));
    }
    if !(opts.fd_step > 0.0) {
        return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
    }
    let total = mlp.param_count();
    let indices: Vec<usize> = if total <= opts.max_params {
        (0..total).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut picked = sample(&mut rng, total, opts.max_params).into_vec();
        picked.sort_unstable();
        picked
    };
    let analytic_flat = analytic.to_flat();
    let mut probe = mlp.clone();
    let mut worst = 0.0f64;
    for i in indices {
        let theta = mlp.param(i).expect("index in range");
        probe.set_param(i, theta + opts.fd_step)?;
        let up = loss(&probe)?;
        probe.set_param(i, theta - opts.fd_step)?;
        let down = loss(&probe)?;
        probe.set_param(i, theta)?;
        let fd = (up - down) / (2.0 * opts.fd_step);
        let a = analytic_flat[i];
        worst = worst.max((a - fd).abs() / (a.abs() + fd.abs() + 1e-12));
    }
    Ok(worst)
}
