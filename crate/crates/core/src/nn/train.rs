use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;

use super::{Mlp, ParamGrad};
use crate::loss::BatchLoss;
use crate::rng::GaussianSampler;
use crate::Result;

/// Result of one forward/backward pass over a batch.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub loss: f64,
    pub grad: ParamGrad,
    pub outputs: Array2<f64>,
}

/// Loss value, parameter gradient and outputs of `mlp` on `xs`.
pub fn value_and_grad(mlp: &Mlp, xs: ArrayView2<'_, f64>, loss: &BatchLoss<'_>) -> Result<Evaluation> {
    let cache = mlp.forward(xs)?;
    let (value, seed) = loss.evaluate(cache.outputs().view())?;
    let grad = mlp.backprop(&cache, seed.view())?;
    Ok(Evaluation {
        loss: value,
        grad,
        outputs: cache.into_outputs(),
    })
}

/// Splits `0..n` into shuffled mini-batches of at most `batch_size` indices.
/// `batch_size == 0` or `>= n` yields a single batch in natural order.
pub fn shuffled_batches(n: usize, batch_size: usize, sampler: &mut GaussianSampler) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    if batch_size == 0 || batch_size >= n {
        return vec![order];
    }
    order.shuffle(sampler.rng_mut());
    order.chunks(batch_size).map(<[usize]>::to_vec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{grad_check, Activation, GradCheckOptions, InitSpec, OutputActivation};
    use ndarray::{array, Array2};

    #[test]
    fn linear_net_quadratic_loss_is_near_exact() {
        let net = Mlp::new(&[2, 3], Activation::Tanh, OutputActivation::Identity, &InitSpec::new(0.7, 1)).unwrap();
        let xs = array![[0.5, -1.0], [2.0, 0.25]];
        let targets = Array2::from_elem((2, 3), 0.3);
        let loss = BatchLoss::Mse(targets.view());
        let eval = value_and_grad(&net, xs.view(), &loss).unwrap();
        let err = grad_check(
            &net,
            &eval.grad,
            |m| Ok(loss.evaluate(m.predict(xs.view())?.view())?.0),
            GradCheckOptions::default(),
        )
        .unwrap();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let net = Mlp::new(&[1, 5, 1], Activation::Tanh, OutputActivation::Identity, &InitSpec::new(0.8, 2)).unwrap();
        let xs = array![[0.1], [0.4], [-0.9]];
        let targets = array![[1.0], [0.0], [0.5]];
        let loss = BatchLoss::Mse(targets.view());
        let mut eval = value_and_grad(&net, xs.view(), &loss).unwrap();
        eval.grad.weights[0][[2, 0]] += 0.5;
        let err = grad_check(
            &net,
            &eval.grad,
            |m| Ok(loss.evaluate(m.predict(xs.view())?.view())?.0),
            GradCheckOptions::default(),
        )
        .unwrap();
        assert!(err > 1e-2, "{err}");
    }

    #[test]
    fn batches_cover_every_index_once() {
        let mut s = GaussianSampler::new(3);
        let batches = shuffled_batches(10, 4, &mut s);
        assert_eq!(batches.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 4, 2]);
        let mut all: Vec<usize> = batches.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(shuffled_batches(5, 0, &mut s), vec![vec![0, 1, 2, 3, 4]]);
    }
}
