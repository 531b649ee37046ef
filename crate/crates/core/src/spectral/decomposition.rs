use std::f64::consts::TAU;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::loss::BatchLoss;
use crate::nn::{Mlp, ParamGrad};
use crate::{Error, Result};

/// Frequency-by-frequency split of the gradient contributed by one output
/// dimension, in the orthonormal basis `p_k(x_j) = exp(2πi kj/N)/√N`.
#[derive(Debug, Clone)]
pub struct GradDecomposition {
    /// `d_k = Σ_j (∂L/∂Υ_j) p_k(x_j)`.
    pub d_k: Vec<Complex64>,
    /// `∂c_{θ,k}/∂θ`, one row per parameter, one column per `k`.
    pub dc_dtheta: Array2<Complex64>,
    /// `𝓛_k = (∂c_{θ,k}/∂θ) d_k`, same layout as `dc_dtheta`.
    pub l_k_terms: Array2<Complex64>,
    /// Backpropagated gradient from this output dimension alone.
    pub direct_grad: ParamGrad,
}

impl GradDecomposition {
    /// `Σ_k 𝓛_k` per parameter.
    pub fn summed(&self) -> Vec<Complex64> {
        self.l_k_terms.rows().into_iter().map(|r| r.sum()).collect()
    }

    /// `‖Re Σ_k 𝓛_k − g‖ / ‖g‖` and `‖Im Σ_k 𝓛_k‖ / ‖g‖`.
    pub fn residuals(&self) -> (f64, f64) {
        let g = self.direct_grad.to_flat();
        let s = self.summed();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let re = s.iter().zip(&g).map(|(c, v)| (c.re - v).powi(2)).sum::<f64>().sqrt();
        let im = s.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
        (re / norm, im / norm)
    }
}

fn check_uniform(xs: ArrayView2<'_, f64>) -> Result<()> {
    let n = xs.nrows();
    if xs.ncols() != 1 || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two scalar samples, got shape {:?}",
            xs.dim()
        )));
    }
    let x0 = xs[[0, 0]];
    let h = (xs[[n - 1, 0]] - x0) / (n - 1) as f64;
    let tol = 1e-9 * (h.abs() * n as f64).max(f64::MIN_POSITIVE);
    if h == 0.0 || (0..n).any(|j| (xs[[j, 0]] - (x0 + h * j as f64)).abs() > tol) {
        return Err(Error::InvalidArgument("samples are not uniformly spaced".into()));
    }
    Ok(())
}

/// Decomposes the gradient contribution of output `dim` over Fourier modes.
/// Only pointwise losses on uniformly spaced scalar inputs are supported.
pub fn grad_decomposition(
    mlp: &Mlp,
    xs: ArrayView2<'_, f64>,
    loss: &BatchLoss<'_>,
    dim: usize,
) -> Result<GradDecomposition> {
    if !loss.is_pointwise() {
        return Err(Error::InvalidArgument(
            "gradient decomposition needs a pointwise loss".into(),
        ));
    }
    check_uniform(xs)?;
    if dim >= mlp.output_dim() {
        return Err(Error::InvalidArgument(format!(
            "output dimension {dim} out of range for {} outputs",
            mlp.output_dim()
        )));
    }
    let n = xs.nrows();
    let cache = mlp.forward(xs)?;
    let (_, seed) = loss.evaluate(cache.outputs().view())?;

    let mut masked = Array2::zeros(seed.dim());
    masked.column_mut(dim).assign(&seed.column(dim));
    let direct_grad = mlp.backprop(&cache, masked.view())?;

    let scale = 1.0 / (n as f64).sqrt();
    // basis[m] = exp(2πi m/N)/√N, so p_k(x_j) = basis[(kj) mod N].
    let basis: Vec<Complex64> = (0..n)
        .map(|m| Complex64::from_polar(scale, TAU * m as f64 / n as f64))
        .collect();
    let d_k: Vec<Complex64> = (0..n)
        .map(|k| (0..n).map(|j| seed[[j, dim]] * basis[(k * j) % n]).sum())
        .collect();

    // Row j holds ∂Υ_dim(x_j)/∂θ.
    let p = mlp.param_count();
    let mut per_sample = Array2::<f64>::zeros((n, p));
    let mut unit = Array2::zeros(seed.dim());
    for j in 0..n {
        unit[[j, dim]] = 1.0;
        let g = mlp.backprop(&cache, unit.view())?;
        per_sample.row_mut(j).assign(&ndarray::Array1::from(g.to_flat()));
        unit[[j, dim]] = 0.0;
    }

    let mut dc_dtheta = Array2::<Complex64>::zeros((p, n));
    for k in 0..n {
        for j in 0..n {
            let w = basis[(k * j) % n].conj();
            for (dc, &v) in dc_dtheta.column_mut(k).iter_mut().zip(per_sample.row(j)) {
                *dc += w * v;
            }
        }
    }
    let mut l_k_terms = dc_dtheta.clone();
    for (k, mut col) in l_k_terms.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|c| c * d_k[k]);
    }

    Ok(GradDecomposition {
        d_k,
        dc_dtheta,
        l_k_terms,
        direct_grad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{EnergyLossConfig};
    use crate::nn::{value_and_grad, Activation, InitSpec, OutputActivation};
    use crate::poisson::Grid1D;

    fn samples(n: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, 1), |(j, _)| -1.0 + 2.0 * j as f64 / n as f64)
    }

    #[test]
    fn mse_identity() {
        let net = Mlp::new(&[1, 16, 1], Activation::Tanh, OutputActivation::Identity, &InitSpec::new(0.5, 3)).unwrap();
        let xs = samples(32);
        let targets = xs.mapv(|x| (3.0 * x).sin());
        let loss = BatchLoss::Mse(targets.view());
        let dec = grad_decomposition(&net, xs.view(), &loss, 0).unwrap();
        let (re, im) = dec.residuals();
        assert!(re < 1e-8 && im < 1e-8, "{re} {im}");
        let full = value_and_grad(&net, xs.view(), &loss).unwrap().grad;
        assert_eq!(full.to_flat(), dec.direct_grad.to_flat());
    }

    #[test]
    fn perfect_fit_has_zero_d_k() {
        let net = Mlp::new(&[1, 8, 1], Activation::Tanh, OutputActivation::Identity, &InitSpec::new(0.5, 4)).unwrap();
        let xs = samples(16);
        let targets = net.predict(xs.view()).unwrap();
        let dec = grad_decomposition(&net, xs.view(), &BatchLoss::Mse(targets.view()), 0).unwrap();
        assert!(dec.d_k.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn rejects_energy_loss_and_uneven_samples() {
        let net = Mlp::new(&[1, 4, 1], Activation::Tanh, OutputActivation::Identity, &InitSpec::new(0.5, 5)).unwrap();
        let xs = samples(9);
        let g = vec![1.0; 9];
        let cfg = EnergyLossConfig::new(10.0, Grid1D::new(-1.0, 1.0, 8).unwrap()).unwrap();
        let energy = BatchLoss::Energy { g: &g, config: &cfg };
        assert!(grad_decomposition(&net, xs.view(), &energy, 0).is_err());

        let mut uneven = samples(9);
        uneven[[4, 0]] += 0.01;
        let targets = Array2::zeros((9, 1));
        assert!(grad_decomposition(&net, uneven.view(), &BatchLoss::Mse(targets.view()), 0).is_err());
        assert!(grad_decomposition(&net, xs.view(), &BatchLoss::Mse(targets.view()), 1).is_err());
    }
}
