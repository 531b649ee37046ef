use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::rng::GaussianSampler;
use crate::{Error, Result};

/// Subtracts the mean column from every column.
pub fn center(x: ArrayView2<'_, f64>) -> Array2<f64> {
    match x.mean_axis(Axis(1)) {
        Some(mean) => &x - &mean.insert_axis(Axis(1)),
        None => x.to_owned(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterOptions {
    /// Stop once `‖C v − λ v‖ ≤ tol · λ`.
    pub tol: f64,
    pub max_iters: usize,
    /// Seed of the random starting vector.
    pub seed: u64,
}

impl Default for PowerIterOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 10_000,
            seed: 0,
        }
    }
}

/// Unit eigenvector of the largest eigenvalue of `C = X Xᵀ`, by power
/// iteration with `C v` evaluated as `X (Xᵀ v)`. The sign is chosen so the
/// entry of largest magnitude is positive.
pub fn leading_eigenvector(x: ArrayView2<'_, f64>, opts: PowerIterOptions) -> Result<Array1<f64>> {
    let dim = x.nrows();
    if dim == 0 || x.ncols() == 0 || x.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument("power iteration on a zero matrix".into()));
    }
    let mut sampler = GaussianSampler::new(opts.seed);
    let mut v = Array1::from_shape_simple_fn(dim, || sampler.standard());
    v /= v.dot(&v).sqrt();
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iters {
        let w = x.dot(&x.t().dot(&v));
        let lambda = v.dot(&w);
        let wnorm = w.dot(&w).sqrt();
        if wnorm == 0.0 {
            // Started orthogonal to the data; any other direction will do.
            v = Array1::from_shape_simple_fn(dim, || sampler.standard());
            v /= v.dot(&v).sqrt();
            continue;
        }
        let r = &w - &(lambda * &v);
        residual = r.dot(&r).sqrt() / lambda;
        if residual <= opts.tol {
            return Ok(fix_sign(v));
        }
        v = w / wnorm;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iters,
        residual,
    })
}

fn fix_sign(mut v: Array1<f64>) -> Array1<f64> {
    let big = v.iter().copied().fold(0.0, |m: f64, e| if e.abs() > m.abs() { e } else { m });
    if big < 0.0 {
        v.mapv_inplace(|e| -e);
    }
    v
}

/// Rescales `values` affinely so the minimum maps to 0 and the maximum to 1.
fn rescale(values: &[f64]) -> Result<Vec<f64>> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return Err(Error::InvalidArgument(
            "projections must contain at least two distinct finite values".into(),
        ));
    }
    Ok(values.iter().map(|v| (v - lo) / span).collect())
}

/// Projects each column of `x` on `p1` and rescales the results to `[0, 1]`.
pub fn project_rescale(x: ArrayView2<'_, f64>, p1: ArrayView1<'_, f64>) -> Result<Vec<f64>> {
    if x.nrows() != p1.len() {
        return Err(Error::Shape(format!(
            "{} features but direction of length {}",
            x.nrows(),
            p1.len()
        )));
    }
    let proj = x.t().dot(&p1);
    rescale(proj.as_slice().expect("fresh array is contiguous"))
}

/// The full reduction: centre, find the leading direction, project, rescale.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    pub p1: Array1<f64>,
    pub mean: Array1<f64>,
    /// One scalar in `[0, 1]` per image.
    pub x: Vec<f64>,
}

impl PcaProjection {
    pub fn fit(images: ArrayView2<'_, f64>, opts: PowerIterOptions) -> Result<Self> {
        let mean = images
            .mean_axis(Axis(1))
            .ok_or_else(|| Error::InvalidArgument("no images".into()))?;
        let centered = &images - &mean.view().insert_axis(Axis(1));
        let p1 = leading_eigenvector(centered.view(), opts)?;
        let x = project_rescale(centered.view(), p1.view())?;
        Ok(Self { p1, mean, x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identical_columns_center_to_zero() {
        let x = array![[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]];
        assert!(center(x.view()).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_columns() {
        let x = array![[3.0, 1.0], [-2.0, 4.0]];
        let c = center(x.view());
        assert_eq!(c, array![[1.0, -1.0], [-3.0, 3.0]]);
        assert_eq!(center(c.view()), c);
    }

    #[test]
    fn axis_aligned_data() {
        let x = array![[1.0, -2.0, 3.0, -0.5], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]];
        let p = leading_eigenvector(x.view(), PowerIterOptions::default()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(p[1].abs() < 1e-6 && p[2].abs() < 1e-6);
    }

    #[test]
    fn degenerate_top_eigenvalue_meets_residual() {
        let x = array![[1.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, -1.0], [0.0, 0.0, 0.0, 0.0]];
        let p = leading_eigenvector(x.view(), PowerIterOptions::default()).unwrap();
        assert!((p.dot(&p) - 1.0).abs() < 1e-12);
        assert!(p[2].abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_and_iteration_cap() {
        assert!(leading_eigenvector(Array2::<f64>::zeros((3, 2)).view(), PowerIterOptions::default()).is_err());
        let x = array![[1.0, 0.0], [0.0, 0.999]];
        let opts = PowerIterOptions {
            max_iters: 3,
            ..Default::default()
        };
        assert!(matches!(
            leading_eigenvector(x.view(), opts),
            Err(Error::NoConvergence { iterations: 3, .. })
        ));
    }

    #[test]
    fn rescale_examples() {
        let x = array![[2.0, 4.0, 6.0]];
        assert_eq!(project_rescale(x.view(), array![1.0].view()).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(project_rescale(x.view(), array![-1.0].view()).unwrap(), vec![1.0, 0.5, 0.0]);
        let shifted = x.mapv(|v| 3.0 * v - 7.0);
        assert_eq!(project_rescale(shifted.view(), array![1.0].view()).unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(project_rescale(array![[1.0, 1.0]].view(), array![1.0].view()).is_err());
    }
}
