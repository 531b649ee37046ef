//! Training objectives with exact gradients with respect to network outputs.
//!
//! - [`mse_loss`]: `Σ (pred − target)²`.
//! - [`cross_entropy_loss`]: per-output binary cross entropy summed over
//!   samples and output dimensions,
//!   `−Σ_j Σ_x [y_j log Υ_j + (1 − y_j) log(1 − Υ_j)]`.
//! - [`energy_loss`]: the Dirichlet energy
//!   `∫ ½|u'|² − g·u dx + β (u(a)² + u(b)²)` discretised with forward
//!   differences and rectangle-rule weights on a uniform grid.

use ndarray::{Array2, ArrayView2};

use crate::poisson::{solve_tridiagonal, Grid1D};
use crate::{Error, Result};

/// Floor applied to every logarithm argument in [`cross_entropy_loss`].
pub const LOG_EPS: f64 = 1e-12;

/// Probabilities may stray this far outside `[0, 1]` from rounding.
const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LossValueGrad {
    pub value: f64,
    /// Same layout as the prediction that was passed in (row-major for batches).
    pub grad: Vec<f64>,
}

pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<LossValueGrad> {
    if pred.len() != target.len() {
        return Err(Error::Shape(format!(
            "prediction has {} entries, target {}",
            pred.len(),
            target.len()
        )));
    }
    let mut value = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let r = p - t;
            value += r * r;
            2.0 * r
        })
        .collect();
    Ok(LossValueGrad { value, grad })
}

/// Cross entropy of a batch of probability rows against targets in `[0, 1]`.
///
/// Each log argument is floored at [`LOG_EPS`], so a probability of exactly
/// 0 or 1 gives a finite loss; where the floor is active the gradient is that
/// of the floored expression, i.e. zero. Terms whose target weight is zero are
/// skipped (`0·log 0 = 0`), so a perfect prediction has loss exactly 0.
pub fn cross_entropy_loss(
    probs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
) -> Result<LossValueGrad> {
    if probs.dim() != targets.dim() {
        return Err(Error::Shape(format!(
            "probabilities have shape {:?}, targets {:?}",
            probs.dim(),
            targets.dim()
        )));
    }
    let mut value = 0.0;
    let mut grad = Vec::with_capacity(probs.len());
    for (&p_raw, &y) in probs.iter().zip(targets.iter()) {
        if !(-PROB_TOLERANCE..=1.0 + PROB_TOLERANCE).contains(&p_raw) {
            return Err(Error::InvalidArgument(format!(
                "cross entropy needs probabilities, got {p_raw}"
            )));
        }
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::InvalidArgument(format!(
                "cross entropy targets must lie in [0, 1], got {y}"
            )));
        }
        let p = p_raw.clamp(0.0, 1.0);
        let q = 1.0 - p;
        let mut g = 0.0;
        if y > 0.0 {
            value -= y * p.max(LOG_EPS).ln();
            if p > LOG_EPS {
                g -= y / p;
            }
        }
        if y < 1.0 {
            value -= (1.0 - y) * q.max(LOG_EPS).ln();
            if q > LOG_EPS {
                g += (1.0 - y) / q;
            }
        }
        grad.push(g);
    }
    Ok(LossValueGrad { value, grad })
}

/// Penalty weight and grid for [`energy_loss`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLossConfig {
    pub beta: f64,
    pub grid: Grid1D,
}

impl EnergyLossConfig {
    pub fn new(beta: f64, grid: Grid1D) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "boundary penalty must be non-negative, got {beta}"
            )));
        }
        Ok(Self { beta, grid })
    }
}

fn check_grid_vectors(u: &[f64], g: &[f64], cfg: &EnergyLossConfig) -> Result<()> {
    let points = cfg.grid.len();
    if points < 3 {
        return Err(Error::InvalidArgument(format!(
            "energy loss needs at least 3 grid points, got {points}"
        )));
    }
    if u.len() != points || g.len() != points {
        return Err(Error::Shape(format!(
            "grid has {points} points but u has {} and g has {}",
            u.len(),
            g.len()
        )));
    }
    Ok(())
}

/// Discrete energy
/// `I_h = Σ_{i<n} (u_{i+1} − u_i)²/(2Δx) − Δx Σ_i g_i u_i + β (u_0² + u_n²)`
/// and its gradient with respect to every grid value.
pub fn energy_loss(u: &[f64], g: &[f64], cfg: &EnergyLossConfig) -> Result<LossValueGrad> {
    check_grid_vectors(u, g, cfg)?;
    let dx = cfg.grid.dx();
    let n = u.len() - 1;
    let mut value = 0.0;
    let mut grad: Vec<f64> = g.iter().map(|gi| -dx * gi).collect();
    for i in 0..n {
        let du = u[i + 1] - u[i];
        value += du * du / (2.0 * dx);
        grad[i] -= du / dx;
        grad[i + 1] += du / dx;
    }
    value -= dx * u.iter().zip(g).map(|(ui, gi)| ui * gi).sum::<f64>();
    value += cfg.beta * (u[0] * u[0] + u[n] * u[n]);
    grad[0] += 2.0 * cfg.beta * u[0];
    grad[n] += 2.0 * cfg.beta * u[n];
    Ok(LossValueGrad { value, grad })
}

/// Exact minimiser of [`energy_loss`] for fixed `g`.
///
/// The stationarity conditions form a symmetric tridiagonal system which is
/// positive definite for `β > 0`; `β = 0` leaves constants in the null space
/// and is rejected.
pub fn discrete_energy_minimizer(g: &[f64], cfg: &EnergyLossConfig) -> Result<Vec<f64>> {
    check_grid_vectors(g, g, cfg)?;
    if cfg.beta <= 0.0 {
        return Err(Error::Singular(
            "energy functional without boundary penalty has no unique minimiser".into(),
        ));
    }
    let dx = cfg.grid.dx();
    let points = g.len();
    let mut diag = vec![2.0 / dx; points];
    diag[0] = 1.0 / dx + 2.0 * cfg.beta;
    diag[points - 1] = 1.0 / dx + 2.0 * cfg.beta;
    let off = vec![-1.0 / dx; points - 1];
    let rhs: Vec<f64> = g.iter().map(|gi| dx * gi).collect();
    solve_tridiagonal(&off, &diag, &off, &rhs)
}

/// A training objective evaluated on a whole batch of network outputs.
#[derive(Debug, Clone, Copy)]
pub enum BatchLoss<'a> {
    /// Targets with the same shape as the outputs.
    Mse(ArrayView2<'a, f64>),
    /// Targets in `[0, 1]` with the same shape as the (probability) outputs.
    CrossEntropy(ArrayView2<'a, f64>),
    /// Outputs are the single-column grid values `u(x_i)`.
    Energy {
        g: &'a [f64],
        config: &'a EnergyLossConfig,
    },
}

impl BatchLoss<'_> {
    /// Whether the loss is a sum of per-sample terms `l(Υ(x))`.
    pub fn is_pointwise(&self) -> bool {
        !matches!(self, BatchLoss::Energy { .. })
    }

    /// Loss value and its gradient with respect to `outputs`.
    pub fn evaluate(&self, outputs: ArrayView2<'_, f64>) -> Result<(f64, Array2<f64>)> {
        let dim = outputs.dim();
        let lvg = match self {
            BatchLoss::Mse(targets) => {
                if targets.dim() != dim {
                    return Err(Error::Shape(format!(
                        "outputs {dim:?} vs targets {:?}",
                        targets.dim()
                    )));
                }
                let pred: Vec<f64> = outputs.iter().copied().collect();
                let target: Vec<f64> = targets.iter().copied().collect();
                mse_loss(&pred, &target)?
            }
            BatchLoss::CrossEntropy(targets) => cross_entropy_loss(outputs, *targets)?,
            BatchLoss::Energy { g, config } => {
                if dim.1 != 1 {
                    return Err(Error::Shape(format!(
                        "energy loss needs a single output column, got {}",
                        dim.1
                    )));
                }
                let u: Vec<f64> = outputs.iter().copied().collect();
                energy_loss(&u, g, config)?
            }
        };
        let grad = Array2::from_shape_vec(dim, lvg.grad)
            .map_err(|e| Error::Shape(e.to_string()))?;
        Ok((lvg.value, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::{assemble_poisson, g_rhs, thomas_solve};
    use ndarray::array;

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(-1.0, 1.0, n).unwrap()
    }

    #[test]
    fn mse_examples() {
        let l = mse_loss(&[0.3, -2.0], &[0.3, -2.0]).unwrap();
        assert_eq!(l.value, 0.0);
        assert_eq!(l.grad, vec![0.0, 0.0]);
        let l = mse_loss(&[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(l.value, 1.0);
        assert_eq!(l.grad, vec![2.0, 0.0]);
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mse_permutation_invariance() {
        let p = [0.1, 0.7, -0.4, 2.0];
        let t = [0.0, 1.0, 0.5, 1.5];
        let a = mse_loss(&p, &t).unwrap().value;
        let order = [2, 0, 3, 1];
        let pp: Vec<f64> = order.iter().map(|&i| p[i]).collect();
        let tp: Vec<f64> = order.iter().map(|&i| t[i]).collect();
        assert!((a - mse_loss(&pp, &tp).unwrap().value).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_of_perfect_prediction_is_zero() {
        let y = array![[1.0, 0.0], [0.0, 1.0]];
        let l = cross_entropy_loss(y.view(), y.view()).unwrap();
        assert_eq!(l.value, 0.0);
        assert!(l.grad.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn cross_entropy_uniform_two_class() {
        // −ln 0.5 − ln(1 − 0.5)
        let p = array![[0.5, 0.5]];
        let y = array![[1.0, 0.0]];
        let l = cross_entropy_loss(p.view(), y.view()).unwrap();
        assert!((l.value - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((l.value - 1.386294).abs() < 1e-6);
        assert_eq!(l.grad, vec![-2.0, 2.0]);
    }

    #[test]
    fn cross_entropy_decreases_toward_true_class() {
        let y = array![[1.0, 0.0]];
        let mut last = f64::INFINITY;
        for k in 1..20 {
            let p1 = k as f64 / 20.0;
            let p = array![[p1, 1.0 - p1]];
            let v = cross_entropy_loss(p.view(), y.view()).unwrap().value;
            assert!(v < last);
            assert!(v >= 0.0);
            last = v;
        }
    }

    #[test]
    fn cross_entropy_rejects_non_probabilities() {
        let y = array![[1.0, 0.0]];
        assert!(cross_entropy_loss(array![[1.1, -0.1]].view(), y.view()).is_err());
        assert!(cross_entropy_loss(array![[0.5, 0.5]].view(), array![[2.0, 0.0]].view()).is_err());
        assert!(cross_entropy_loss(array![[0.5]].view(), y.view()).is_err());
        // rounding slack is tolerated
        assert!(cross_entropy_loss(array![[1.0 + 1e-12, -1e-12]].view(), y.view()).is_ok());
    }

    #[test]
    fn cross_entropy_saturated_probability_stays_finite() {
        let p = array![[0.0, 1.0]];
        let y = array![[1.0, 0.0]];
        let l = cross_entropy_loss(p.view(), y.view()).unwrap();
        assert!((l.value - 2.0 * (-(LOG_EPS.ln()))).abs() < 1e-9);
        assert_eq!(l.grad, vec![0.0, 0.0]);
    }

    #[test]
    fn energy_of_zero_field() {
        let cfg = EnergyLossConfig::new(10.0, grid(8)).unwrap();
        let g: Vec<f64> = cfg.grid.points().map(g_rhs).collect();
        let u = vec![0.0; 9];
        let l = energy_loss(&u, &g, &cfg).unwrap();
        assert_eq!(l.value, 0.0);
        let dx = cfg.grid.dx();
        for (gr, gi) in l.grad.iter().zip(&g) {
            assert!((gr + dx * gi).abs() < 1e-15);
        }
        let zeros = energy_loss(&u, &u, &cfg).unwrap();
        assert_eq!(zeros.value, 0.0);
        assert!(zeros.grad.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn energy_gradient_matches_finite_differences() {
        let cfg = EnergyLossConfig::new(10.0, grid(16)).unwrap();
        let g: Vec<f64> = cfg.grid.points().map(g_rhs).collect();
        let u: Vec<f64> = cfg.grid.points().map(|x| (3.0 * x).cos() + 0.2 * x).collect();
        let l = energy_loss(&u, &g, &cfg).unwrap();
        let h = 1e-5;
        for i in 0..u.len() {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[i] += h;
            dn[i] -= h;
            let fd = (energy_loss(&up, &g, &cfg).unwrap().value
                - energy_loss(&dn, &g, &cfg).unwrap().value)
                / (2.0 * h);
            let rel = (fd - l.grad[i]).abs() / (fd.abs() + l.grad[i].abs() + 1e-12);
            assert!(rel < 1e-8, "i={i} fd={fd} analytic={}", l.grad[i]);
        }
    }

    #[test]
    fn energy_is_orientation_invariant() {
        let cfg = EnergyLossConfig::new(3.0, grid(10)).unwrap();
        let u: Vec<f64> = (0..11).map(|i| ((i * i) as f64 * 0.37).sin()).collect();
        let g: Vec<f64> = (0..11).map(|i| (i as f64 * 1.3).cos()).collect();
        let a = energy_loss(&u, &g, &cfg).unwrap().value;
        let ur: Vec<f64> = u.iter().rev().copied().collect();
        let gr: Vec<f64> = g.iter().rev().copied().collect();
        let b = energy_loss(&ur, &gr, &cfg).unwrap().value;
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn energy_shape_errors() {
        let cfg = EnergyLossConfig::new(1.0, grid(4)).unwrap();
        assert!(energy_loss(&[0.0; 4], &[0.0; 5], &cfg).is_err());
        assert!(EnergyLossConfig::new(-1.0, grid(4)).is_err());
    }

    #[test]
    fn minimizer_is_stationary() {
        let cfg = EnergyLossConfig::new(10.0, grid(64)).unwrap();
        let g: Vec<f64> = cfg.grid.points().map(g_rhs).collect();
        let u = discrete_energy_minimizer(&g, &cfg).unwrap();
        let l = energy_loss(&u, &g, &cfg).unwrap();
        let sup = l.grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(sup < 1e-10, "gradient sup-norm {sup}");

        let zero = discrete_energy_minimizer(&vec![0.0; 65], &cfg).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn minimizer_rejects_zero_penalty() {
        let cfg = EnergyLossConfig::new(0.0, grid(8)).unwrap();
        assert!(matches!(
            discrete_energy_minimizer(&[1.0; 9], &cfg),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn minimizer_approaches_dirichlet_solution_as_penalty_grows() {
        let grid = grid(64);
        let g: Vec<f64> = grid.points().map(g_rhs).collect();
        let u_star = thomas_solve(&assemble_poisson(&grid, g_rhs).unwrap())
            .unwrap()
            .full;
        let dist: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&beta| {
                let cfg = EnergyLossConfig::new(beta, grid.clone()).unwrap();
                let u = discrete_energy_minimizer(&g, &cfg).unwrap();
                u.iter()
                    .zip(&u_star)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            })
            .collect();
        assert!(dist[0] > dist[1] && dist[1] > dist[2], "{dist:?}");
    }

    #[test]
    fn batch_loss_shapes() {
        let cfg = EnergyLossConfig::new(1.0, grid(4)).unwrap();
        let g = [0.0; 5];
        let loss = BatchLoss::Energy { g: &g, config: &cfg };
        assert!(!loss.is_pointwise());
        assert!(loss.evaluate(Array2::zeros((5, 2)).view()).is_err());
        let (v, grad) = loss.evaluate(Array2::zeros((5, 1)).view()).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(grad.dim(), (5, 1));
        let t = array![[1.0], [2.0]];
        assert!(BatchLoss::Mse(t.view()).is_pointwise());
        assert!(BatchLoss::Mse(t.view())
            .evaluate(Array2::zeros((3, 1)).view())
            .is_err());
    }
}
