use fprinciple::csvfmt::fmt17;
use fprinciple::loss::BatchLoss;
use fprinciple::nn::{value_and_grad, InitSpec, Mlp, OutputActivation};
use fprinciple::spectral::grad_decomposition;
use ndarray::Array2;
use serde_json::{json, Value};

use super::target_toy;
use crate::config::Config;
use crate::error::RunResult;
use crate::output::RunDir;

#[derive(Debug, Clone)]
pub struct DiagnoseCase {
    pub loss: &'static str,
    pub widths: Vec<usize>,
    /// Per output dimension: `‖Re Σ_k 𝓛_k − ∂L/∂θ‖/‖∂L/∂θ‖` and the
    /// matching imaginary residual.
    pub residuals: Vec<(f64, f64)>,
    /// The same relative residual for the gradient summed over outputs.
    pub total_residual: f64,
}

#[derive(Debug, Clone)]
pub struct DiagnoseOutcome {
    pub cases: Vec<DiagnoseCase>,
}

impl DiagnoseOutcome {
    pub fn worst(&self) -> f64 {
        self.cases
            .iter()
            .flat_map(|c| c.residuals.iter().flat_map(|(a, b)| [*a, *b]).chain([c.total_residual]))
            .fold(0.0, f64::max)
    }

    pub fn metrics(&self) -> Value {
        json!({
            "cases": self.cases.iter().map(|c| json!({
                "loss": c.loss,
                "widths": c.widths,
                "residuals": c.residuals.iter().map(|(r, i)| json!({"real": r, "imag": i})).collect::<Vec<_>>(),
                "total_residual": c.total_residual,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Splits the gradient of a small network over Fourier modes, for a squared
/// error on one output and a cross entropy on two softmax outputs.
pub fn run_diagnose_grad(config: &Config, out: &mut RunDir) -> RunResult<DiagnoseOutcome> {
    let n = config.samples;
    let xs = Array2::from_shape_fn((n, 1), |(j, _)| -1.0 + 2.0 * j as f64 / n as f64);
    let step = |j: usize, d: usize| {
        let (y1, y2) = target_toy(xs[[j, 0]]);
        if d == 0 { y1 } else { y2 }
    };
    let mut cases = Vec::new();
    let mut rows = Vec::new();
    for (name, outputs, head) in [
        ("mse", 1, OutputActivation::Identity),
        ("cross_entropy", 2, OutputActivation::Softmax),
    ] {
        let mut widths = vec![1];
        widths.extend(&config.hidden_widths);
        widths.push(outputs);
        let mlp = Mlp::new(&widths, config.activation(), head, &InitSpec::new(config.init_std, config.seed))?;
        let targets = Array2::from_shape_fn((n, outputs), |(j, d)| step(j, d));
        let loss = if outputs == 1 {
            BatchLoss::Mse(targets.view())
        } else {
            BatchLoss::CrossEntropy(targets.view())
        };
        let full = value_and_grad(&mlp, xs.view(), &loss)?.grad.to_flat();
        let mut summed = vec![0.0; full.len()];
        let mut residuals = Vec::new();
        for dim in 0..outputs {
            let dec = grad_decomposition(&mlp, xs.view(), &loss, dim)?;
            residuals.push(dec.residuals());
            for (s, v) in summed.iter_mut().zip(dec.summed()) {
                *s += v.re;
            }
            for (k, d) in dec.d_k.iter().enumerate() {
                let lk = dec.l_k_terms.column(k).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                rows.push((name, dim, k, *d, lk));
            }
        }
        let norm = full.iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff = summed.iter().zip(&full).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        cases.push(DiagnoseCase {
            loss: name,
            widths,
            residuals,
            total_residual: diff / norm,
        });
    }
    out.write("decomposition.csv", |w| {
        writeln!(w, "loss,dim,k,d_re,d_im,l_k_norm")?;
        for (name, dim, k, d, lk) in &rows {
            writeln!(w, "{name},{dim},{k},{},{},{}", fmt17(d.re), fmt17(d.im), fmt17(*lk))?;
        }
        Ok(())
    })?;
    Ok(DiagnoseOutcome { cases })
}
