use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::{Error, Result};

/// Fourier coefficients indexed by the frequency index `γ = 0..K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument("spectrum must be nonempty".into()));
        }
        if let Some(g) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("spectrum coefficient {g}")));
        }
        Ok(Self { coefficients })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn get(&self, gamma: usize) -> Option<Complex64> {
        self.coefficients.get(gamma).copied()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm()).collect()
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(&self, s: Complex64) -> Result<Self> {
        Self::new(self.coefficients.iter().map(|c| c * s).collect())
    }
}

/// Unnormalised forward DFT, `Σ_j v_j exp(−2πi jγ/N)`.
pub fn dft_uniform(values: &[f64]) -> Result<Spectrum> {
    let n = values.len();
    if n == 0 {
        return Err(Error::InvalidArgument("DFT of an empty vector".into()));
    }
    // Reducing jγ mod N keeps the phase argument small and exact.
    let twiddle: Vec<Complex64> = (0..n)
        .map(|m| Complex64::from_polar(1.0, -TAU * m as f64 / n as f64))
        .collect();
    let coefficients = (0..n)
        .map(|gamma| {
            values
                .iter()
                .enumerate()
                .map(|(j, &v)| v * twiddle[(j * gamma) % n])
                .sum()
        })
        .collect();
    Spectrum::new(coefficients)
}

/// Direct non-uniform transform `Σ_j y_j exp(−2πi x_j k)` for `k = 0..K`,
/// with nodes in `[0, 1]`.
pub fn nufft_direct(points: &[f64], values: &[f64], k: usize) -> Result<Spectrum> {
    if points.len() != values.len() {
        return Err(Error::Shape(format!(
            "{} points but {} values",
            points.len(),
            values.len()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one frequency".into()));
    }
    if let Some(&x) = points.iter().find(|&&x| !(-1e-9..=1.0 + 1e-9).contains(&x)) {
        return Err(Error::InvalidArgument(format!("node {x} lies outside [0, 1]")));
    }
    let coefficients = (0..k)
        .map(|gamma| {
            points
                .iter()
                .zip(values)
                .map(|(&x, &y)| {
                    // exp(−2πi x γ) depends only on the fractional part of xγ.
                    let t = (x * gamma as f64).fract();
                    y * Complex64::from_polar(1.0, -TAU * t)
                })
                .sum()
        })
        .collect();
    Spectrum::new(coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_vector() {
        let s = dft_uniform(&[1.0; 4]).unwrap();
        assert!((s.coefficients()[0] - Complex64::new(4.0, 0.0)).norm() < 1e-12);
        for c in &s.coefficients()[1..] {
            assert!(c.norm() < 1e-12);
        }
    }

    #[test]
    fn quarter_sine() {
        let s = dft_uniform(&[0.0, 1.0, 0.0, -1.0]).unwrap();
        assert!((s.coefficients()[1] - Complex64::new(0.0, -2.0)).norm() < 1e-12);
        assert!((s.amplitudes()[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn linearity() {
        let u = [0.3, -1.2, 2.5, 0.0, 4.1];
        let v = [1.0, 0.5, -0.25, 3.0, -2.0];
        let (a, b) = (1.7, -0.6);
        let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let (su, sv, sw) = (dft_uniform(&u).unwrap(), dft_uniform(&v).unwrap(), dft_uniform(&w).unwrap());
        for g in 0..5 {
            let expect = a * su.coefficients()[g] + b * sv.coefficients()[g];
            assert!((sw.coefficients()[g] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn empty_input_rejected() {
        assert!(dft_uniform(&[]).is_err());
    }

    #[test]
    fn single_node_at_origin() {
        let s = nufft_direct(&[0.0], &[1.0], 6).unwrap();
        for c in s.coefficients() {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn uniform_nodes_reduce_to_dft() {
        let n = 16;
        let values: Vec<f64> = (0..n).map(|j| ((j * j) as f64 * 0.37).sin()).collect();
        let points: Vec<f64> = (0..n).map(|j| j as f64 / n as f64).collect();
        let a = nufft_direct(&points, &values, n).unwrap();
        let b = dft_uniform(&values).unwrap();
        for (x, y) in a.coefficients().iter().zip(b.coefficients()) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn nodes_outside_unit_interval_rejected() {
        assert!(nufft_direct(&[1.0 + 1e-6], &[1.0], 2).is_err());
        assert!(nufft_direct(&[-1e-6], &[1.0], 2).is_err());
        assert!(nufft_direct(&[1.0 + 1e-10, -1e-10], &[1.0, 1.0], 2).is_ok());
        assert!(nufft_direct(&[0.5], &[1.0, 2.0], 2).is_err());
        assert!(nufft_direct(&[0.5], &[1.0], 0).is_err());
    }

    #[test]
    fn non_finite_coefficients_rejected() {
        assert!(dft_uniform(&[f64::NAN, 1.0]).is_err());
    }
}
