//! Eigen-structure of the Jacobi iteration matrix `R_J = D⁻¹(L + U)` for
//! `A = tridiag(-1, 2, -1)`: eigenvalues `λ_k = cos(kπ/n)` with sine
//! eigenvectors `v_{k,j} = sin(jkπ/n)`, `k, j = 1 .. n−1`. An error vector
//! expands as `e = Σ_k α_k v_k` and one Jacobi sweep maps `α_k ↦ λ_k α_k`.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Slack used when rounding halving times up to whole iterations, so that a
/// mode decaying by exactly one half (`k = n/4`) is not pushed to the next
/// iteration by rounding in `ln`.
const HALVING_SLACK: f64 = 1e-9;

fn check_mode(n: usize, k: usize) -> Result<()> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "mode index {k} outside 1..{} for n = {n}",
            n.saturating_sub(1)
        )));
    }
    Ok(())
}

/// `sin(π·p/q)` with the argument reduced exactly modulo `2π` first.
fn sin_pi_ratio(p: usize, q: usize) -> f64 {
    let r = p % (2 * q);
    (PI * r as f64 / q as f64).sin()
}

/// `λ_k = cos(kπ/n)`.
pub fn jacobi_eigen(n: usize, k: usize) -> Result<f64> {
    check_mode(n, k)?;
    Ok((k as f64 * PI / n as f64).cos())
}

/// `v_k` as the vector `(sin(jkπ/n))_{j=1..n−1}`.
pub fn sine_mode(n: usize, k: usize) -> Result<Vec<f64>> {
    check_mode(n, k)?;
    Ok((1..n).map(|j| sin_pi_ratio(j * k, n)).collect())
}

/// Coefficients `α_k`, `k = 1..n−1` (stored at index `k − 1`), of
/// `err = Σ_k α_k v_k`, using `‖v_k‖² = n/2`.
pub fn mode_amplitudes(err: &[f64], n: usize) -> Result<Vec<f64>> {
    if n < 2 || err.len() != n - 1 {
        return Err(Error::Shape(format!(
            "error vector has {} entries, expected {}",
            err.len(),
            n.saturating_sub(1)
        )));
    }
    let scale = 2.0 / n as f64;
    Ok((1..n)
        .map(|k| {
            scale
                * err
                    .iter()
                    .enumerate()
                    .map(|(j, e)| e * sin_pi_ratio((j + 1) * k, n))
                    .sum::<f64>()
        })
        .collect())
}

/// Iterations needed for Jacobi to halve mode `k`:
/// `ceil(ln ½ / ln |λ_k|)`, at least one.
pub fn halving_count(n: usize, k: usize) -> Result<usize> {
    let time = halving_time(n, k)?;
    Ok(((time - HALVING_SLACK).ceil() as usize).max(1))
}

/// Real-valued `ln ½ / ln |λ_k|`.
pub fn halving_time(n: usize, k: usize) -> Result<f64> {
    let lambda = jacobi_eigen(n, k)?.abs();
    Ok(0.5f64.ln() / lambda.ln())
}

/// Precomputed eigenpairs for a chosen set of modes.
#[derive(Debug, Clone)]
pub struct ModeAnalysis {
    n: usize,
    modes: Vec<usize>,
    eigenvalues: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

impl ModeAnalysis {
    pub fn new(n: usize, modes: &[usize]) -> Result<Self> {
        let eigenvalues = modes
            .iter()
            .map(|&k| jacobi_eigen(n, k))
            .collect::<Result<Vec<_>>>()?;
        let vectors = modes
            .iter()
            .map(|&k| sine_mode(n, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            modes: modes.to_vec(),
            eigenvalues,
            vectors,
        })
    }

    /// Every mode `1..n−1`.
    pub fn all(n: usize) -> Result<Self> {
        let modes: Vec<usize> = (1..n).collect();
        Self::new(n, &modes)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, index: usize) -> &[f64] {
        &self.vectors[index]
    }

    /// `α_k` for each tracked mode, in the order given at construction.
    pub fn amplitudes(&self, err: &[f64]) -> Result<Vec<f64>> {
        if err.len() + 1 != self.n {
            return Err(Error::Shape(format!(
                "error vector has {} entries, expected {}",
                err.len(),
                self.n - 1
            )));
        }
        let scale = 2.0 / self.n as f64;
        Ok(self
            .vectors
            .iter()
            .map(|v| scale * v.iter().zip(err).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    }
}
