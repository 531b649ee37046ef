//! Cross-checks against independently written reference computations.

use approx::assert_relative_eq;
use fprinciple::data::{leading_eigenvector, PowerIterOptions};
use fprinciple::poisson::{assemble_poisson, g_rhs, thomas_solve, Grid1D};
use fprinciple::rng::GaussianSampler;
use fprinciple::spectral::{dft_uniform, nufft_direct, pick_peaks};
use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use num_complex::Complex64;

fn dense_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n - 1, n - 1, |i, j| match i.abs_diff(j) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    })
}

#[test]
fn thomas_matches_dense_lu() {
    for n in [4, 17, 64, 200] {
        let sys = assemble_poisson(&Grid1D::symmetric(n).unwrap(), g_rhs).unwrap();
        let u = thomas_solve(&sys).unwrap();
        let dense = dense_matrix(n).lu().solve(&DVector::from_column_slice(sys.rhs())).unwrap();
        for (a, b) in u.interior.iter().zip(dense.iter()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12, max_relative = 1e-10);
        }
        assert_eq!(u.full.len(), n + 1);
        assert_eq!((u.full[0], u.full[n]), (0.0, 0.0));
    }
}

#[test]
fn unit_load_hand_value() {
    let sys = assemble_poisson(&Grid1D::new(0.0, 4.0, 4).unwrap(), |_| 1.0).unwrap();
    let u = thomas_solve(&sys).unwrap();
    // dx = 1 so the right-hand side is all ones.
    let expect = [1.5, 2.0, 1.5];
    for (a, b) in u.interior.iter().zip(expect) {
        assert!((a - b).abs() < 1e-14);
    }
}

fn naive_nufft(x: &[f64], y: &[f64], k: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); k];
    for (g, slot) in out.iter_mut().enumerate() {
        for j in 0..x.len() {
            let phase = -2.0 * std::f64::consts::PI * x[j] * g as f64;
            slot.re += y[j] * phase.cos();
            slot.im += y[j] * phase.sin();
        }
    }
    out
}

#[test]
fn nufft_matches_naive_loop() {
    let mut rng = GaussianSampler::new(42);
    for (n, k) in [(5, 8), (40, 8), (300, 64)] {
        let x: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.standard()).collect();
        let fast = nufft_direct(&x, &y, k).unwrap();
        for (a, b) in fast.coefficients().iter().zip(naive_nufft(&x, &y, k)) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn uniform_nufft_equals_dft() {
    for n in [8, 64, 256] {
        let v: Vec<f64> = (0..n).map(|j| (0.3 * j as f64).cos() + 0.01 * (j * j) as f64).collect();
        let x: Vec<f64> = (0..n).map(|j| j as f64 / n as f64).collect();
        let a = nufft_direct(&x, &v, n).unwrap();
        let b = dft_uniform(&v).unwrap();
        for (p, q) in a.coefficients().iter().zip(b.coefficients()) {
            assert!((p - q).norm() < 1e-10);
        }
    }
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = GaussianSampler::new(seed);
    Array2::from_shape_simple_fn((rows, cols), || rng.standard())
}

#[test]
fn power_iteration_matches_symmetric_eigensolver() {
    for (rows, cols, seed) in [(10, 50, 1), (20, 100, 2), (20, 100, 3), (20, 100, 4)] {
        let x = random_matrix(rows, cols, seed);
        let p = leading_eigenvector(x.view(), PowerIterOptions::default()).unwrap();
        let dense = DMatrix::from_fn(rows, cols, |i, j| x[[i, j]]);
        let eig = (&dense * dense.transpose()).symmetric_eigen();
        let top = eig.eigenvalues.imax();
        let v = eig.eigenvectors.column(top);
        let cos: f64 = p.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        assert!(cos.abs() > 1.0 - 1e-8, "seed {seed}: cos {cos}");
        assert_relative_eq!(p.dot(&p), 1.0, epsilon = 1e-12);
    }
}

/// Frequency indices where the reference solution concentrates, for the
/// right-hand side with components at 1, 4, 8 and 24 rad per unit length on
/// an interval of length 2.
#[test]
fn reference_solution_peaks() {
    let sys = assemble_poisson(&Grid1D::symmetric(64).unwrap(), g_rhs).unwrap();
    let u = thomas_solve(&sys).unwrap();
    let peaks = pick_peaks(&dft_uniform(&u.full).unwrap(), 4, 0.05);
    assert_eq!(peaks, vec![1, 3, 8]);
}
