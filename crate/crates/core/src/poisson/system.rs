use super::Grid1D;
use crate::{Error, Result};

/// Source term of the benchmark problem, as a plain-text formula.
pub const G_RHS_FORMULA: &str = "g(x)=sin(x)+4sin(4x)-8sin(8x)+16sin(24x)";

/// `g(x)=sin(x)+4sin(4x)-8sin(8x)+16sin(24x)`
pub fn g_rhs(x: f64) -> f64 {
    x.sin() + 4.0 * (4.0 * x).sin() - 8.0 * (8.0 * x).sin() + 16.0 * (24.0 * x).sin()
}

/// Central-difference system `A u = rhs` for the interior unknowns
/// `u_1 .. u_{n-1}`: `A = tridiag(-1, 2, -1)` and `rhs_i = Δx²·g(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagSystem {
    grid: Grid1D,
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    rhs: Vec<f64>,
}

impl TridiagSystem {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Number of subintervals of the underlying grid.
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// Number of unknowns, `n − 1`.
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn sub(&self) -> &[f64] {
        &self.sub
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn sup(&self) -> &[f64] {
        &self.sup
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// `A·u`.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let m = u.len();
        Ok((0..m)
            .map(|i| {
                let mut v = self.diag[i] * u[i];
                if i > 0 {
                    v += self.sub[i - 1] * u[i - 1];
                }
                if i + 1 < m {
                    v += self.sup[i] * u[i + 1];
                }
                v
            })
            .collect())
    }

    /// `‖A·u − rhs‖_∞`.
    pub fn residual_sup(&self, u: &[f64]) -> Result<f64> {
        Ok(self
            .apply(u)?
            .iter()
            .zip(&self.rhs)
            .fold(0.0f64, |m, (au, b)| m.max((au - b).abs())))
    }

    /// Quadratic `½ uᵀA u − uᵀ rhs` whose minimiser is the solution.
    pub fn quadratic_energy(&self, u: &[f64]) -> Result<f64> {
        let au = self.apply(u)?;
        Ok(u.iter()
            .zip(au.iter().zip(&self.rhs))
            .map(|(ui, (aui, bi))| 0.5 * ui * aui - ui * bi)
            .sum())
    }

    pub(crate) fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.size() {
            return Err(Error::Shape(format!(
                "vector has {} entries, system has {} unknowns",
                u.len(),
                self.size()
            )));
        }
        Ok(())
    }
}

pub fn assemble_poisson<G: Fn(f64) -> f64>(grid: &Grid1D, g: G) -> Result<TridiagSystem> {
    let n = grid.n();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let dx2 = grid.dx() * grid.dx();
    let m = n - 1;
    Ok(TridiagSystem {
        grid: grid.clone(),
        sub: vec![-1.0; m.saturating_sub(1)],
        diag: vec![2.0; m],
        sup: vec![-1.0; m.saturating_sub(1)],
        rhs: (1..n).map(|i| dx2 * g(grid.point(i))).collect(),
    })
}

/// Thomas algorithm for a general tridiagonal system. `sub[i]` couples row
/// `i + 1` to column `i`, `sup[i]` couples row `i` to column `i + 1`.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = diag.len();
    if m == 0 || rhs.len() != m || sub.len() + 1 != m || sup.len() + 1 != m {
        return Err(Error::Shape(format!(
            "tridiagonal bands of lengths ({}, {}, {}) with rhs of length {}",
            sub.len(),
            m,
            sup.len(),
            rhs.len()
        )));
    }
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::Singular("zero pivot in row 0".into()));
    }
    c[0] = if m > 1 { sup[0] / pivot } else { 0.0 };
    d[0] = rhs[0] / pivot;
    for i in 1..m {
        pivot = diag[i] - sub[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Singular(format!("zero pivot in row {i}")));
        }
        c[i] = if i + 1 < m { sup[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..m - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Reference solution `u* = A⁻¹ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    /// `u*_1 .. u*_{n-1}`.
    pub interior: Vec<f64>,
    /// `u*_0 .. u*_n` with the zero boundary values in place.
    pub full: Vec<f64>,
}

impl ReferenceSolution {
    pub fn sup_norm(&self) -> f64 {
        self.interior.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn thomas_solve(system: &TridiagSystem) -> Result<ReferenceSolution> {
    let interior = solve_tridiagonal(&system.sub, &system.diag, &system.sup, &system.rhs)?;
    let mut full = Vec::with_capacity(interior.len() + 2);
    full.push(0.0);
    full.extend_from_slice(&interior);
    full.push(0.0);
    Ok(ReferenceSolution { interior, full })
}
