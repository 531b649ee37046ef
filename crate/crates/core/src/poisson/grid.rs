use crate::{Error, Result};

/// `n + 1` evenly spaced points `x_i = a + i·Δx` with `Δx = (b − a)/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 subintervals, got {n}"
            )));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidArgument(format!("invalid interval [{a}, {b}]")));
        }
        Ok(Self { a, b, n })
    }

    /// The interval `[-1, 1]`.
    pub fn symmetric(n: usize) -> Result<Self> {
        Self::new(-1.0, 1.0, n)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of subintervals.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of points, `n + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i == self.n {
            self.b
        } else {
            self.a + i as f64 * self.dx()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |i| self.point(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_spacing() {
        let g = Grid1D::symmetric(64).unwrap();
        let pts: Vec<f64> = g.points().collect();
        assert_eq!(pts.len(), 65);
        assert_eq!(pts[0], -1.0);
        assert_eq!(pts[64], 1.0);
        assert_eq!(g.dx(), 2.0 / 64.0);
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid1D::new(-1.0, 1.0, 1).is_err());
        assert!(Grid1D::new(1.0, -1.0, 8).is_err());
        assert!(Grid1D::new(0.0, f64::INFINITY, 8).is_err());
    }
}
