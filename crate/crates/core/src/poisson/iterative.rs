use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use super::{ModeAnalysis, TridiagSystem};
use crate::csvfmt::fmt17;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Jacobi,
    GaussSeidel,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Jacobi => "jacobi",
            Method::GaussSeidel => "gauss_seidel",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jacobi" => Ok(Method::Jacobi),
            "gauss_seidel" => Ok(Method::GaussSeidel),
            other => Err(Error::InvalidArgument(format!(
                "unknown iterative method `{other}` (expected jacobi or gauss_seidel)"
            ))),
        }
    }
}

/// One Jacobi sweep, `u_i ← (u_{i−1} + u_{i+1} + rhs_i)/2` with zero
/// boundary neighbours.
pub fn jacobi_step(system: &TridiagSystem, u: &[f64]) -> Result<Vec<f64>> {
    system.check_len(u)?;
    let m = u.len();
    let rhs = system.rhs();
    Ok((0..m)
        .map(|i| {
            let left = if i > 0 { u[i - 1] } else { 0.0 };
            let right = if i + 1 < m { u[i + 1] } else { 0.0 };
            (left + right + rhs[i]) / 2.0
        })
        .collect())
}

/// One in-order Gauss–Seidel sweep: the left neighbour is already updated.
pub fn gauss_seidel_step(system: &TridiagSystem, u: &[f64]) -> Result<Vec<f64>> {
    system.check_len(u)?;
    let mut next = u.to_vec();
    gauss_seidel_in_place(system, &mut next);
    Ok(next)
}

fn gauss_seidel_in_place(system: &TridiagSystem, u: &mut [f64]) {
    let m = u.len();
    let rhs = system.rhs();
    for i in 0..m {
        let left = if i > 0 { u[i - 1] } else { 0.0 };
        let right = if i + 1 < m { u[i + 1] } else { 0.0 };
        u[i] = (left + right + rhs[i]) / 2.0;
    }
}

#[derive(Debug, Clone)]
pub struct IterateOptions {
    pub method: Method,
    pub max_iters: usize,
    /// Stop once `‖u − u*‖_∞ ≤ tol`; checked before every sweep.
    pub tol: f64,
    /// Sine modes `k` whose amplitudes `α_k` are recorded.
    pub track_modes: Vec<usize>,
    /// Keep one record every this many iterations (the initial and final
    /// iterates are always kept).
    pub record_every: usize,
    pub wall_clock: bool,
}

impl IterateOptions {
    pub fn new(method: Method, max_iters: usize, tol: f64) -> Self {
        Self {
            method,
            max_iters,
            tol,
            track_modes: Vec::new(),
            record_every: 1,
            wall_clock: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub iteration: usize,
    pub sup_error: f64,
    /// Zero unless wall-clock recording is enabled.
    pub wall_ms: f64,
    /// `α_k` of `u − u*` for each tracked mode.
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct IterativeRun {
    pub method: Method,
    pub tracked_modes: Vec<usize>,
    pub records: Vec<IterRecord>,
    /// Sweeps performed until the tolerance was met, if it was.
    pub converged_at: Option<usize>,
    pub final_u: Vec<f64>,
}

impl IterativeRun {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iteration)
    }

    pub fn final_sup_error(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.sup_error)
    }

    /// First recorded sweep at which the amplitude of tracked mode `k` has
    /// fallen to half its initial size. A relative slack of `1e-9` absorbs
    /// rounding for modes that halve exactly.
    pub fn first_halving(&self, k: usize) -> Option<usize> {
        let c = self.tracked_modes.iter().position(|&m| m == k)?;
        let a0 = self.records.first()?.alphas[c].abs();
        self.records
            .iter()
            .skip(1)
            .find(|r| r.alphas[c].abs() <= 0.5 * a0 * (1.0 + 1e-9))
            .map(|r| r.iteration)
    }

    /// Header `iter,wall_ms,sup_error[,alpha_<k>...]`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = String::from("iter,wall_ms,sup_error");
        for k in &self.tracked_modes {
            header.push_str(&format!(",alpha_{k}"));
        }
        writeln!(w, "{header}")?;
        for r in &self.records {
            let mut line = format!("{},{},{}", r.iteration, fmt17(r.wall_ms), fmt17(r.sup_error));
            for a in &r.alphas {
                line.push(',');
                line.push_str(&fmt17(*a));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Runs Jacobi or Gauss–Seidel from `u0`, recording `‖u^l − u*‖_∞` and the
/// tracked mode amplitudes of `u^l − u*`.
pub fn iterate(
    system: &TridiagSystem,
    u0: &[f64],
    u_star: &[f64],
    opts: &IterateOptions,
) -> Result<IterativeRun> {
    system.check_len(u0)?;
    system.check_len(u_star)?;
    let modes = ModeAnalysis::new(system.n(), &opts.track_modes)?;
    let every = opts.record_every.max(1);
    let start = Instant::now();
    let wall = |wall_clock: bool| {
        if wall_clock {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    };
    let record = |l: usize, u: &[f64]| -> Result<IterRecord> {
        let err: Vec<f64> = u.iter().zip(u_star).map(|(a, b)| a - b).collect();
        Ok(IterRecord {
            iteration: l,
            sup_error: sup_distance(u, u_star),
            wall_ms: wall(opts.wall_clock),
            alphas: modes.amplitudes(&err)?,
        })
    };

    let mut u = u0.to_vec();
    let mut records = vec![record(0, &u)?];
    let mut converged_at = None;
    let mut l = 0;
    loop {
        let sup = sup_distance(&u, u_star);
        if !sup.is_finite() {
            return Err(Error::NonFinite(format!("iterate diverged at sweep {l}")));
        }
        if sup <= opts.tol {
            converged_at = Some(l);
            break;
        }
        if l == opts.max_iters {
            break;
        }
        match opts.method {
            Method::Jacobi => u = jacobi_step(system, &u)?,
            Method::GaussSeidel => gauss_seidel_in_place(system, &mut u),
        }
        l += 1;
        if l % every == 0 {
            records.push(record(l, &u)?);
        }
    }
    if records.last().map(|r| r.iteration) != Some(l) {
        records.push(record(l, &u)?);
    }
    Ok(IterativeRun {
        method: opts.method,
        tracked_modes: opts.track_modes.clone(),
        records,
        converged_at,
        final_u: u,
    })
}
