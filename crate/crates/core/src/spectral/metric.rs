use std::fmt;
use std::io::Write;
use std::str::FromStr;

use super::Spectrum;
use crate::csvfmt::fmt17;
use crate::{Error, Result};

/// Which spectrum normalises the relative difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Denominator {
    /// `|F[target](γ)|`, constant over training.
    #[default]
    Target,
    /// `|F[model](γ)|`.
    Model,
}

impl fmt::Display for Denominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Denominator::Target => "target",
            Denominator::Model => "model",
        })
    }
}

impl FromStr for Denominator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "target" => Ok(Denominator::Target),
            "model" => Ok(Denominator::Model),
            _ => Err(Error::InvalidArgument(format!("unknown denominator `{s}`"))),
        }
    }
}

/// `Δ_F(γ) = |F[model](γ) − F[target](γ)| / |F[denominator](γ)|`, or `+∞`
/// when the denominator amplitude is below `1e-14`.
pub fn rel_freq_diff(model: &Spectrum, target: &Spectrum, gamma: usize, denominator: Denominator) -> Result<f64> {
    let (m, t) = match (model.get(gamma), target.get(gamma)) {
        (Some(m), Some(t)) => (m, t),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "frequency index {gamma} out of range for spectra of length {} and {}",
                model.len(),
                target.len()
            )))
        }
    };
    let d = match denominator {
        Denominator::Target => t.norm(),
        Denominator::Model => m.norm(),
    };
    if d < 1e-14 {
        return Ok(f64::INFINITY);
    }
    Ok((m - t).norm() / d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub epoch: usize,
    pub wall_ms: f64,
    pub loss: f64,
    /// `Δ_F` at each selected peak, in the trace's peak order.
    pub deltas: Vec<f64>,
}

/// Per-frequency convergence history at a fixed set of peaks.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqTrace {
    selected_peaks: Vec<usize>,
    rows: Vec<TraceRow>,
}

impl FreqTrace {
    pub fn new(selected_peaks: Vec<usize>) -> Self {
        Self {
            selected_peaks,
            rows: Vec::new(),
        }
    }

    pub fn selected_peaks(&self) -> &[usize] {
        &self.selected_peaks
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn push(&mut self, row: TraceRow) -> Result<()> {
        if row.deltas.len() != self.selected_peaks.len() {
            return Err(Error::Shape(format!(
                "{} deltas for {} peaks",
                row.deltas.len(),
                self.selected_peaks.len()
            )));
        }
        if let Some(last) = self.rows.last() {
            if row.step <= last.step {
                return Err(Error::InvalidArgument(format!(
                    "recording step {} does not follow {}",
                    row.step, last.step
                )));
            }
        }
        if row.deltas.iter().any(|d| d.is_nan() || *d < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "negative or NaN relative difference at step {}",
                row.step
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// `Δ_F(γ)` at every recorded row.
    pub fn column(&self, gamma: usize) -> Result<Vec<f64>> {
        let c = self.peak_column(gamma)?;
        Ok(self.rows.iter().map(|r| r.deltas[c]).collect())
    }

    /// First recording step with `Δ_F(γ) ≤ τ`.
    pub fn step_to_threshold(&self, gamma: usize, tau: f64) -> Result<Option<usize>> {
        let c = self.peak_column(gamma)?;
        Ok(self.rows.iter().find(|r| r.deltas[c] <= tau).map(|r| r.step))
    }

    fn peak_column(&self, gamma: usize) -> Result<usize> {
        self.selected_peaks
            .iter()
            .position(|&g| g == gamma)
            .ok_or_else(|| Error::InvalidArgument(format!("frequency index {gamma} is not tracked")))
    }

    /// Header `step,epoch,wall_ms,loss,df_<γ>...`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "step,epoch,wall_ms,loss")?;
        for g in &self.selected_peaks {
            write!(w, ",df_{g}")?;
        }
        writeln!(w)?;
        for r in &self.rows {
            write!(w, "{},{},{},{}", r.step, r.epoch, fmt17(r.wall_ms), fmt17(r.loss))?;
            for d in &r.deltas {
                write!(w, ",{}", fmt17(*d))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
