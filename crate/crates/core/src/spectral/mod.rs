//! Fourier transforms on sample sets, peak selection and the per-frequency
//! convergence metric.

mod decomposition;
mod metric;
mod peaks;
mod transform;

pub use decomposition::{grad_decomposition, GradDecomposition};
pub use metric::{rel_freq_diff, Denominator, FreqTrace, TraceRow};
pub use peaks::{pick_peaks, DEFAULT_MAX_PEAKS, DEFAULT_MIN_REL_AMPLITUDE};
pub use transform::{dft_uniform, nufft_direct, Spectrum};
