//! Central-difference solution of `-u'' = g` on `(a, b)` with `u(a) = u(b) = 0`,
//! classical iterative solvers for the resulting tridiagonal system, and the
//! sine-mode analysis of the Jacobi error.

mod grid;
mod hybrid;
mod iterative;
mod modes;
mod system;

pub use grid::Grid1D;
pub use hybrid::{run_hybrid, DnnSolver, HybridConfig, HybridRecord, HybridReport, PlateauDetector, SwitchRule};
pub use iterative::{gauss_seidel_step, iterate, jacobi_step, IterRecord, IterateOptions, IterativeRun, Method};
pub use modes::{halving_count, halving_time, jacobi_eigen, mode_amplitudes, sine_mode, ModeAnalysis};
pub use system::{assemble_poisson, g_rhs, solve_tridiagonal, thomas_solve, ReferenceSolution, TridiagSystem, G_RHS_FORMULA};
