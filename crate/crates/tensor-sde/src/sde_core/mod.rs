//! Schwinger-Dyson equations: the closed large-N hierarchy on a momentum
//! grid, and the exact finite-N equations used for residual checks.

pub mod f_functions;
pub mod finite_n;
pub mod large_n;
pub mod solver;

pub use f_functions::{assemble_f, f_function, FClass};
pub use finite_n::{black_momenta, exact_sde_rhs, literal_sde_rhs, residual_size, Field, Sector, SectorProvider};
pub use large_n::{eval_g4_connected, eval_g4_limit, eval_g6, solve_g4_disconnected, G4mSlice, G6Class};
pub use solver::{residual, series_solve_g2, solve_g2, ConvergenceReport, G2Table, SeriesTable, SolveOptions, TwoPoint};
