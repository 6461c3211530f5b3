//! Gain settings, fibre conversion, sweeps, scaling fits, crossover search
//! and a Monte-Carlo cross-check of the density-matrix results.

mod crossover;
mod distance;
mod fit;
mod gain;
mod montecarlo;
mod sweep;

pub use crossover::{find_crossover, CrossoverReport, CrossoverSearch};
pub use distance::{distance_from_eta, eta_from_distance, FIBRE_LOSS_DB_PER_KM};
pub use fit::{fit_scaling_exponent, log_grid, FitReport, MIN_FIT_POINTS};
pub use gain::{golden_section_max, optimal_gain_setting, tune_gain_for_fidelity, TuneResult, TUNE_BRACKET, TUNE_TOL};
pub use montecarlo::{monte_carlo_oracle, McEstimate};
pub use sweep::{evaluate_point, resolve_gain, run_sweep, GainMode, SweepRow, SweepSpec, SweepVariable};
