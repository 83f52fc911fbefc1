//! Simulation of a thermoelastic two-material Bresse beam with transmission
//! conditions, its straight (Timoshenko) limit and its von Kármán limit.

pub mod config;
pub mod csv;
pub mod diagnostics;
pub mod error;
pub mod expr;
pub mod grid;
pub mod harness;
pub mod integrate;
pub mod interface;
pub mod limits;
pub mod params;
pub mod presets;
pub mod rhs;
pub mod state;
pub mod vonkarman;

pub use config::{load_config, load_config_or_preset, parse_config, preset, ModelKind, RunConfig};
pub use diagnostics::{
    energy_balance_residual, lyapunov, stationarity_gap, total_energy, transmission_residual,
    EnergyReport, TransmissionResidual,
};
pub use error::{Error, Result};
pub use expr::{parse, Expr, ParseError};
pub use grid::{build_grid, Grid};
pub use harness::{
    run_chi_scan, run_decay, run_l_limit_scan, run_simulation, ConvergenceTable, DecayOptions, DecayReport,
    RunSummary,
};
pub use integrate::{solve_tridiagonal, stable_dt, step_explicit, InterfaceScheme, StepControl, Stepper};
pub use interface::solve_interface;
pub use limits::{chi_scaled_params, consistency_fields, ChiScanConfig};
pub use params::{constitutive, validate_params, PhysicalParams, Segment, ValidationReport};
pub use rhs::{bresse_rhs, timoshenko_rhs, BeamModel, Rates};
pub use state::{apply_dirichlet, sample_initial_state, FieldState, ForcingSet, InitialData, SampledForcing};
