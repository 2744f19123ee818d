//! Semi-structural small-open-economy model with a household credit friction.
//!
//! The crate assembles the model's equations into a stacked linear
//! rational-expectations system, solves for the saddle-path law of motion,
//! and provides impulse responses, seeded stochastic simulation, policy-rule
//! loss comparisons, and an OLS-with-HAC regression toolkit for the
//! spread-leverage evidence that motivates the friction.

pub mod calibration;
pub mod empirics;
pub mod error;
pub mod model;
pub mod simulate;
pub mod solver;

pub use calibration::{
    aggregate_spread_elasticity, derive_budget_coefficients, load_calibration, Calibration,
    PresetName, Scenario, Shock,
};
pub use error::{Error, Result};
pub use model::{build_system, residuals, ModelSystem, PolicyRule, VariableRegistry};
pub use simulate::{
    compare_rules, irf, irf_absolute, loss, scenario_sweep, stochastic_simulate, LossReport,
    LossVersion, PathSet,
};
pub use solver::{solve, spectral_report, Determinacy, Solution, SpectralReport};
