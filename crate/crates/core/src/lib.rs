//! Coupled-tank level control laboratory.
//!
//! Two tanks in series, pump into tank 1, level of tank 2 is the controlled
//! variable. The crate provides:
//!
//! - [`plant`]: nonlinear orifice dynamics, first-order pump actuator, and the
//!   small-perturbation linearization with its second-order transfer function.
//! - [`sim`]: a fixed-step RK4 closed-loop simulator producing [`sim::Trace`]s.
//! - [`pid`]: PID with saturation and conditional-integration anti-windup, plus
//!   Ziegler-Nichols closed-loop tuning.
//! - [`fuzzy`]: a Mamdani inference engine used as a PID gain scheduler.
//! - [`analysis`]: step-response metrics and controller comparison reports.
//! - [`config`]: the TOML configuration schema used by the `tanklab` binary.

pub mod analysis;
pub mod config;
pub mod fuzzy;
pub mod ode;
pub mod pid;
pub mod plant;
pub mod sim;
pub use analysis::{compare, step_metrics, ComparisonReport, StepMetrics};
pub use fuzzy::FuzzyScheduler;
pub use pid::{PidGains, PidState};
pub use plant::{LinearModel, TankParams, TankState};
pub use sim::{run_scenario, Scenario, Trace};
