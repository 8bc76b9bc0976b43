//! Numerical laboratory for the parabolic-elliptic Patlak-Keller-Segel
//! system with a point source at the origin,
//!
//! ```text
//! d_t rho = div(grad rho - rho grad c),   -Laplace c = rho - Z delta,   x in R^nu
//! ```
//!
//! for integer `nu >= 2`: radial simulation, a moment-based blow-up
//! criterion on initial data, and numerical checks of the estimates that
//! link the two.

pub mod criterion;
pub mod diagnostics;
pub mod error;
pub mod kernel;
pub mod math;
pub mod quadrature;
pub mod solver;
pub mod sweep;

pub use criterion::{
    blowup_rhs, evaluate_criterion, implied_m2_bound, Prediction, SourceStrength, Verdict,
};
pub use diagnostics::{
    hoelder_rhs, moment_derivative_exact, monitor_trajectory, InequalityReport,
    InteractionQuadrature, MomentBalance, MomentRecord, MonitorOptions,
};
pub use error::{Error, Result};
pub use kernel::{
    f, f_prime, interaction_v, interaction_v_ratio, interaction_v_rs, kernel_k,
    verify_f_decreasing, verify_kernel_bound, verify_kernel_bound_with, verify_u_monotone,
    BoundReport, BoundScan, KernelPoint,
};
pub use math::{
    gamma_half_integer, interpolation_residual, moment, sphere_area, total_mass, Dimension,
    RadialDensity,
};
pub use solver::{
    cumulative_mass, drift_velocity, init_profile, run, run_with_observer, step, MassProfile,
    ProfileFamily, RunStatus, SimulationOutcome, SolverConfig,
};
pub use sweep::{run_sweep, BlowUpCap, SweepBase, SweepParameter, SweepResult, SweepSpec};
