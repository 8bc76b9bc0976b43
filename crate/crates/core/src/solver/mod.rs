//! Mass-conservative finite-volume integrator for radially symmetric
//! solutions of
//!
//! ```text
//! d_t rho = div(grad rho - rho grad c),   -Laplace c = rho - Z delta
//! ```
//!
//! on `[0, R]` with a reflecting wall at `R`. The drift is exact for radial
//! data: by Newton's theorem `grad c` at radius `r` only sees the mass inside
//! `r` and the point source, so no elliptic solve is needed.

mod grid;
mod mass;
mod profile;
mod run;
mod step;

pub use grid::{geometric_faces, uniform_faces};
pub use mass::{cumulative_mass, drift_velocity, MassProfile};
pub use profile::{init_profile, ProfileFamily};
pub use run::{run, run_with_observer, RunStatus, SimulationOutcome};
pub use step::step;

use crate::criterion::SourceStrength;
use crate::error::{invalid, Error, Result};
use crate::math::Dimension;

/// Grid, time-stepping and blow-up detection parameters of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dim: Dimension,
    pub z: SourceStrength,
    /// Truncation radius `R`.
    pub radius: f64,
    pub n_cells: usize,
    /// Ratio of successive cell widths; 1 is a uniform grid.
    pub stretch: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub dt_min: f64,
    /// Absolute density threshold taken as the numerical signature of
    /// blow-up.
    pub rho_cap: f64,
    pub snapshot_every: f64,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, v, "must be finite and > 0"))
            }
        };
        positive("radius", self.radius)?;
        positive("t_end", self.t_end)?;
        positive("dt_min", self.dt_min)?;
        positive("rho_cap", self.rho_cap)?;
        positive("snapshot_every", self.snapshot_every)?;
        if self.n_cells < 16 {
            return Err(invalid(
                "n_cells",
                self.n_cells as f64,
                "need at least 16 cells",
            ));
        }
        if !(self.stretch >= 1.0) || !self.stretch.is_finite() {
            return Err(invalid("stretch", self.stretch, "must be finite and >= 1"));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(invalid("cfl", self.cfl, "must lie in (0, 1)"));
        }
        if !(self.dt_min < self.t_end) {
            return Err(invalid("dt_min", self.dt_min, "must be smaller than t_end"));
        }
        Ok(())
    }

    /// Cell faces `0 = r_0 < ... < r_N = R` for this configuration.
    pub fn faces(&self) -> Result<Vec<f64>> {
        self.validate()?;
        if self.stretch == 1.0 {
            Ok(uniform_faces(self.n_cells, self.radius))
        } else {
            geometric_faces(self.n_cells, self.radius, self.stretch)
        }
    }
}

pub(crate) fn check_dim(expected: Dimension, got: Dimension) -> Result<()> {
    if expected != got {
        return Err(Error::Precondition(format!(
            "density is {got}-dimensional but the solver is configured for {expected}"
        )));
    }
    Ok(())
}
