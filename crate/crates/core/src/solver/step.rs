use super::grid::Geometry;
use super::{check_dim, SolverConfig};
use crate::error::{Error, Result};
use crate::math::RadialDensity;

/// Explicit finite-volume update with central diffusion and first-order
/// upwind drift. Face fluxes telescope, so the only mass change is
/// rounding.
#[derive(Debug, Clone)]
pub(crate) struct Stepper {
    geometry: Geometry,
    z: f64,
    cfl: f64,
    flux: Vec<f64>,
}

/// What one [`Stepper::advance`] did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct StepStats {
    pub max_density: f64,
    /// Mass removed by clipping negative values.
    pub clipped_mass: f64,
}

impl Stepper {
    pub fn new(faces: &[f64], config: &SolverConfig) -> Self {
        let geometry = Geometry::new(faces, config.dim);
        let n = geometry.n_cells();
        Self {
            geometry,
            z: config.z.get(),
            cfl: config.cfl,
            flux: vec![0.0; n + 1],
        }
    }

    /// Computes drift and face fluxes for `rho` and returns the largest
    /// stable time step: `cfl` divided by the largest total outflow rate of
    /// any cell, which keeps every update a convex combination.
    pub fn prepare(&mut self, rho: &[f64]) -> f64 {
        let g = &self.geometry;
        let n = rho.len();
        let flux = &mut self.flux[..=n];
        let diffusion = &g.diffusion[..=n];
        let (volume, inv_volume, diffusion_out) =
            (&g.volume[..n], &g.inv_volume[..n], &g.diffusion_out[..n]);

        // zero flux through the origin (zero area) and the reflecting wall
        flux[0] = 0.0;
        flux[n] = 0.0;
        let mut mass = 0.0;
        let mut max_rate: f64 = 0.0;
        // inward advective outflow of the cell left of the current face
        let mut inward_prev = 0.0;
        for i in 1..n {
            let (left, right) = (rho[i - 1], rho[i]);
            mass += left * volume[i - 1];
            // A_i v_i = Z - M(r_i) by Newton's theorem
            let carried = self.z - mass;
            let outward = if carried > 0.0 { carried } else { 0.0 };
            let inward = outward - carried;
            flux[i] = outward * left - inward * right - diffusion[i] * (right - left);
            let rate = diffusion_out[i - 1] + (outward + inward_prev) * inv_volume[i - 1];
            if rate > max_rate {
                max_rate = rate;
            }
            inward_prev = inward;
        }
        let rate = diffusion_out[n - 1] + inward_prev * inv_volume[n - 1];
        if rate > max_rate {
            max_rate = rate;
        }
        self.cfl / max_rate
    }

    /// Applies the fluxes from the last [`prepare`](Self::prepare) over `dt`.
    pub fn advance(&self, rho: &mut [f64], dt: f64, t: f64) -> Result<StepStats> {
        let g = &self.geometry;
        let n = rho.len();
        let (flux, volume, inv_volume) = (&self.flux[..=n], &g.volume[..n], &g.inv_volume[..n]);
        let mut max_density: f64 = 0.0;
        let mut clipped_mass = 0.0;
        let mut finite = true;
        for i in 0..n {
            let mut next = rho[i] - dt * (flux[i + 1] - flux[i]) * inv_volume[i];
            finite &= next.is_finite();
            if next < 0.0 {
                clipped_mass -= next * volume[i];
                next = 0.0;
            }
            if next > max_density {
                max_density = next;
            }
            rho[i] = next;
        }
        if !finite {
            let cell = rho.iter().position(|v| !v.is_finite()).unwrap_or(0);
            return Err(Error::NonFinite { cell, t: t + dt });
        }
        Ok(StepStats {
            max_density,
            clipped_mass,
        })
    }
}

/// One explicit step of `state` at the largest stable time step.
pub fn step(state: &RadialDensity, config: &SolverConfig) -> Result<(RadialDensity, f64)> {
    check_dim(config.dim, state.dim())?;
    config.validate()?;
    let mut stepper = Stepper::new(state.faces(), config);
    let dt = stepper.prepare(state.values());
    if dt < config.dt_min {
        return Err(Error::StepCollapse {
            t: 0.0,
            dt,
            dt_min: config.dt_min,
        });
    }
    let mut next = state.clone();
    stepper.advance(next.values_mut(), dt, 0.0)?;
    Ok((next, dt))
}
