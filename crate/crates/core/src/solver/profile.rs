use super::SolverConfig;
use crate::error::{invalid, Error, Result};
use crate::math::{shell_integral, sphere_area, total_mass, Dimension, RadialDensity};
use crate::quadrature::GaussLegendre;

/// Largest fraction of the profile's mass allowed beyond the grid.
pub const MAX_TRUNCATED_FRACTION: f64 = 0.01;

/// Shapes of initial data, all radially symmetric.
type Shape = Box<dyn Fn(f64) -> f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileFamily {
    /// `exp(-r^2 / 2 sigma^2)`
    Gaussian { sigma: f64 },
    /// Constant on `|x| < radius`.
    UniformBall { radius: f64 },
    /// `exp(-(r - center)^2 / 2 width^2)`
    Ring { center: f64, width: f64 },
}

impl ProfileFamily {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, v, "profile parameter must be finite and > 0"))
            }
        };
        match *self {
            ProfileFamily::Gaussian { sigma } => positive("sigma", sigma),
            ProfileFamily::UniformBall { radius } => positive("radius", radius),
            ProfileFamily::Ring { center, width } => {
                positive("center", center)?;
                positive("width", width)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProfileFamily::Gaussian { .. } => "gaussian profile",
            ProfileFamily::UniformBall { .. } => "uniform ball profile",
            ProfileFamily::Ring { .. } => "ring profile",
        }
    }

    /// Smooth shape and its decay length, `None` for the uniform ball.
    fn smooth_shape(&self) -> Option<(Shape, f64, f64)> {
        match *self {
            ProfileFamily::Gaussian { sigma } => {
                let k = 0.5 / (sigma * sigma);
                Some((Box::new(move |r| (-k * r * r).exp()), 0.0, sigma))
            }
            ProfileFamily::Ring { center, width } => {
                let k = 0.5 / (width * width);
                Some((
                    Box::new(move |r| (-k * (r - center) * (r - center)).exp()),
                    center,
                    width,
                ))
            }
            ProfileFamily::UniformBall { .. } => None,
        }
    }

    /// Unnormalised mass of every cell and the mass beyond the last face.
    fn cell_masses(&self, faces: &[f64], dim: Dimension) -> (Vec<f64>, f64) {
        let area = sphere_area(dim);
        let nu = dim.as_f64();
        match self.smooth_shape() {
            None => {
                let ProfileFamily::UniformBall { radius } = *self else {
                    unreachable!()
                };
                let masses = faces
                    .windows(2)
                    .map(|w| area * shell_integral(w[0].min(radius), w[1].min(radius), nu))
                    .collect();
                let outer = *faces.last().unwrap();
                let tail = area * shell_integral(outer.min(radius), radius, nu);
                (masses, tail)
            }
            Some((shape, center, scale)) => {
                let rule = GaussLegendre::new(8);
                let p = dim.as_i32() - 1;
                let weight = |r: f64| r.powi(p) * shape(r);
                let masses = faces
                    .windows(2)
                    .map(|w| area * rule.integrate(w[0], w[1], weight))
                    .collect();
                let outer = *faces.last().unwrap();
                let far = outer.max(center) + 40.0 * scale;
                let panels = 400;
                let h = (far - outer) / panels as f64;
                let tail: f64 = (0..panels)
                    .map(|k| {
                        let a = outer + k as f64 * h;
                        rule.integrate(a, a + h, weight)
                    })
                    .sum();
                (masses, area * tail)
            }
        }
    }
}

/// Cell-averaged initial datum of the given family on the config grid,
/// rescaled so that its total mass is exactly `mass`.
pub fn init_profile(
    family: ProfileFamily,
    mass: f64,
    config: &SolverConfig,
) -> Result<RadialDensity> {
    family.validate()?;
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(invalid("mass", mass, "must be finite and > 0"));
    }
    let faces = config.faces()?;
    let (masses, tail) = family.cell_masses(&faces, config.dim);
    let inside: f64 = masses.iter().sum();
    if !(inside > 0.0) {
        return Err(Error::Truncation {
            what: family.name(),
            fraction: 1.0,
            radius: config.radius,
        });
    }
    let fraction = tail / (inside + tail);
    if fraction > MAX_TRUNCATED_FRACTION {
        return Err(Error::Truncation {
            what: family.name(),
            fraction,
            radius: config.radius,
        });
    }
    let dim = config.dim;
    let volumes = crate::math::cell_volumes(&faces, dim);
    let values: Vec<f64> = masses.iter().zip(&volumes).map(|(m, v)| m / v).collect();
    let rho = RadialDensity::new(faces, values, dim)?;
    rho.scaled(mass / total_mass(&rho))
}
