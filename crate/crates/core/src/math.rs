//! Special-function values for integer dimension, exact moment quadrature
//! over piecewise-constant radial profiles, and the moment interpolation
//! inequality.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Spatial dimension `nu >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(nu: u32) -> Result<Self> {
        if nu < 2 {
            return Err(Error::InvalidDimension(nu));
        }
        Ok(Self(nu))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    #[inline]
    pub(crate) fn as_i32(self) -> i32 {
        self.0 as i32
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `Gamma(two_k / 2)` by the recurrence `Gamma(x + 1) = x Gamma(x)` from
/// `Gamma(1) = 1` and `Gamma(1/2) = sqrt(pi)`.
pub fn gamma_half_integer(two_k: u32) -> Result<f64> {
    if two_k == 0 {
        return Err(invalid("two_k", 0.0, "Gamma(two_k/2) needs two_k >= 1"));
    }
    let (mut x, mut value) = if two_k.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (0.5, PI.sqrt())
    };
    let target = f64::from(two_k) / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    Ok(value)
}

/// `|S^{nu-1}| = 2 pi^{nu/2} / Gamma(nu/2)`, the surface area of the unit
/// sphere in `R^nu`.
pub fn sphere_area(dim: Dimension) -> f64 {
    let nu = dim.get();
    let half_power = PI.powi((nu / 2) as i32) * if nu % 2 == 1 { PI.sqrt() } else { 1.0 };
    // two_k = nu >= 2, never rejected
    2.0 * half_power / gamma_half_integer(nu).expect("nu >= 2")
}

/// `x^p`, using integer powers whenever `p` is integral so that the same
/// exponent always produces bit-identical results.
#[inline]
pub(crate) fn power(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// `int_a^b r^{p-1} dr = (b^p - a^p) / p` for `p > 0`.
#[inline]
pub(crate) fn shell_integral(a: f64, b: f64, p: f64) -> f64 {
    (power(b, p) - power(a, p)) / p
}

/// Cell-averaged radial density on faces `0 = r_0 < r_1 < ... < r_N`.
///
/// `values[i]` is the average of `rho` over the shell `r_i < |x| < r_{i+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDensity {
    faces: Vec<f64>,
    values: Vec<f64>,
    dim: Dimension,
}

impl RadialDensity {
    pub fn new(faces: Vec<f64>, values: Vec<f64>, dim: Dimension) -> Result<Self> {
        validate_faces(&faces)?;
        if values.len() + 1 != faces.len() {
            return Err(Error::InvalidDensity(format!(
                "{} values for {} faces",
                values.len(),
                faces.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidDensity(format!("cell {i} has value {v}")));
        }
        Ok(Self { faces, values, dim })
    }

    /// Builds a zero density on the given faces.
    pub fn zeros(faces: Vec<f64>, dim: Dimension) -> Result<Self> {
        let n = faces.len().saturating_sub(1);
        Self::new(faces, vec![0.0; n], dim)
    }

    #[inline]
    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn dim(&self) -> Dimension {
        self.dim
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    /// Outer radius `r_N`.
    pub fn radius(&self) -> f64 {
        *self.faces.last().expect("validated non-empty")
    }

    /// Volume of every shell cell.
    pub fn cell_volumes(&self) -> Vec<f64> {
        cell_volumes(&self.faces, self.dim)
    }

    /// Mass held by every cell.
    pub fn cell_masses(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(self.cell_volumes())
            .map(|(rho, vol)| rho * vol)
            .collect()
    }

    pub fn max_density(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Largest density the grid can hold with this mass: all of it in the
    /// smallest cell. A blow-up cap above this is never reached.
    pub fn concentration_limit(&self) -> f64 {
        let smallest = self
            .cell_volumes()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        total_mass(self) / smallest
    }

    /// `c * rho` on the same grid.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.faces.clone(),
            self.values.iter().map(|v| v * c).collect(),
            self.dim,
        )
    }
}

pub(crate) fn validate_faces(faces: &[f64]) -> Result<()> {
    if faces.len() < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least two faces, got {}",
            faces.len()
        )));
    }
    if faces[0] != 0.0 {
        return Err(Error::InvalidGrid(format!(
            "first face must be exactly 0, got {}",
            faces[0]
        )));
    }
    for (i, w) in faces.windows(2).enumerate() {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::InvalidGrid(format!(
                "faces not strictly increasing at index {}: {} -> {}",
                i + 1,
                w[0],
                w[1]
            )));
        }
    }
    Ok(())
}

pub(crate) fn cell_volumes(faces: &[f64], dim: Dimension) -> Vec<f64> {
    let area = sphere_area(dim);
    let nu = dim.as_f64();
    faces
        .windows(2)
        .map(|w| area * shell_integral(w[0], w[1], nu))
        .collect()
}

/// `M_mu = int |x|^mu rho dx`, with each cell integral taken in closed form.
pub fn moment(rho: &RadialDensity, mu: f64) -> Result<f64> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(invalid("mu", mu, "moment order must be finite and >= 0"));
    }
    let p = mu + rho.dim.as_f64();
    let area = sphere_area(rho.dim);
    let sum: f64 = rho
        .faces
        .windows(2)
        .zip(&rho.values)
        .map(|(w, v)| v * shell_integral(w[0], w[1], p))
        .sum();
    Ok(area * sum)
}

/// Total mass `M_0`.
pub fn total_mass(rho: &RadialDensity) -> f64 {
    moment(rho, 0.0).expect("mu = 0 is admissible")
}

/// `M_0^{(nu-2)/nu} M_nu^{2/nu} - M_2`, which is nonnegative for every
/// nonnegative density.
pub fn interpolation_residual(rho: &RadialDensity) -> f64 {
    let nu = rho.dim.as_f64();
    let m0 = total_mass(rho);
    let m2 = moment(rho, 2.0).expect("mu = 2 is admissible");
    let m_nu = moment(rho, nu).expect("mu = nu is admissible");
    power(m0, (nu - 2.0) / nu) * power(m_nu, 2.0 / nu) - m2
}
