use crate::criterion::SourceStrength;
use crate::error::{Error, Result};
use crate::math::{sphere_area, Dimension, RadialDensity};

/// Cumulative mass `M(r_i)` inside every face.
#[derive(Debug, Clone, PartialEq)]
pub struct MassProfile {
    pub faces: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub dim: Dimension,
}

impl MassProfile {
    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("at least one face")
    }
}

pub fn cumulative_mass(rho: &RadialDensity) -> MassProfile {
    let mut cumulative = Vec::with_capacity(rho.faces().len());
    cumulative.push(0.0);
    let mut acc = 0.0;
    for (v, vol) in rho.values().iter().zip(rho.cell_volumes()) {
        acc += v * vol;
        cumulative.push(acc);
    }
    MassProfile {
        faces: rho.faces().to_vec(),
        cumulative,
        dim: rho.dim(),
    }
}

/// Radial drift `(Z - M(r_i)) / (|S^{nu-1}| r_i^{nu-1})` at face `i >= 1`;
/// negative values point inward.
pub fn drift_velocity(profile: &MassProfile, z: SourceStrength, at_face: usize) -> Result<f64> {
    if at_face == 0 {
        return Err(Error::Precondition(
            "drift at the origin face is undefined (zero area)".into(),
        ));
    }
    let r = *profile.faces.get(at_face).ok_or_else(|| {
        Error::Precondition(format!(
            "face {at_face} out of range for {} faces",
            profile.faces.len()
        ))
    })?;
    let nu = profile.dim.as_i32();
    Ok((z.get() - profile.cumulative[at_face]) / (sphere_area(profile.dim) * r.powi(nu - 1)))
}
