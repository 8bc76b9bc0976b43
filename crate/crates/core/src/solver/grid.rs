use crate::error::{invalid, Result};
use crate::math::{shell_integral, sphere_area, Dimension};

/// `n + 1` equispaced faces on `[0, radius]`.
pub fn uniform_faces(n: usize, radius: f64) -> Vec<f64> {
    let mut faces: Vec<f64> = (0..=n).map(|i| radius * i as f64 / n as f64).collect();
    faces[n] = radius;
    faces
}

/// Faces whose widths grow by `stretch` from the origin outward.
pub fn geometric_faces(n: usize, radius: f64, stretch: f64) -> Result<Vec<f64>> {
    if !(stretch > 1.0) {
        return Err(invalid(
            "stretch",
            stretch,
            "geometric grid needs stretch > 1",
        ));
    }
    let first = radius * (stretch - 1.0) / (stretch.powi(n as i32) - 1.0);
    let mut faces = Vec::with_capacity(n + 1);
    faces.push(0.0);
    let mut width = first;
    let mut r = 0.0;
    for _ in 0..n {
        r += width;
        faces.push(r);
        width *= stretch;
    }
    faces[n] = radius;
    Ok(faces)
}

/// Static geometry of a grid: cell volumes and the coefficients
/// of the flux discretisation.
#[derive(Debug, Clone)]
pub(crate) struct Geometry {
    /// `A_i / (m_i - m_{i-1})` for interior faces, 0 on the boundary.
    pub diffusion: Vec<f64>,
    pub volume: Vec<f64>,
    pub inv_volume: Vec<f64>,
    /// Diffusive outflow rate of every cell per unit density.
    pub diffusion_out: Vec<f64>,
}

impl Geometry {
    pub fn new(faces: &[f64], dim: Dimension) -> Self {
        let n = faces.len() - 1;
        let nu = dim.as_i32();
        let s = sphere_area(dim);
        let area: Vec<f64> = faces.iter().map(|r| s * r.powi(nu - 1)).collect();
        let mid: Vec<f64> = faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut diffusion = vec![0.0; n + 1];
        for i in 1..n {
            diffusion[i] = area[i] / (mid[i] - mid[i - 1]);
        }
        let volume: Vec<f64> = faces
            .windows(2)
            .map(|w| s * shell_integral(w[0], w[1], dim.as_f64()))
            .collect();
        let inv_volume: Vec<f64> = volume.iter().map(|v| 1.0 / v).collect();
        let diffusion_out = (0..n)
            .map(|i| (diffusion[i] + diffusion[i + 1]) * inv_volume[i])
            .collect();
        Self {
            diffusion,
            volume,
            inv_volume,
            diffusion_out,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.volume.len()
    }
}
