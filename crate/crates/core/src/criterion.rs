//! Moment-based blow-up criterion on initial data.
//!
//! Blow-up is predicted when
//!
//! ```text
//! M_nu^{(nu-2)/nu} < M_0^{2-2/nu} / ((nu-1) 2^nu |S^{nu-1}|)
//!                    - Z M_0^{1-2/nu} / (2 (nu-1) |S^{nu-1}|)
//! ```
//!
//! In two dimensions the left side is identically 1 and the condition reads
//! `1 + Z/(4 pi) < M_0/(8 pi)`.

use crate::error::{invalid, Error, Result};
use crate::math::{power, sphere_area, Dimension};

/// Strength `Z` of the point source at the origin. Positive is repulsive,
/// negative attractive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SourceStrength(f64);

impl SourceStrength {
    pub const ZERO: Self = Self(0.0);

    pub fn new(z: f64) -> Result<Self> {
        if !z.is_finite() {
            return Err(invalid("Z", z, "source strength must be finite"));
        }
        Ok(Self(z))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prediction {
    BlowUpPredicted,
    /// The criterion does not apply. This is not a statement of global
    /// existence.
    Inconclusive,
}

impl std::fmt::Display for Prediction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Prediction::BlowUpPredicted => "BlowUpPredicted",
            Prediction::Inconclusive => "Inconclusive",
        })
    }
}

/// Outcome of [`evaluate_criterion`] with every intermediate quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub predicted: Prediction,
    /// `M_nu^{(nu-2)/nu}`
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; blow-up is predicted iff strictly positive.
    pub margin: f64,
    pub dim: Dimension,
    pub z: SourceStrength,
    pub m0: f64,
    pub m_nu: f64,
}

impl Verdict {
    pub fn is_predicted(&self) -> bool {
        self.predicted == Prediction::BlowUpPredicted
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} lhs={} rhs={} margin={} (nu={} Z={} M0={} M_nu={})",
            self.predicted,
            self.lhs,
            self.rhs,
            self.margin,
            self.dim,
            self.z.get(),
            self.m0,
            self.m_nu
        )
    }
}

fn check_mass(m0: f64) -> Result<()> {
    if !(m0 > 0.0) || !m0.is_finite() {
        return Err(invalid("M0", m0, "total mass must be finite and > 0"));
    }
    Ok(())
}

/// Right-hand side of the blow-up condition. Negative values are legal and
/// mean no initial datum can satisfy the condition.
pub fn blowup_rhs(dim: Dimension, z: SourceStrength, m0: f64) -> Result<f64> {
    check_mass(m0)?;
    let nu = dim.as_f64();
    let area = sphere_area(dim);
    let aggregation = power(m0, (2.0 * nu - 2.0) / nu) / ((nu - 1.0) * power(2.0, nu) * area);
    let source = z.get() * power(m0, (nu - 2.0) / nu) / (2.0 * (nu - 1.0) * area);
    Ok(aggregation - source)
}

/// `M_nu^{(nu-2)/nu}` with the conventions `nu = 2 -> 1` and
/// `M_nu = 0, nu > 2 -> 0`.
pub(crate) fn moment_power(dim: Dimension, m_nu: f64) -> f64 {
    let nu = dim.as_f64();
    if dim.get() == 2 {
        1.0
    } else if m_nu == 0.0 {
        0.0
    } else {
        power(m_nu, (nu - 2.0) / nu)
    }
}

pub fn evaluate_criterion(
    dim: Dimension,
    z: SourceStrength,
    m0: f64,
    m_nu: f64,
) -> Result<Verdict> {
    check_mass(m0)?;
    if !(m_nu >= 0.0) || !m_nu.is_finite() {
        return Err(invalid("M_nu", m_nu, "moment must be finite and >= 0"));
    }
    let rhs = blowup_rhs(dim, z, m0)?;
    let lhs = moment_power(dim, m_nu);
    let predicted = if lhs < rhs {
        Prediction::BlowUpPredicted
    } else {
        Prediction::Inconclusive
    };
    Ok(Verdict {
        predicted,
        lhs,
        rhs,
        margin: rhs - lhs,
        dim,
        z,
        m0,
        m_nu,
    })
}

/// Explicit bound `M_0^{(nu-2)/nu} rhs^{2/(nu-2)}` on `M_2` for data that
/// satisfy the blow-up condition, from `M_2 <= M_0^{(nu-2)/nu} M_nu^{2/nu}`.
/// Only meaningful for `nu > 2`.
pub fn implied_m2_bound(dim: Dimension, z: SourceStrength, m0: f64) -> Result<f64> {
    if dim.get() == 2 {
        return Err(Error::Precondition(
            "the second-moment bound is empty in dimension two".into(),
        ));
    }
    let rhs = blowup_rhs(dim, z, m0)?;
    if !(rhs > 0.0) {
        return Err(Error::Precondition(format!(
            "blow-up right-hand side {rhs} <= 0, the bound is vacuous"
        )));
    }
    let nu = dim.as_f64();
    Ok(power(m0, (nu - 2.0) / nu) * power(rhs, 2.0 / (nu - 2.0)))
}
