//! Both sides of the `nu`-th moment balance along trajectories.
//!
//! For a classical solution
//!
//! ```text
//! dM_nu/dt = 2 nu (nu-1) M_{nu-2} + nu Z M_0 / |S^{nu-1}|
//!            - nu / (2 |S^{nu-1}|) int int V(x, y) rho(x) rho(y) dx dy
//! ```
//!
//! and bounding `V >= 2^{2-nu}` together with
//! `M_{nu-2} <= M_nu^{(nu-2)/nu} M_0^{2/nu}` gives the closed upper bound
//! evaluated by [`hoelder_rhs`].
//!
//! For radial data the double integral reduces to
//! `sum_ij m_i m_j <V>(r_i / r_j)` where `<V>(tau)` is the average of `V`
//! over the relative angle with measure `sin^{nu-2}(theta) d theta`. By scale
//! invariance `<V>` depends on the radius ratio only, so it is tabulated
//! once per dimension.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::criterion::{evaluate_criterion, moment_power, SourceStrength, Verdict};
use crate::error::{invalid, Error, Result};
use crate::kernel::v_gap;
use crate::math::{moment, sphere_area, total_mass, Dimension, RadialDensity};
use crate::quadrature::GaussLegendre;

/// Moments and monitors of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRecord {
    pub t: f64,
    pub m0: f64,
    pub m2: f64,
    pub m_numinus2: f64,
    pub m_nu: f64,
    pub max_density: f64,
    /// Last time step taken before the snapshot, 0 at `t = 0`.
    pub dt: f64,
    /// Fraction of the mass held by the innermost four cells.
    pub mass_in_core: f64,
    /// Density of the cell next to the reflecting wall.
    pub wall_density: f64,
}

impl MomentRecord {
    pub const CSV_HEADER: &'static str =
        "t,m0,m2,m_numinus2,m_nu,max_density,dt,mass_in_core,wall_density";

    pub fn from_density(t: f64, rho: &RadialDensity, dt: f64) -> Self {
        let nu = rho.dim().as_f64();
        let m0 = total_mass(rho);
        let core: f64 = rho.cell_masses().iter().take(4).sum();
        Self {
            t,
            m0,
            m2: moment(rho, 2.0).expect("valid order"),
            m_numinus2: moment(rho, nu - 2.0).expect("valid order"),
            m_nu: moment(rho, nu).expect("valid order"),
            max_density: rho.max_density(),
            dt,
            mass_in_core: if m0 > 0.0 { core / m0 } else { 0.0 },
            wall_density: *rho.values().last().expect("non-empty grid"),
        }
    }

    pub fn write_csv_row<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            self.t,
            self.m0,
            self.m2,
            self.m_numinus2,
            self.m_nu,
            self.max_density,
            self.dt,
            self.mass_in_core,
            self.wall_density
        )
    }
}

/// `2 nu (nu-1) M_nu^{(nu-2)/nu} M_0^{2/nu} - nu 2^{1-nu} M_0^2 / |S^{nu-1}|
/// + nu Z M_0 / |S^{nu-1}|`.
pub fn hoelder_rhs(dim: Dimension, z: SourceStrength, m0: f64, m_nu: f64) -> Result<f64> {
    if !(m0 > 0.0) || !m0.is_finite() {
        return Err(invalid("M0", m0, "total mass must be finite and > 0"));
    }
    if !(m_nu >= 0.0) || !m_nu.is_finite() {
        return Err(invalid("M_nu", m_nu, "moment must be finite and >= 0"));
    }
    let nu = dim.as_f64();
    let area = sphere_area(dim);
    let diffusion = 2.0 * nu * (nu - 1.0) * moment_power(dim, m_nu) * m0.powf(2.0 / nu);
    let aggregation = nu * 2f64.powi(1 - dim.as_i32()) / area * m0 * m0;
    let source = nu * z.get() * m0 / area;
    Ok(diffusion - aggregation + source)
}

/// The three terms of the exact moment balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBalance {
    /// `2 nu (nu-1) M_{nu-2}`
    pub diffusion: f64,
    /// `nu Z M_0 / |S^{nu-1}|`
    pub source: f64,
    /// `-nu / (2 |S^{nu-1}|) int int V rho rho`
    pub interaction: f64,
}

impl MomentBalance {
    pub fn total(&self) -> f64 {
        self.diffusion + self.source + self.interaction
    }

    /// Magnitude of the largest term, the natural scale for errors in
    /// [`total`](Self::total).
    pub fn scale(&self) -> f64 {
        self.diffusion
            .abs()
            .max(self.source.abs())
            .max(self.interaction.abs())
    }
}

/// Relative disagreement between angular orders `n` and `2n` above which the
/// table is rejected.
pub const ANGULAR_CONVERGENCE_TOL: f64 = 1e-4;

/// Nodes per angular panel used when none is specified.
pub const DEFAULT_ANGULAR_ORDER: usize = 16;

const TABLE_INTERVALS: usize = 4096;
/// Angular panels are `[pi 2^{-k-1}, pi 2^{-k}]` plus `[0, pi 2^{-GRADED_PANELS}]`,
/// resolving the peak of `V` near `theta = 0` when `tau -> 1`.
const GRADED_PANELS: i32 = 30;
const SUBCELL_POINTS: usize = 4;

/// Tabulated angular average `<V>(tau)` on `[0, 1]` and the pair quadrature
/// built on it.
#[derive(Debug, Clone)]
pub struct InteractionQuadrature {
    dim: Dimension,
    order: usize,
    table: Vec<f64>,
}

struct AngularRule {
    gap: Vec<f64>,
    weight: Vec<f64>,
    total_weight: f64,
}

impl AngularRule {
    fn new(dim: Dimension, order: usize) -> Self {
        let rule = GaussLegendre::new(order);
        let p = dim.as_i32() - 2;
        let mut gap = vec![];
        let mut weight = vec![];
        let mut push_panel = |a: f64, b: f64| {
            for (theta, w) in rule.on_interval(a, b) {
                let half_sin = (0.5 * theta).sin();
                // 1 - cos(theta) without cancellation
                gap.push(2.0 * half_sin * half_sin);
                weight.push(w * theta.sin().powi(p));
            }
        };
        for k in 0..GRADED_PANELS {
            let hi = PI * 2f64.powi(-k);
            push_panel(0.5 * hi, hi);
        }
        push_panel(0.0, PI * 2f64.powi(-GRADED_PANELS));
        let total_weight = weight.iter().sum();
        Self {
            gap,
            weight,
            total_weight,
        }
    }

    fn average(&self, nu: i32, tau: f64) -> f64 {
        let s: f64 = self
            .gap
            .iter()
            .zip(&self.weight)
            .map(|(g, w)| w * v_gap(nu, tau, *g))
            .sum();
        s / self.total_weight
    }
}

impl InteractionQuadrature {
    /// Tabulates `<V>` with `order` Gauss-Legendre nodes per angular panel,
    /// checking every entry against the rule with twice as many nodes.
    pub fn new(dim: Dimension, order: usize) -> Result<Self> {
        if order < 2 {
            return Err(invalid(
                "order",
                order as f64,
                "need at least 2 nodes per panel",
            ));
        }
        let nu = dim.as_i32();
        let coarse = AngularRule::new(dim, order);
        let fine = AngularRule::new(dim, 2 * order);
        let mut table = Vec::with_capacity(TABLE_INTERVALS + 1);
        for k in 0..=TABLE_INTERVALS {
            let tau = k as f64 / TABLE_INTERVALS as f64;
            let a = coarse.average(nu, tau);
            let b = fine.average(nu, tau);
            let rel_diff = (a - b).abs() / b.abs();
            if !(rel_diff <= ANGULAR_CONVERGENCE_TOL) {
                return Err(Error::QuadratureNotConverged {
                    tau,
                    coarse: a,
                    fine: b,
                    rel_diff,
                    tolerance: ANGULAR_CONVERGENCE_TOL,
                });
            }
            table.push(a);
        }
        Ok(Self { dim, order, table })
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Total number of angular nodes in one average.
    pub fn angular_nodes(&self) -> usize {
        self.order * (GRADED_PANELS as usize + 1)
    }

    /// `<V>(tau)` for `tau` in `[0, 1]`, linearly interpolated.
    #[inline]
    pub fn average(&self, tau: f64) -> f64 {
        let x = tau * TABLE_INTERVALS as f64;
        let k = (x as usize).min(TABLE_INTERVALS - 1);
        let frac = x - k as f64;
        self.table[k] + frac * (self.table[k + 1] - self.table[k])
    }

    /// `int int V rho rho dx dy`. Neighbouring and diagonal cell pairs use a
    /// product Gauss rule inside the cells; distant pairs use mass centroids.
    pub fn interaction_integral(&self, rho: &RadialDensity) -> Result<f64> {
        if rho.dim() != self.dim {
            return Err(Error::Precondition(format!(
                "quadrature built for nu = {} applied to a {}-dimensional density",
                self.dim,
                rho.dim()
            )));
        }
        let masses = rho.cell_masses();
        let n = masses.len();
        let p = self.dim.as_i32() - 1;
        let rule = GaussLegendre::new(SUBCELL_POINTS);
        let mut centroid = Vec::with_capacity(n);
        let mut sub_r = Vec::with_capacity(n * SUBCELL_POINTS);
        let mut sub_w = Vec::with_capacity(n * SUBCELL_POINTS);
        for w in rho.faces().windows(2) {
            let (a, b) = (w[0], w[1]);
            let pts: Vec<(f64, f64)> = rule
                .on_interval(a, b)
                .map(|(r, q)| (r, q * r.powi(p)))
                .collect();
            let norm: f64 = pts.iter().map(|(_, q)| q).sum();
            let first: f64 = pts.iter().map(|(r, q)| r * q).sum();
            centroid.push(first / norm);
            for (r, q) in pts {
                sub_r.push(r);
                sub_w.push(q / norm);
            }
        }
        let inv_centroid: Vec<f64> = centroid.iter().map(|c| 1.0 / c).collect();

        let near = |i: usize, j: usize| -> f64 {
            let mut acc = 0.0;
            for a in 0..SUBCELL_POINTS {
                let (ra, wa) = (sub_r[i * SUBCELL_POINTS + a], sub_w[i * SUBCELL_POINTS + a]);
                for b in 0..SUBCELL_POINTS {
                    let (rb, wb) = (sub_r[j * SUBCELL_POINTS + b], sub_w[j * SUBCELL_POINTS + b]);
                    acc += wa * wb * self.average(ra.min(rb) / ra.max(rb));
                }
            }
            acc
        };

        let mut total = 0.0;
        for i in 0..n {
            let mi = masses[i];
            if mi == 0.0 {
                continue;
            }
            let mut row = 0.5 * mi * near(i, i);
            if i + 1 < n {
                row += masses[i + 1] * near(i, i + 1);
            }
            let ci = centroid[i];
            for j in (i + 2)..n {
                let mj = masses[j];
                if mj != 0.0 {
                    row += mj * self.average(ci * inv_centroid[j]);
                }
            }
            total += 2.0 * mi * row;
        }
        Ok(total)
    }

    /// Terms of the exact moment balance for `rho`.
    pub fn balance(&self, rho: &RadialDensity, z: SourceStrength) -> Result<MomentBalance> {
        let nu = self.dim.as_f64();
        let area = sphere_area(self.dim);
        let m0 = total_mass(rho);
        let m_nm2 = moment(rho, nu - 2.0)?;
        let integral = self.interaction_integral(rho)?;
        Ok(MomentBalance {
            diffusion: 2.0 * nu * (nu - 1.0) * m_nm2,
            source: nu * z.get() * m0 / area,
            interaction: -nu / (2.0 * area) * integral,
        })
    }
}

/// Right-hand side of the exact moment balance for `rho`.
pub fn moment_derivative_exact(rho: &RadialDensity, z: SourceStrength) -> Result<f64> {
    let quad = InteractionQuadrature::new(rho.dim(), DEFAULT_ANGULAR_ORDER)?;
    Ok(quad.balance(rho, z)?.total())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorOptions {
    /// Violation tolerance relative to the largest balance term.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub angular_order: usize,
    /// Snapshots this close to a detected blow-up are informational only.
    pub near_singular_window: usize,
    /// Whether the last snapshot is the detection time of a blow-up.
    pub ends_in_blowup: bool,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        Self {
            rel_tol: 0.05,
            abs_tol: 1e-8,
            angular_order: DEFAULT_ANGULAR_ORDER,
            near_singular_window: 5,
            ends_in_blowup: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityRow {
    pub t: f64,
    pub m_nu: f64,
    /// Finite-difference `dM_nu/dt`; absent at the first and last snapshot.
    pub dmnu_dt_fd: Option<f64>,
    pub rhs_exact: f64,
    pub rhs_hoelder: f64,
    pub balance: MomentBalance,
    pub tol: f64,
    pub near_singular: bool,
    /// `dmnu_dt_fd > rhs_exact + tol` on a checked snapshot.
    pub violation: bool,
    /// `rhs_exact <= rhs_hoelder + tol`.
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub dim: Dimension,
    pub z: SourceStrength,
    pub rows: Vec<InequalityRow>,
    pub options: MonitorOptions,
    /// Largest `dmnu_dt_fd - rhs_exact - tol` over checked snapshots.
    pub max_violation: f64,
    pub initial_verdict: Verdict,
    pub m_nu_strictly_decreasing: bool,
}

impl InequalityReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violation).count()
    }

    pub fn ordering_failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| !r.ordered && !r.near_singular)
            .count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0 && self.ordering_failures() == 0
    }

    /// Whether the moment shrank as the criterion demands when it predicted
    /// blow-up; vacuously true otherwise.
    pub fn shrinking_consistent(&self) -> bool {
        !self.initial_verdict.is_predicted() || self.m_nu_strictly_decreasing
    }

    pub fn summary(&self) -> String {
        format!(
            "nu={} Z={} snapshots={} violations={} ordering_failures={} max_violation={} \
             rel_tol={} abs_tol={:e} initial={} m_nu_strictly_decreasing={}",
            self.dim,
            self.z.get(),
            self.rows.len(),
            self.violations(),
            self.ordering_failures(),
            self.max_violation,
            self.options.rel_tol,
            self.options.abs_tol,
            self.initial_verdict.predicted,
            self.m_nu_strictly_decreasing
        )
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# moment inequality monitor")?;
        writeln!(w, "# {}", self.summary())?;
        if let Some(first) = self.rows.iter().find(|r| r.near_singular) {
            writeln!(w, "# near-singular (informational only) from t={}", first.t)?;
        }
        writeln!(w, "t,dmnu_dt_fd,rhs_exact,rhs_hoelder,violation")?;
        for r in &self.rows {
            let fd = r.dmnu_dt_fd.map_or_else(String::new, |v| v.to_string());
            writeln!(
                w,
                "{},{},{},{},{}",
                r.t,
                fd,
                r.rhs_exact,
                r.rhs_hoelder,
                u8::from(r.violation)
            )?;
        }
        Ok(())
    }
}

/// Three-point derivative at the middle of unevenly spaced samples.
fn centred_derivative(t: [f64; 3], f: [f64; 3]) -> f64 {
    let hm = t[1] - t[0];
    let hp = t[2] - t[1];
    (hm * hm * f[2] - hp * hp * f[0] + (hp * hp - hm * hm) * f[1]) / (hm * hp * (hm + hp))
}

/// Compares the measured `dM_nu/dt` with the exact balance and the Hoelder
/// bound at every snapshot.
pub fn monitor_trajectory(
    trajectory: &[(f64, RadialDensity)],
    z: SourceStrength,
    options: &MonitorOptions,
) -> Result<InequalityReport> {
    if trajectory.len() < 3 {
        return Err(Error::Precondition(format!(
            "need at least 3 snapshots, got {}",
            trajectory.len()
        )));
    }
    if trajectory.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Precondition(
            "snapshot times must be strictly increasing".into(),
        ));
    }
    let dim = trajectory[0].1.dim();
    let nu = dim.as_f64();
    let quad = InteractionQuadrature::new(dim, options.angular_order)?;
    let n = trajectory.len();
    let m_nu: Vec<f64> = trajectory
        .iter()
        .map(|(_, rho)| moment(rho, nu))
        .collect::<Result<_>>()?;
    let near_from = if options.ends_in_blowup {
        n.saturating_sub(options.near_singular_window + 1)
    } else {
        n
    };

    let mut rows = Vec::with_capacity(n);
    let mut max_violation = f64::NEG_INFINITY;
    for (k, (t, rho)) in trajectory.iter().enumerate() {
        let balance = quad.balance(rho, z)?;
        let rhs_exact = balance.total();
        let rhs_hoelder = hoelder_rhs(dim, z, total_mass(rho), m_nu[k])?;
        let tol = options.rel_tol * balance.scale() + options.abs_tol;
        let dmnu_dt_fd = (k > 0 && k + 1 < n).then(|| {
            centred_derivative(
                [trajectory[k - 1].0, *t, trajectory[k + 1].0],
                [m_nu[k - 1], m_nu[k], m_nu[k + 1]],
            )
        });
        let near_singular = k >= near_from;
        let mut violation = false;
        if let (Some(fd), false) = (dmnu_dt_fd, near_singular) {
            let excess = fd - rhs_exact - tol;
            max_violation = max_violation.max(excess);
            violation = excess > 0.0;
        }
        rows.push(InequalityRow {
            t: *t,
            m_nu: m_nu[k],
            dmnu_dt_fd,
            rhs_exact,
            rhs_hoelder,
            balance,
            tol,
            near_singular,
            violation,
            ordered: rhs_exact <= rhs_hoelder + tol,
        });
    }

    let rho0 = &trajectory[0].1;
    let initial_verdict = evaluate_criterion(dim, z, total_mass(rho0), m_nu[0])?;
    Ok(InequalityReport {
        dim,
        z,
        rows,
        options: *options,
        max_violation,
        initial_verdict,
        m_nu_strictly_decreasing: m_nu.windows(2).all(|w| w[1] < w[0]),
    })
}
