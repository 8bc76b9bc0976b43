//! Interaction kernel `K = grad Phi` and the symmetrized integrand
//!
//! ```text
//! V = (|x|^{nu-1} x/|x| - |y|^{nu-1} y/|y|) . (x - y) / |x - y|^nu
//! ```
//!
//! expressed in `r = |x|`, `s = |y|`, `u = x.y / (|x||y|)`, together with
//! grid scans checking the three estimates that lead to `V >= 2^{2-nu}`:
//! monotonicity of `V` in `u`, monotonicity of the boundary function
//! `f(tau) = (1 + tau^{nu-1}) / (1 + tau)^{nu-1}`, and the bound itself.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::math::{sphere_area, Dimension};

/// Distance to `u = 1` below which a point with `r = s` is rejected.
pub const SINGULAR_GAP: f64 = 1e-9;

/// Upper end of the `u` grid used by bound scans.
pub const SCAN_U_MAX: f64 = 1.0 - 1e-6;

/// `(r, s, u)` with `r, s > 0`, `u` in `[-1, 1]`, away from `x = y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    r: f64,
    s: f64,
    u: f64,
    dim: Dimension,
}

impl KernelPoint {
    pub fn new(r: f64, s: f64, u: f64, dim: Dimension) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid("r", r, "radius must be finite and > 0"));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(invalid("s", s, "radius must be finite and > 0"));
        }
        if !(-1.0..=1.0).contains(&u) {
            return Err(invalid("u", u, "cosine must lie in [-1, 1]"));
        }
        if r == s && 1.0 - u < SINGULAR_GAP {
            return Err(Error::SingularPoint);
        }
        Ok(Self { r, s, u, dim })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn u(&self) -> f64 {
        self.u
    }
    pub fn dim(&self) -> Dimension {
        self.dim
    }
}

/// Radial magnitude `1 / (|S^{nu-1}| |x|^{nu-1})` of `K(x)`; the direction
/// is `-x/|x|`.
pub fn kernel_k(dim: Dimension, x_radius: f64) -> Result<f64> {
    if !(x_radius > 0.0) || !x_radius.is_finite() {
        return Err(invalid("|x|", x_radius, "kernel is singular at the origin"));
    }
    Ok(1.0 / (sphere_area(dim) * x_radius.powi(dim.as_i32() - 1)))
}

/// `base^{nu/2}` for integer `nu`.
#[inline]
fn half_power(base: f64, nu: i32) -> f64 {
    if nu % 2 == 0 {
        base.powi(nu / 2)
    } else {
        base.powi(nu / 2) * base.sqrt()
    }
}

/// `V(tau, 1, 1 - gap)` for `tau` in `[0, 1]`, written so that the
/// cancellations near `tau = 1, u = 1` happen exactly:
///
/// ```text
/// V = ((1-tau)(1-tau^{nu-1}) + (tau + tau^{nu-1}) gap) / ((1-tau)^2 + 2 tau gap)^{nu/2}
/// ```
#[inline]
pub(crate) fn v_gap(nu: i32, tau: f64, gap: f64) -> f64 {
    let t_nm1 = tau.powi(nu - 1);
    let one_minus = 1.0 - tau;
    let num = one_minus * (1.0 - t_nm1) + (tau + t_nm1) * gap;
    let den = half_power(one_minus * one_minus + 2.0 * tau * gap, nu);
    num / den
}

/// `V` in the radius-ratio form, evaluated with `tau = min(r,s)/max(r,s)`.
pub fn interaction_v(point: &KernelPoint) -> f64 {
    let tau = point.r.min(point.s) / point.r.max(point.s);
    v_gap(point.dim.as_i32(), tau, 1.0 - point.u)
}

/// `V` in the direct `(r, s)` form
/// `(r^nu - (r^{nu-1} s + r s^{nu-1}) u + s^nu) / (r^2 + s^2 - 2 r s u)^{nu/2}`.
/// Overflows for large radii; kept as a cross-check of [`interaction_v`].
pub fn interaction_v_rs(point: &KernelPoint) -> f64 {
    let nu = point.dim.as_i32();
    let (r, s, u) = (point.r, point.s, point.u);
    let num = r.powi(nu) - (r.powi(nu - 1) * s + r * s.powi(nu - 1)) * u + s.powi(nu);
    let den = half_power(r * r + s * s - 2.0 * r * s * u, nu);
    num / den
}

/// `V(tau, 1, u)`; `tau > 1` is folded back by the `r <-> s` symmetry.
pub fn interaction_v_ratio(dim: Dimension, tau: f64, u: f64) -> Result<f64> {
    let p = KernelPoint::new(tau, 1.0, u, dim)?;
    Ok(interaction_v(&p))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid("tau", tau, "must lie in [0, 1]"));
    }
    Ok(())
}

#[inline]
fn f_raw(nu: i32, tau: f64) -> f64 {
    (1.0 + tau.powi(nu - 1)) / (1.0 + tau).powi(nu - 1)
}

#[inline]
fn f_prime_raw(nu: i32, tau: f64) -> f64 {
    f64::from(nu - 1) * (tau.powi(nu - 2) - 1.0) / (1.0 + tau).powi(nu)
}

/// `f(tau) = (1 + tau^{nu-1}) / (1 + tau)^{nu-1}` on `[0, 1]`.
pub fn f(dim: Dimension, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(f_raw(dim.as_i32(), tau))
}

/// Closed form `f'(tau) = (nu-1)(tau^{nu-2} - 1) / (1 + tau)^nu`.
pub fn f_prime(dim: Dimension, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(f_prime_raw(dim.as_i32(), tau))
}

/// Result of [`verify_f_decreasing`].
#[derive(Debug, Clone, PartialEq)]
pub struct FDecreasingReport {
    pub dim: Dimension,
    pub n_samples: usize,
    /// Largest `f'` seen on samples with `tau < 1`.
    pub max_slope_below_one: f64,
    pub slope_at_one: f64,
    /// Worst `|fd - f'| / max(|f'|, floor)`.
    pub max_fd_rel_error: f64,
    pub fd_rel_tol: f64,
    pub fd_floor: f64,
    /// Samples where the sign condition fails.
    pub sign_violations: Vec<f64>,
    /// Samples where the finite-difference cross-check fails.
    pub fd_mismatches: Vec<f64>,
}

impl FDecreasingReport {
    pub fn passed(&self) -> bool {
        self.sign_violations.is_empty() && self.fd_mismatches.is_empty()
    }
}

/// Samples `f'` at `tau_k = k / n`, `k = 1..=n`, and checks `f' <= 0`, with
/// equality only at `tau = 1` when `nu > 2` (identically zero when
/// `nu = 2`). Each closed-form value is compared with a Richardson-extrapolated
/// centred difference of `f`.
pub fn verify_f_decreasing(dim: Dimension, n_samples: usize) -> Result<FDecreasingReport> {
    if n_samples < 2 {
        return Err(invalid(
            "n_samples",
            n_samples as f64,
            "need at least 2 samples",
        ));
    }
    const FD_REL_TOL: f64 = 1e-6;
    const FD_FLOOR: f64 = 1e-6;
    const H: f64 = 1e-3;
    let nu = dim.as_i32();
    let centred = |tau: f64, h: f64| (f_raw(nu, tau + h) - f_raw(nu, tau - h)) / (2.0 * h);

    let mut report = FDecreasingReport {
        dim,
        n_samples,
        max_slope_below_one: f64::NEG_INFINITY,
        slope_at_one: f_prime_raw(nu, 1.0),
        max_fd_rel_error: 0.0,
        fd_rel_tol: FD_REL_TOL,
        fd_floor: FD_FLOOR,
        sign_violations: vec![],
        fd_mismatches: vec![],
    };
    for k in 1..=n_samples {
        let tau = k as f64 / n_samples as f64;
        let slope = f_prime_raw(nu, tau);
        let sign_ok = if nu == 2 || k == n_samples {
            slope == 0.0
        } else {
            slope < 0.0
        };
        if !sign_ok {
            report.sign_violations.push(tau);
        }
        if k < n_samples {
            report.max_slope_below_one = report.max_slope_below_one.max(slope);
        }
        let fd = (4.0 * centred(tau, H / 2.0) - centred(tau, H)) / 3.0;
        let rel = (fd - slope).abs() / slope.abs().max(FD_FLOOR);
        report.max_fd_rel_error = report.max_fd_rel_error.max(rel);
        if rel > FD_REL_TOL {
            report.fd_mismatches.push(tau);
        }
    }
    Ok(report)
}

/// A pair of successive grid values where `V` decreased.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneViolation {
    pub tau: f64,
    pub u_prev: f64,
    pub u_next: f64,
    pub v_prev: f64,
    pub v_next: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UMonotoneReport {
    pub dim: Dimension,
    pub checked_pairs: usize,
    pub slack: f64,
    pub violations: Vec<MonotoneViolation>,
}

impl UMonotoneReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `V(tau, 1, u)` is nondecreasing along `u_grid` for every
/// `tau` in `tau_grid`, up to a slack of `1e-10 max(1, |V|)`.
pub fn verify_u_monotone(
    dim: Dimension,
    tau_grid: &[f64],
    u_grid: &[f64],
) -> Result<UMonotoneReport> {
    const SLACK: f64 = 1e-10;
    if tau_grid.is_empty() || u_grid.is_empty() {
        return Err(Error::Precondition("empty tau or u grid".into()));
    }
    if let Some(&t) = tau_grid.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(invalid("tau", t, "grid values must lie in (0, 1]"));
    }
    if let Some(&u) = u_grid.iter().find(|u| !(**u >= -1.0 && **u < 1.0)) {
        return Err(invalid("u", u, "grid values must lie in [-1, 1)"));
    }
    let nu = dim.as_i32();
    let mut violations = vec![];
    let mut checked_pairs = 0;
    for &tau in tau_grid {
        let mut prev: Option<(f64, f64)> = None;
        for &u in u_grid {
            let v = v_gap(nu, tau, 1.0 - u);
            if let Some((u_prev, v_prev)) = prev {
                checked_pairs += 1;
                if v < v_prev - SLACK * v_prev.abs().max(1.0) {
                    violations.push(MonotoneViolation {
                        tau,
                        u_prev,
                        u_next: u,
                        v_prev,
                        v_next: v,
                    });
                }
            }
            prev = Some((u, v));
        }
    }
    Ok(UMonotoneReport {
        dim,
        checked_pairs,
        slack: SLACK,
        violations,
    })
}

/// Grid and thresholds of a kernel bound scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundScan {
    pub n_tau: usize,
    pub n_u: usize,
    pub u_max: f64,
    /// Violation tolerance below the bound.
    pub tol: f64,
    /// Multiplies the reference bound `2^{2-nu}`; 1 except in failure-path
    /// tests.
    pub bound_scale: f64,
}

impl BoundScan {
    pub fn new(n_tau: usize, n_u: usize) -> Self {
        Self {
            n_tau,
            n_u,
            u_max: SCAN_U_MAX,
            tol: 1e-10,
            bound_scale: 1.0,
        }
    }

    /// `tau_k = k / n_tau`, `k = 1..=n_tau`.
    pub fn tau_grid(&self) -> Vec<f64> {
        (1..=self.n_tau)
            .map(|k| k as f64 / self.n_tau as f64)
            .collect()
    }

    /// `n_u` equispaced values from -1 to `u_max`.
    pub fn u_grid(&self) -> Vec<f64> {
        let du = (self.u_max + 1.0) / (self.n_u - 1) as f64;
        (0..self.n_u).map(|j| -1.0 + j as f64 * du).collect()
    }
}

/// Minimum of `V` over one `tau` row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowMinimum {
    pub tau: f64,
    pub min_over_u: f64,
    pub argmin_u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub dim: Dimension,
    pub min_value: f64,
    /// `(tau, u)` of the minimum; ties go to the smallest `tau`, then the
    /// smallest `u`.
    pub argmin: (f64, f64),
    pub scan: BoundScan,
    pub bound: f64,
    pub violated: bool,
    pub rows: Vec<RowMinimum>,
}

impl BoundReport {
    /// Whether the minimiser lies within one grid cell of `(1, -1)`.
    pub fn argmin_near_corner(&self) -> bool {
        let dtau = 1.0 / self.scan.n_tau as f64;
        let du = (self.scan.u_max + 1.0) / (self.scan.n_u - 1) as f64;
        (self.argmin.0 - 1.0).abs() <= dtau * (1.0 + 1e-12)
            && (self.argmin.1 + 1.0).abs() <= du * (1.0 + 1e-12)
    }

    pub fn summary(&self) -> String {
        format!(
            "nu={} grid={}x{} u_max={} tol={:e} min={} argmin=(tau={}, u={}) bound={} violated={}",
            self.dim,
            self.scan.n_tau,
            self.scan.n_u,
            self.scan.u_max,
            self.scan.tol,
            self.min_value,
            self.argmin.0,
            self.argmin.1,
            self.bound,
            self.violated
        )
    }

    /// Per-row minima as CSV with `#` metadata lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# kernel bound scan")?;
        writeln!(w, "# {}", self.summary())?;
        writeln!(w, "tau,min_over_u,argmin_u")?;
        for row in &self.rows {
            writeln!(w, "{},{},{}", row.tau, row.min_over_u, row.argmin_u)?;
        }
        Ok(())
    }
}

pub fn verify_kernel_bound(dim: Dimension, n_tau: usize, n_u: usize) -> Result<BoundReport> {
    verify_kernel_bound_with(dim, &BoundScan::new(n_tau, n_u))
}

/// Scans `V(tau, 1, u)` over `(0, 1] x [-1, u_max]`. Restricting to
/// `tau <= 1` loses nothing since `V(r, s, u) = V(s, r, u)`.
pub fn verify_kernel_bound_with(dim: Dimension, scan: &BoundScan) -> Result<BoundReport> {
    if scan.n_tau < 2 || scan.n_u < 2 {
        return Err(Error::Precondition(format!(
            "bound scan grid {}x{} is smaller than 2x2",
            scan.n_tau, scan.n_u
        )));
    }
    if !(scan.u_max > -1.0 && scan.u_max < 1.0) {
        return Err(invalid("u_max", scan.u_max, "must lie in (-1, 1)"));
    }
    let nu = dim.as_i32();
    let u_grid = scan.u_grid();
    let rows: Vec<RowMinimum> = scan
        .tau_grid()
        .into_par_iter()
        .map(|tau| {
            let mut best = RowMinimum {
                tau,
                min_over_u: f64::INFINITY,
                argmin_u: f64::NAN,
            };
            for &u in &u_grid {
                let v = v_gap(nu, tau, 1.0 - u);
                if v < best.min_over_u {
                    best.min_over_u = v;
                    best.argmin_u = u;
                }
            }
            best
        })
        .collect();

    let mut min_value = f64::INFINITY;
    let mut argmin = (f64::NAN, f64::NAN);
    for row in &rows {
        if row.min_over_u < min_value {
            min_value = row.min_over_u;
            argmin = (row.tau, row.argmin_u);
        }
    }
    let bound = scan.bound_scale * 2f64.powi(2 - nu);
    Ok(BoundReport {
        dim,
        min_value,
        argmin,
        scan: *scan,
        bound,
        violated: min_value < bound - scan.tol,
        rows,
    })
}
