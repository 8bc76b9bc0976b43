//! Run configuration: TOML sections with every key optional, overridable
//! from the command line as `section.key=value`.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pkslab_core::{
    BlowUpCap, Dimension, MonitorOptions, ProfileFamily, SolverConfig, SourceStrength,
    SweepParameter,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: Model,
    pub grid: Grid,
    pub time: Time,
    pub blowup: Blowup,
    pub profile: Profile,
    pub sweep: Sweep,
    pub verify: Verify,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Model {
    pub dim: u32,
    pub z: f64,
}

impl Default for Model {
    fn default() -> Self {
        Self { dim: 2, z: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub radius: f64,
    pub cells: usize,
    pub stretch: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            radius: 8.0,
            cells: 512,
            stretch: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Time {
    pub t_end: f64,
    pub cfl: f64,
    pub dt_min: f64,
    pub snapshot_every: f64,
}

impl Default for Time {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            cfl: 0.9,
            dt_min: 1e-12,
            snapshot_every: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Blowup {
    /// Absolute density cap; overrides `rho_cap_factor` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_cap: Option<f64>,
    /// Cap as a multiple of the initial maximum density.
    pub rho_cap_factor: f64,
}

impl Default for Blowup {
    fn default() -> Self {
        Self {
            rho_cap: None,
            rho_cap_factor: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    UniformBall,
    Ring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Profile {
    pub family: Family,
    pub mass: f64,
    pub sigma: f64,
    /// Radius of the uniform ball.
    pub radius: f64,
    pub center: f64,
    pub width: f64,
}

impl Default for Profile {
    fn default() -> Self {
        Self {
            family: Family::Gaussian,
            mass: 30.0,
            sigma: 1.0,
            radius: 1.0,
            center: 2.0,
            width: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Mass,
    Scale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub parameter: Parameter,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub bisect: bool,
    pub bisect_iters: usize,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            parameter: Parameter::Mass,
            start: 0.7 * 8.0 * std::f64::consts::PI,
            stop: 1.5 * 8.0 * std::f64::consts::PI,
            steps: 9,
            bisect: true,
            bisect_iters: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Verify {
    pub dims: Vec<u32>,
    pub n_tau: usize,
    pub n_u: usize,
    /// Multiplies the claimed lower bound; values above 1 must fail.
    pub bound_scale: f64,
    pub f_samples: usize,
}

impl Default for Verify {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4, 5, 6],
            n_tau: 512,
            n_u: 512,
            bound_scale: 1.0,
            f_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Diagnostics {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub angular_order: usize,
    pub near_singular: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        let d = MonitorOptions::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            angular_order: d.angular_order,
            near_singular: d.near_singular_window,
        }
    }
}

/// Parses the right-hand side of an override as a TOML value, falling back
/// to a bare string so that `profile.family=ring` works unquoted.
fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key just parsed"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{assignment}` is not of the form section.key=value"))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| anyhow!("override key `{path}` is not of the form section.key"))?;
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    let toml::Value::Table(section_table) = entry else {
        bail!("`{section}` is not a section");
    };
    section_table.insert(key.to_string(), parse_value(raw.trim()));
    Ok(())
}

impl Config {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: Config = table
            .try_into()
            .map_err(|e: toml::de::Error| anyhow!("invalid config: {}", e.message()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn validate(&self) -> Result<()> {
        self.solver()?.validate()?;
        self.family().validate()?;
        if !(self.profile.mass > 0.0) {
            bail!("profile.mass must be > 0, got {}", self.profile.mass);
        }
        if self.blowup.rho_cap.is_some_and(|c| !(c > 0.0)) {
            bail!("blowup.rho_cap must be > 0");
        }
        if !(self.blowup.rho_cap_factor > 1.0) {
            bail!(
                "blowup.rho_cap_factor must be > 1, got {}",
                self.blowup.rho_cap_factor
            );
        }
        if self.sweep.steps < 2 {
            bail!("sweep.steps must be at least 2, got {}", self.sweep.steps);
        }
        if !(self.sweep.start > 0.0 && self.sweep.stop > self.sweep.start) {
            bail!(
                "sweep needs 0 < start < stop, got start={} stop={}",
                self.sweep.start,
                self.sweep.stop
            );
        }
        if self.verify.dims.is_empty() {
            bail!("verify.dims is empty");
        }
        for &nu in &self.verify.dims {
            Dimension::new(nu)?;
        }
        if !(self.verify.bound_scale > 0.0) {
            bail!("verify.bound_scale must be > 0");
        }
        if self.verify.n_tau < 2 || self.verify.n_u < 2 || self.verify.f_samples < 1 {
            bail!("verify grids need n_tau >= 2, n_u >= 2 and f_samples >= 1");
        }
        if !(self.diagnostics.rel_tol >= 0.0 && self.diagnostics.abs_tol >= 0.0) {
            bail!("diagnostics tolerances must be >= 0");
        }
        if self.diagnostics.angular_order < 2 {
            bail!("diagnostics.angular_order must be at least 2");
        }
        Ok(())
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        Ok(SolverConfig {
            dim: Dimension::new(self.model.dim)?,
            z: SourceStrength::new(self.model.z)?,
            radius: self.grid.radius,
            n_cells: self.grid.cells,
            stretch: self.grid.stretch,
            t_end: self.time.t_end,
            cfl: self.time.cfl,
            dt_min: self.time.dt_min,
            // placeholder until the initial datum is known
            rho_cap: self.blowup.rho_cap.unwrap_or(f64::MAX),
            snapshot_every: self.time.snapshot_every,
        })
    }

    pub fn family(&self) -> ProfileFamily {
        let p = &self.profile;
        match p.family {
            Family::Gaussian => ProfileFamily::Gaussian { sigma: p.sigma },
            Family::UniformBall => ProfileFamily::UniformBall { radius: p.radius },
            Family::Ring => ProfileFamily::Ring {
                center: p.center,
                width: p.width,
            },
        }
    }

    pub fn cap(&self) -> BlowUpCap {
        match self.blowup.rho_cap {
            Some(cap) => BlowUpCap::Absolute(cap),
            None => BlowUpCap::RelativeToInitialMax(self.blowup.rho_cap_factor),
        }
    }

    pub fn sweep_parameter(&self) -> SweepParameter {
        match self.sweep.parameter {
            Parameter::Mass => SweepParameter::Mass,
            Parameter::Scale => SweepParameter::Scale,
        }
    }

    /// `steps` equispaced values from `start` to `stop` inclusive.
    pub fn sweep_values(&self) -> Vec<f64> {
        let s = &self.sweep;
        let n = s.steps - 1;
        (0..=n)
            .map(|k| {
                if k == n {
                    s.stop
                } else {
                    s.start + (s.stop - s.start) * k as f64 / n as f64
                }
            })
            .collect()
    }

    pub fn monitor_options(&self, ends_in_blowup: bool) -> MonitorOptions {
        MonitorOptions {
            rel_tol: self.diagnostics.rel_tol,
            abs_tol: self.diagnostics.abs_tol,
            angular_order: self.diagnostics.angular_order,
            near_singular_window: self.diagnostics.near_singular,
            ends_in_blowup,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        assert_eq!(Config::from_toml("", &[]).unwrap(), Config::default());
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = Config::from_toml("[grid]\ncels = 10\n", &[]).unwrap_err();
        assert!(err.to_string().contains("cels"), "{err}");
        let err = Config::from_toml("[gird]\n", &[]).unwrap_err();
        assert!(err.to_string().contains("gird"), "{err}");
        let err = Config::from_toml("", &["time.tend=3".into()]).unwrap_err();
        assert!(err.to_string().contains("tend"), "{err}");
    }

    #[test]
    fn overrides_take_precedence() {
        let c = Config::from_toml(
            "[model]\ndim = 3\n",
            &[
                "model.dim=4".into(),
                "profile.family=ring".into(),
                "verify.dims=[2, 3]".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.model.dim, 4);
        assert_eq!(c.profile.family, Family::Ring);
        assert_eq!(c.verify.dims, vec![2, 3]);
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = Config::from_toml("[blowup]\nrho_cap = 5e4\n[sweep]\nsteps = 3\n", &[]).unwrap();
        assert_eq!(Config::from_toml(&c.to_toml(), &[]).unwrap(), c);
        let d = Config::default();
        assert_eq!(Config::from_toml(&d.to_toml(), &[]).unwrap(), d);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(Config::from_toml("[model]\ndim = 1\n", &[]).is_err());
        assert!(Config::from_toml("[time]\ncfl = 1.5\n", &[]).is_err());
        assert!(Config::from_toml("[profile]\nsigma = -1.0\n", &[]).is_err());
        assert!(Config::from_toml("[profile]\nfamily = \"cube\"\n", &[]).is_err());
        assert!(Config::from_toml("", &["nodot=1".into()]).is_err());
    }

    #[test]
    fn sweep_values_hit_both_ends() {
        let c = Config::from_toml("[sweep]\nstart = 1.0\nstop = 2.0\nsteps = 5\n", &[]).unwrap();
        assert_eq!(c.sweep_values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
    }
}
