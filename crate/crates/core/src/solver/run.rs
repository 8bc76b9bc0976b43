use std::io::{self, Write};

use super::step::Stepper;
use super::{check_dim, SolverConfig};
use crate::diagnostics::MomentRecord;
use crate::error::Result;
use crate::math::{total_mass, RadialDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    CompletedToTend,
    /// The density reached `rho_cap`.
    BlowUpDetected,
    /// The stable time step fell below `dt_min`.
    StepCollapse,
}

impl RunStatus {
    /// Either numerical signature of blow-up.
    pub fn is_detection(self) -> bool {
        matches!(self, RunStatus::BlowUpDetected | RunStatus::StepCollapse)
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::CompletedToTend => "CompletedToTend",
            RunStatus::BlowUpDetected => "BlowUpDetected",
            RunStatus::StepCollapse => "StepCollapse",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub status: RunStatus,
    /// Time of cap exceedance or step collapse.
    pub detected_time: Option<f64>,
    pub final_time: f64,
    pub steps: u64,
    /// Snapshots at multiples of `snapshot_every`, plus the final state when
    /// it falls between them.
    pub trajectory: Vec<MomentRecord>,
    pub final_state: RadialDensity,
    pub rho_cap: f64,
    pub initial_mass: f64,
    /// Mass removed by clipping negative densities over the whole run.
    pub clipped_mass: f64,
    /// Largest `|M_0(t) - M_0(0)| / M_0(0)` over the snapshots.
    pub max_mass_drift: f64,
    /// Smallest cell density seen at any snapshot.
    pub min_density: f64,
}

impl SimulationOutcome {
    pub fn final_max_density(&self) -> f64 {
        self.final_state.max_density()
    }

    pub fn summary(&self) -> String {
        let detected = self
            .detected_time
            .map_or_else(|| "none".to_string(), |t| t.to_string());
        format!(
            "status={} detected_time={} final_max_density={}",
            self.status,
            detected,
            self.final_max_density()
        )
    }

    /// Snapshot table as CSV with `#` metadata lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# radial simulation snapshots")?;
        writeln!(w, "# {}", self.summary())?;
        writeln!(
            w,
            "# rho_cap={} steps={} max_mass_drift={:e} clipped_mass={:e}",
            self.rho_cap, self.steps, self.max_mass_drift, self.clipped_mass
        )?;
        writeln!(w, "{}", MomentRecord::CSV_HEADER)?;
        for record in &self.trajectory {
            record.write_csv_row(&mut w)?;
        }
        Ok(())
    }
}

pub fn run(config: &SolverConfig, rho0: &RadialDensity) -> Result<SimulationOutcome> {
    run_with_observer(config, rho0, |_, _| {})
}

/// Integrates from `rho0` until `t_end`, cap exceedance or step collapse,
/// calling `observer` with every recorded snapshot and the density at that
/// time.
pub fn run_with_observer(
    config: &SolverConfig,
    rho0: &RadialDensity,
    mut observer: impl FnMut(&MomentRecord, &RadialDensity),
) -> Result<SimulationOutcome> {
    config.validate()?;
    check_dim(config.dim, rho0.dim())?;

    let mut stepper = Stepper::new(rho0.faces(), config);
    let mut state = rho0.clone();
    let initial_mass = total_mass(rho0);
    let mut trajectory = Vec::new();
    let mut max_mass_drift: f64 = 0.0;
    let mut min_density = f64::INFINITY;

    let mut record =
        |t: f64, dt: f64, state: &RadialDensity, trajectory: &mut Vec<MomentRecord>| {
            let rec = MomentRecord::from_density(t, state, dt);
            max_mass_drift = max_mass_drift.max((rec.m0 - initial_mass).abs() / initial_mass);
            min_density =
                min_density.min(state.values().iter().copied().fold(f64::INFINITY, f64::min));
            observer(&rec, state);
            trajectory.push(rec);
        };

    record(0.0, 0.0, &state, &mut trajectory);
    let mut t = 0.0;
    let mut snapshot_index: u64 = 1;
    let snapshot_time = |k: u64| (k as f64 * config.snapshot_every).min(config.t_end);
    let mut next_snapshot = snapshot_time(snapshot_index);
    let mut steps = 0;
    let mut clipped_mass = 0.0;
    let mut last_dt = 0.0;
    let mut last_recorded = 0.0;

    let (status, detected_time) = loop {
        if t >= config.t_end {
            break (RunStatus::CompletedToTend, None);
        }
        let dt_stable = stepper.prepare(state.values());
        if dt_stable < config.dt_min {
            break (RunStatus::StepCollapse, Some(t));
        }
        let (dt, lands_on_snapshot) = if dt_stable >= next_snapshot - t {
            (next_snapshot - t, true)
        } else {
            (dt_stable, false)
        };
        let stats = stepper.advance(state.values_mut(), dt, t)?;
        steps += 1;
        clipped_mass += stats.clipped_mass;
        last_dt = dt;
        t = if lands_on_snapshot {
            next_snapshot
        } else {
            t + dt
        };

        if stats.max_density >= config.rho_cap {
            break (RunStatus::BlowUpDetected, Some(t));
        }
        if lands_on_snapshot {
            record(t, dt, &state, &mut trajectory);
            last_recorded = t;
            snapshot_index += 1;
            next_snapshot = snapshot_time(snapshot_index);
        }
    };
    if t > last_recorded {
        record(t, last_dt, &state, &mut trajectory);
    }

    Ok(SimulationOutcome {
        status,
        detected_time,
        final_time: t,
        steps,
        trajectory,
        final_state: state,
        rho_cap: config.rho_cap,
        initial_mass,
        clipped_mass,
        max_mass_drift,
        min_density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::test_support::config;
    use crate::solver::{init_profile, ProfileFamily};
    use std::f64::consts::PI;

    #[test]
    fn snapshots_are_strictly_increasing_from_zero() {
        let mut c = config(2, 0.0, 6.0, 128);
        c.t_end = 0.35;
        c.snapshot_every = 0.1;
        let rho = init_profile(ProfileFamily::Gaussian { sigma: 1.0 }, 5.0, &c).unwrap();
        let out = run(&c, &rho).unwrap();
        assert_eq!(out.status, RunStatus::CompletedToTend);
        let times: Vec<f64> = out.trajectory.iter().map(|r| r.t).collect();
        assert_eq!(times[0], 0.0);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(times.len(), 5);
        assert_eq!(*times.last().unwrap(), 0.35);
        assert!((times[2] - 0.2).abs() < 1e-15);
        assert!(out.max_mass_drift < 1e-12);
        assert!(out.min_density >= 0.0);
    }

    #[test]
    fn supercritical_two_dimensional_detects() {
        let mut c = config(2, 0.0, 8.0, 256);
        c.t_end = 10.0;
        let rho = init_profile(ProfileFamily::Gaussian { sigma: 1.0 }, 2.0 * 8.0 * PI, &c).unwrap();
        c.rho_cap = 100.0 * rho.max_density();
        let out = run(&c, &rho).unwrap();
        assert_eq!(out.status, RunStatus::BlowUpDetected);
        assert!(out.final_max_density() >= c.rho_cap);
        assert!(out.detected_time.unwrap() < 10.0);
        assert!(out.max_mass_drift < 1e-10);
    }

    #[test]
    fn csv_has_expected_columns() {
        let mut c = config(3, 0.0, 4.0, 32);
        c.t_end = 0.05;
        c.snapshot_every = 0.01;
        let rho = init_profile(ProfileFamily::Gaussian { sigma: 0.4 }, 1.0, &c).unwrap();
        let out = run(&c, &rho).unwrap();
        let mut buf = vec![];
        out.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(
            header,
            "t,m0,m2,m_numinus2,m_nu,max_density,dt,mass_in_core,wall_density"
        );
    }
}
