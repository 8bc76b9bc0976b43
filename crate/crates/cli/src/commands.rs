//! Subcommand bodies. Each returns `Ok(true)` on success, `Ok(false)` when a
//! verification ran to completion and found a violation.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use pkslab_core::{
    evaluate_criterion, implied_m2_bound, init_profile, moment, monitor_trajectory, run, run_sweep,
    run_with_observer, total_mass, verify_f_decreasing, verify_kernel_bound_with, BoundScan,
    Dimension, RadialDensity, SimulationOutcome, SolverConfig, SweepBase, SweepSpec, Verdict,
};

use crate::config::Config;

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes a file through `body`, flushing before returning.
    fn with_file(
        &self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        );
        body(&mut w)
            .and_then(|()| w.flush())
            .with_context(|| format!("writing {}", path.display()))
    }
}

fn initial_datum(config: &Config) -> Result<(SolverConfig, RadialDensity)> {
    let mut solver = config.solver()?;
    let rho0 = init_profile(config.family(), config.profile.mass, &solver)?;
    solver.rho_cap = config.cap().resolve(rho0.max_density());
    Ok((solver, rho0))
}

fn verdict_of(rho: &RadialDensity, solver: &SolverConfig) -> Result<Verdict> {
    let m_nu = moment(rho, solver.dim.as_f64())?;
    Ok(evaluate_criterion(
        solver.dim,
        solver.z,
        total_mass(rho),
        m_nu,
    )?)
}

fn warn_if_unreachable(solver: &SolverConfig, rho0: &RadialDensity) {
    let limit = rho0.concentration_limit();
    if solver.rho_cap > limit {
        eprintln!(
            "warning: rho_cap={} exceeds the largest density the grid can hold ({limit}); \
             blow-up cannot be detected by the cap",
            solver.rho_cap
        );
    }
}

fn write_final_state(out: &Output, rho: &RadialDensity) -> Result<()> {
    out.with_file("final_state.csv", |w| {
        writeln!(w, "r_inner,r_outer,density")?;
        for (face, value) in rho.faces().windows(2).zip(rho.values()) {
            writeln!(w, "{},{},{}", face[0], face[1], value)?;
        }
        Ok(())
    })
}

fn write_outcome(out: &Output, outcome: &SimulationOutcome) -> Result<()> {
    out.with_file("snapshots.csv", |w| outcome.write_csv(w))?;
    write_final_state(out, &outcome.final_state)
}

pub fn criterion(config: &Config, out: &Output) -> Result<bool> {
    let (solver, rho0) = initial_datum(config)?;
    let v = verdict_of(&rho0, &solver)?;
    let bound = if v.is_predicted() && v.dim.get() > 2 {
        Some(implied_m2_bound(v.dim, v.z, v.m0)?)
    } else {
        None
    };
    println!("verdict={}", v.predicted);
    println!("lhs={}", v.lhs);
    println!("rhs={}", v.rhs);
    println!("margin={}", v.margin);
    println!("m0={} m_nu={}", v.m0, v.m_nu);
    if let Some(b) = bound {
        println!("m2_bound={b}");
    }
    out.with_file("criterion.csv", |w| {
        writeln!(
            w,
            "# {} on {} cells",
            config.family().name(),
            solver.n_cells
        )?;
        writeln!(w, "nu,z,m0,m_nu,lhs,rhs,margin,verdict,m2_bound")?;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            v.dim,
            v.z.get(),
            v.m0,
            v.m_nu,
            v.lhs,
            v.rhs,
            v.margin,
            v.predicted,
            bound.map_or_else(String::new, |b| b.to_string())
        )
    })?;
    Ok(true)
}

pub fn simulate(config: &Config, out: &Output) -> Result<bool> {
    let (solver, rho0) = initial_datum(config)?;
    warn_if_unreachable(&solver, &rho0);
    let v = verdict_of(&rho0, &solver)?;
    println!("initial: {v}");
    let outcome = run(&solver, &rho0)?;
    println!("{}", outcome.summary());
    write_outcome(out, &outcome)?;
    Ok(true)
}

pub fn sweep(config: &Config, out: &Output, jobs: usize) -> Result<bool> {
    let base = SweepBase {
        solver: config.solver()?,
        family: config.family(),
        mass: config.profile.mass,
        cap: config.cap(),
    };
    let spec = SweepSpec {
        parameter: config.sweep_parameter(),
        values: config.sweep_values(),
        bisect_iters: if config.sweep.bisect {
            config.sweep.bisect_iters
        } else {
            0
        },
    };
    let result = run_sweep(&base, &spec, jobs)?;
    for r in &result.rows {
        println!(
            "{}={} predicted={} status={}",
            result.parameter.name(),
            r.value,
            r.verdict.predicted,
            r.status
        );
    }
    match result.bracket {
        Some((lo, hi)) => println!("bracket=[{lo}, {hi}]"),
        None => println!("bracket=none"),
    }
    if !result.is_monotone() {
        eprintln!("warning: more than one outcome change along the sweep grid");
    }
    out.with_file("sweep.csv", |w| result.write_csv(w))?;
    Ok(true)
}

pub fn verify_kernel(config: &Config, out: &Output) -> Result<bool> {
    let v = &config.verify;
    let scan = BoundScan {
        bound_scale: v.bound_scale,
        ..BoundScan::new(v.n_tau, v.n_u)
    };
    let mut rows = Vec::new();
    let mut all_passed = true;
    for &nu in &v.dims {
        let dim = Dimension::new(nu)?;
        let bound = verify_kernel_bound_with(dim, &scan)?;
        let slope = verify_f_decreasing(dim, v.f_samples)?;
        println!("{}", bound.summary());
        println!(
            "nu={nu} f decreasing: samples={} max_slope_below_one={} max_fd_rel_error={:e} passed={}",
            slope.n_samples,
            slope.max_slope_below_one,
            slope.max_fd_rel_error,
            slope.passed()
        );
        out.with_file(&format!("kernel_bound_nu{nu}.csv"), |w| bound.write_csv(w))?;
        all_passed &= !bound.violated && slope.passed();
        rows.push((bound, slope));
    }
    out.with_file("kernel_summary.csv", |w| {
        writeln!(
            w,
            "nu,min_value,argmin_tau,argmin_u,bound,violated,argmin_near_corner,\
             f_max_slope_below_one,f_fd_max_rel_error,f_decreasing"
        )?;
        for (b, s) in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                b.dim,
                b.min_value,
                b.argmin.0,
                b.argmin.1,
                b.bound,
                b.violated,
                b.argmin_near_corner(),
                s.max_slope_below_one,
                s.max_fd_rel_error,
                s.passed()
            )?;
        }
        Ok(())
    })?;
    if !all_passed {
        eprintln!("kernel verification failed");
    }
    Ok(all_passed)
}

pub fn verify_moment(config: &Config, out: &Output) -> Result<bool> {
    let (solver, rho0) = initial_datum(config)?;
    warn_if_unreachable(&solver, &rho0);
    let mut trajectory = Vec::new();
    let outcome = run_with_observer(&solver, &rho0, |rec, rho| {
        trajectory.push((rec.t, rho.clone()))
    })?;
    println!("{}", outcome.summary());
    write_outcome(out, &outcome)?;

    let options = config.monitor_options(outcome.status.is_detection());
    let report = monitor_trajectory(&trajectory, solver.z, &options)?;
    println!("{}", report.summary());
    out.with_file("moment_inequality.csv", |w| report.write_csv(w))?;

    let passed = report.passed() && report.shrinking_consistent();
    if !report.shrinking_consistent() {
        eprintln!("criterion predicted blow-up but M_nu did not strictly decrease");
    }
    if !passed {
        eprintln!("moment verification failed");
    }
    Ok(passed)
}
