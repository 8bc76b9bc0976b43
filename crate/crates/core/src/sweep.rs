//! Parameter sweeps over initial data, localising the empirical boundary
//! between runs that detect blow-up and runs that do not.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::criterion::{evaluate_criterion, Verdict};
use crate::error::{invalid, Error, Result};
use crate::math::{moment, total_mass};
use crate::solver::{init_profile, run, ProfileFamily, RunStatus, SolverConfig};

/// How the blow-up density threshold is set for each run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlowUpCap {
    Absolute(f64),
    /// Multiple of the run's initial maximum density.
    RelativeToInitialMax(f64),
}

impl BlowUpCap {
    pub fn resolve(self, initial_max: f64) -> f64 {
        match self {
            BlowUpCap::Absolute(cap) => cap,
            BlowUpCap::RelativeToInitialMax(factor) => factor * initial_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParameter {
    Mass,
    /// The family's length scale: Gaussian sigma, ball radius or ring width.
    Scale,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Mass => "mass",
            SweepParameter::Scale => "scale",
        }
    }
}

/// Everything held fixed across a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepBase {
    pub solver: SolverConfig,
    pub family: ProfileFamily,
    pub mass: f64,
    pub cap: BlowUpCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Bisection steps on the first detected/undetected transition.
    pub bisect_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub mass: f64,
    pub verdict: Verdict,
    pub status: RunStatus,
    pub detected_time: Option<f64>,
    pub final_max_density: f64,
    pub rho_cap: f64,
    pub max_mass_drift: f64,
    pub min_density: f64,
    pub steps: u64,
    pub from_bisection: bool,
}

impl SweepRow {
    pub fn detected(&self) -> bool {
        self.status.is_detection()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    /// Grid rows in sweep order, then bisection rows in evaluation order.
    pub rows: Vec<SweepRow>,
    /// Pairs of neighbouring grid values whose outcomes differ.
    pub transitions: Vec<(f64, f64)>,
    /// Final `(lo, hi)` interval around the first transition.
    pub bracket: Option<(f64, f64)>,
}

impl SweepResult {
    /// At most one outcome change along the grid.
    pub fn is_monotone(&self) -> bool {
        self.transitions.len() <= 1
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# parameter sweep over {}", self.parameter.name())?;
        match self.bracket {
            Some((lo, hi)) => writeln!(w, "# bracket lo={lo} hi={hi}")?,
            None => writeln!(w, "# bracket none")?,
        }
        let transitions: Vec<String> = self
            .transitions
            .iter()
            .map(|(a, b)| format!("[{a};{b}]"))
            .collect();
        writeln!(
            w,
            "# transitions={} monotone={}",
            transitions.join(" "),
            self.is_monotone()
        )?;
        writeln!(
            w,
            "value,mass,predicted,margin,status,detected_time,final_max_density,rho_cap,\
             max_mass_drift,min_density,steps,phase"
        )?;
        for r in &self.rows {
            let detected = r.detected_time.map_or_else(String::new, |t| t.to_string());
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.value,
                r.mass,
                r.verdict.predicted,
                r.verdict.margin,
                r.status,
                detected,
                r.final_max_density,
                r.rho_cap,
                r.max_mass_drift,
                r.min_density,
                r.steps,
                if r.from_bisection { "bisect" } else { "grid" }
            )?;
        }
        Ok(())
    }
}

fn with_scale(family: ProfileFamily, scale: f64) -> ProfileFamily {
    match family {
        ProfileFamily::Gaussian { .. } => ProfileFamily::Gaussian { sigma: scale },
        ProfileFamily::UniformBall { .. } => ProfileFamily::UniformBall { radius: scale },
        ProfileFamily::Ring { center, .. } => ProfileFamily::Ring {
            center,
            width: scale,
        },
    }
}

/// Builds the initial datum for one parameter value, evaluates the criterion
/// on it and runs the solver.
pub fn run_point(base: &SweepBase, parameter: SweepParameter, value: f64) -> Result<SweepRow> {
    let (family, mass) = match parameter {
        SweepParameter::Mass => (base.family, value),
        SweepParameter::Scale => (with_scale(base.family, value), base.mass),
    };
    let rho0 = init_profile(family, mass, &base.solver)?;
    let dim = base.solver.dim;
    let verdict = evaluate_criterion(
        dim,
        base.solver.z,
        total_mass(&rho0),
        moment(&rho0, dim.as_f64())?,
    )?;
    let mut config = base.solver;
    config.rho_cap = base.cap.resolve(rho0.max_density());
    let out = run(&config, &rho0)?;
    Ok(SweepRow {
        value,
        mass,
        verdict,
        status: out.status,
        detected_time: out.detected_time,
        final_max_density: out.final_max_density(),
        rho_cap: config.rho_cap,
        max_mass_drift: out.max_mass_drift,
        min_density: out.min_density,
        steps: out.steps,
        from_bisection: false,
    })
}

/// Runs every grid value on up to `jobs` threads (rows come back in sweep
/// order), then bisects the first transition.
pub fn run_sweep(base: &SweepBase, spec: &SweepSpec, jobs: usize) -> Result<SweepResult> {
    if spec.values.is_empty() {
        return Err(Error::Precondition("sweep has no values".into()));
    }
    if jobs == 0 {
        return Err(invalid("jobs", 0.0, "need at least one job"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    let mut rows: Vec<SweepRow> = pool.install(|| {
        spec.values
            .par_iter()
            .map(|&v| run_point(base, spec.parameter, v))
            .collect::<Result<_>>()
    })?;

    let transitions: Vec<(f64, f64)> = rows
        .windows(2)
        .filter(|w| w[0].detected() != w[1].detected())
        .map(|w| (w[0].value, w[1].value))
        .collect();

    let bracket = match transitions.first() {
        None => None,
        Some(&(mut lo, mut hi)) => {
            let lo_detected = rows
                .iter()
                .find(|r| r.value == lo)
                .map(SweepRow::detected)
                .expect("transition value comes from the grid");
            for _ in 0..spec.bisect_iters {
                let mid = 0.5 * (lo + hi);
                let mut row = run_point(base, spec.parameter, mid)?;
                row.from_bisection = true;
                if row.detected() == lo_detected {
                    lo = mid;
                } else {
                    hi = mid;
                }
                rows.push(row);
            }
            Some((lo.min(hi), lo.max(hi)))
        }
    };

    Ok(SweepResult {
        parameter: spec.parameter,
        rows,
        transitions,
        bracket,
    })
}
