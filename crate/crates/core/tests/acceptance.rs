//! Acceptance checks, one line per criterion. Runs sequentially so that the
//! timed criteria measure the work they describe.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pkslab_core::{
    evaluate_criterion, hoelder_rhs, implied_m2_bound, init_profile, interaction_v,
    interaction_v_rs, interpolation_residual, moment, monitor_trajectory, run, run_sweep,
    run_with_observer, total_mass, verify_f_decreasing, verify_kernel_bound, BlowUpCap, Dimension,
    KernelPoint, MonitorOptions, ProfileFamily, RadialDensity, RunStatus, SimulationOutcome,
    SolverConfig, SourceStrength, SweepBase, SweepParameter, SweepSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn dim(nu: u32) -> Dimension {
    Dimension::new(nu).unwrap()
}

fn source(z: f64) -> SourceStrength {
    SourceStrength::new(z).unwrap()
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn config(nu: u32, z: f64, radius: f64, n_cells: usize, t_end: f64, snapshot: f64) -> SolverConfig {
    SolverConfig {
        dim: dim(nu),
        z: source(z),
        radius,
        n_cells,
        stretch: 1.0,
        t_end,
        cfl: 0.9,
        dt_min: 1e-14,
        rho_cap: 1.0,
        snapshot_every: snapshot,
    }
}

/// Conservation record of every run made by criteria 5 to 7.
#[derive(Default)]
struct RunLog {
    runs: usize,
    max_drift: f64,
    min_density: f64,
}

impl RunLog {
    fn add(&mut self, drift: f64, min_density: f64) {
        if self.runs == 0 {
            self.min_density = min_density;
        }
        self.runs += 1;
        self.max_drift = self.max_drift.max(drift);
        self.min_density = self.min_density.min(min_density);
    }

    fn add_outcome(&mut self, out: &SimulationOutcome) {
        self.add(out.max_mass_drift, out.min_density);
    }
}

fn kernel_bound() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for nu in 2..=6 {
        let start = Instant::now();
        let report = verify_kernel_bound(dim(nu), 512, 512).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let bound = 2f64.powi(2 - nu as i32);
        let pass = report.min_value >= bound - 1e-10
            && !report.violated
            && (nu == 2 || report.argmin_near_corner())
            && elapsed < Duration::from_secs(1);
        ok &= pass;
        lines.push(format!(
            "nu={nu} min={:.12} at ({:.4},{:.4}) {:.0?}",
            report.min_value, report.argmin.0, report.argmin.1, elapsed
        ));
    }
    ensure(ok, lines.join("; "))
}

fn two_dimensional_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = dim(2);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 100_000 {
        let r = 10f64.powf(rng.gen_range(-3.0..3.0));
        let s = 10f64.powf(rng.gen_range(-3.0..3.0));
        let u = rng.gen_range(-1.0..=1.0);
        let Ok(p) = KernelPoint::new(r, s, u, d) else {
            continue;
        };
        worst = worst
            .max((interaction_v(&p) - 1.0).abs())
            .max((interaction_v_rs(&p) - 1.0).abs());
        count += 1;
    }
    ensure(
        worst <= 1e-12,
        format!("{count} points, max |V-1| = {worst:e}"),
    )
}

fn f_monotone() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for nu in 2..=6 {
        let report = verify_f_decreasing(dim(nu), 10_000).map_err(|e| e.to_string())?;
        ok &= report.passed() && report.n_samples == 10_000;
        lines.push(format!(
            "nu={nu} max f'={:.3e} fd_err={:.2e}",
            report.max_slope_below_one, report.max_fd_rel_error
        ));
    }
    ensure(ok, lines.join("; "))
}

fn criterion_corollaries() -> Check {
    let a = evaluate_criterion(dim(2), source(0.0), 8.0 * PI, 1.0).map_err(|e| e.to_string())?;
    let b =
        evaluate_criterion(dim(2), source(4.0 * PI), 16.0 * PI, 1.0).map_err(|e| e.to_string())?;
    let rel = |m: f64, rhs: f64| m.abs() / rhs.abs();
    ensure(
        rel(a.margin, a.rhs) <= 1e-12 && rel(b.margin, b.rhs) <= 1e-12,
        format!(
            "margin(8pi, Z=0)={:e} margin(16pi, Z=4pi)={:e}",
            a.margin, b.margin
        ),
    )
}

fn threshold_sweep(log: &mut RunLog) -> Check {
    let sigma = 1.0;
    let critical = 8.0 * PI;
    let base = SweepBase {
        solver: config(2, 0.0, 8.0 * sigma, 2048, 5.0, 0.5),
        family: ProfileFamily::Gaussian { sigma },
        mass: critical,
        cap: BlowUpCap::RelativeToInitialMax(100.0),
    };
    let spec = SweepSpec {
        parameter: SweepParameter::Mass,
        values: (7..=15).map(|k| k as f64 / 10.0 * critical).collect(),
        bisect_iters: 2,
    };
    let start = Instant::now();
    let result = run_sweep(&base, &spec, 1).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    for row in &result.rows {
        log.add(row.max_mass_drift, row.min_density);
    }
    let detected: Vec<String> = result
        .rows
        .iter()
        .filter(|r| !r.from_bisection)
        .map(|r| format!("{:.1}:{}", r.value / critical, u8::from(r.detected())))
        .collect();
    let Some((lo, hi)) = result.bracket else {
        return Err(format!("no transition found ({})", detected.join(" ")));
    };
    ensure(
        lo >= 0.9 * critical
            && hi <= 1.1 * critical
            && result.is_monotone()
            && elapsed < Duration::from_secs(120),
        format!(
            "bracket [{:.4}, {:.4}] x 8pi, outcomes {} in {:.1?}",
            lo / critical,
            hi / critical,
            detected.join(" "),
            elapsed
        ),
    )
}

fn proof_chain(log: &mut RunLog) -> Check {
    let cases = [
        ("2D subcritical", 2, 0.5 * 8.0 * PI, 1.0, 4.0, 0.2),
        ("2D supercritical", 2, 1.5 * 8.0 * PI, 1.0, 10.0, 0.05),
        ("3D predicted", 3, 64.0 * PI, 0.5, 1.0, 0.0005),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (label, nu, mass, sigma, t_end, snapshot) in cases {
        let mut c = config(nu, 0.0, 8.0 * sigma, 512, t_end, snapshot);
        let rho0 =
            init_profile(ProfileFamily::Gaussian { sigma }, mass, &c).map_err(|e| e.to_string())?;
        c.rho_cap = 100.0 * rho0.max_density();
        let mut trajectory = Vec::new();
        let out = run_with_observer(&c, &rho0, |rec, rho| trajectory.push((rec.t, rho.clone())))
            .map_err(|e| e.to_string())?;
        log.add_outcome(&out);
        let options = MonitorOptions {
            ends_in_blowup: out.status.is_detection(),
            ..MonitorOptions::default()
        };
        let report = monitor_trajectory(&trajectory, c.z, &options).map_err(|e| e.to_string())?;
        let checked = report
            .rows
            .iter()
            .filter(|r| r.dmnu_dt_fd.is_some() && !r.near_singular)
            .count();
        ok &= report.passed() && checked >= 3;
        lines.push(format!(
            "{label}: {checked} snapshots, violations={} ordering={} worst excess={:.3}",
            report.violations(),
            report.ordering_failures(),
            report.max_violation
        ));
    }
    ensure(ok, lines.join("; "))
}

/// Mass above which the criterion holds for the shape of `unit`, a profile
/// of mass one.
fn critical_mass(unit: &RadialDensity, z: f64) -> f64 {
    let d = unit.dim();
    let nu = d.as_f64();
    let area = pkslab_core::sphere_area(d);
    let shape = moment(unit, nu).unwrap().powf((nu - 2.0) / nu);
    (nu - 1.0) * 2f64.powf(nu) * area * (shape + z / (2.0 * (nu - 1.0) * area))
}

fn shrinking_moment(log: &mut RunLog) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let zs = [-2.0 * PI, 0.0, 2.0 * PI];
    let mut ok = true;
    let mut failures = Vec::new();
    let mut detected = 0;
    for k in 0..20 {
        let nu = 2 + (k % 3) as u32;
        let z = zs[(k / 3) % 3];
        let scale = rng.gen_range(0.5..1.5);
        let (family, extent) = match k % 4 {
            0 | 1 => (ProfileFamily::Gaussian { sigma: scale }, 8.0 * scale),
            2 => (ProfileFamily::UniformBall { radius: scale }, 4.0 * scale),
            _ => (
                ProfileFamily::Ring {
                    center: scale,
                    width: 0.2 * scale,
                },
                4.0 * scale,
            ),
        };
        let mut c = config(nu, z, extent, 512, 1.0, 1.0);
        let unit = init_profile(family, 1.0, &c).map_err(|e| e.to_string())?;
        let mass = critical_mass(&unit, z) * rng.gen_range(1.3..2.5);
        let rho0 = init_profile(family, mass, &c).map_err(|e| e.to_string())?;
        let m0 = total_mass(&rho0);
        let m_nu = moment(&rho0, nu as f64).unwrap();
        let verdict = evaluate_criterion(c.dim, c.z, m0, m_nu).unwrap();
        let slope = hoelder_rhs(c.dim, c.z, m0, m_nu).unwrap();
        // the moment cannot outlast m_nu / |slope| while the bound holds
        let horizon = m_nu / -slope;
        c.t_end = 3.0 * horizon;
        c.snapshot_every = horizon / 50.0;
        c.rho_cap = 100.0 * rho0.max_density();
        let out = run(&c, &rho0).map_err(|e| e.to_string())?;
        log.add_outcome(&out);
        let decreasing = out.trajectory.windows(2).all(|w| w[1].m_nu < w[0].m_nu);
        let pass = verdict.is_predicted()
            && slope < 0.0
            && c.rho_cap < 0.1 * rho0.concentration_limit()
            && out.status == RunStatus::BlowUpDetected
            && decreasing;
        detected += usize::from(out.status == RunStatus::BlowUpDetected);
        if !pass {
            failures.push(format!(
                "#{k} nu={nu} Z={z:.2} {family:?} predicted={} slope={slope:.3e} {} decreasing={decreasing}",
                verdict.is_predicted(),
                out.summary()
            ));
        }
        ok &= pass;
    }
    ensure(
        ok,
        format!(
            "20 predicted profiles, {detected} BlowUpDetected{}{}",
            if failures.is_empty() { "" } else { "; " },
            failures.join("; ")
        ),
    )
}

fn conservation(log: &RunLog) -> Check {
    ensure(
        log.runs > 0 && log.max_drift <= 1e-10 && log.min_density >= 0.0,
        format!(
            "{} runs, max relative mass drift {:e}, min density {:e}",
            log.runs, log.max_drift, log.min_density
        ),
    )
}

fn random_profile(rng: &mut ChaCha8Rng, nu: u32) -> RadialDensity {
    let n = rng.gen_range(16..64);
    let mut faces = vec![0.0];
    for _ in 0..n {
        let last = *faces.last().unwrap();
        faces.push(last + rng.gen_range(0.01..1.0));
    }
    let mut values: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                0.0
            } else {
                (rng.gen_range(-4.0..4.0) as f64).exp()
            }
        })
        .collect();
    let k = rng.gen_range(0..n);
    values[k] += 1.0;
    RadialDensity::new(faces, values, dim(nu)).unwrap()
}

fn interpolation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let zs = [-2.0 * PI, 0.0, 2.0 * PI];
    let mut worst = f64::INFINITY;
    let mut ok = true;
    let mut bound_checks = 0;
    for k in 0..1000 {
        let nu = 2 + (k % 4) as u32;
        let rho = random_profile(&mut rng, nu);
        let m2 = moment(&rho, 2.0).unwrap();
        let residual = interpolation_residual(&rho);
        worst = worst.min(residual / m2);
        ok &= residual >= -1e-9 * m2;
        if nu == 2 {
            continue;
        }
        let z = source(zs[k % 3]);
        // amplify until the criterion holds
        let mut amplified = rho;
        let mut verdict = None;
        for _ in 0..40 {
            let m0 = total_mass(&amplified);
            let v = evaluate_criterion(
                amplified.dim(),
                z,
                m0,
                moment(&amplified, nu as f64).unwrap(),
            )
            .unwrap();
            if v.is_predicted() {
                verdict = Some(v);
                break;
            }
            amplified = amplified.scaled(10.0).unwrap();
        }
        let Some(v) = verdict else {
            return Err(format!("profile {k} never satisfied the criterion"));
        };
        let bound = implied_m2_bound(v.dim, z, v.m0).unwrap();
        ok &= moment(&amplified, 2.0).unwrap() < bound;
        bound_checks += 1;
    }
    ensure(
        ok && bound_checks == 750,
        format!("1000 profiles, min residual/M2 = {worst:e}; {bound_checks} predicted profiles with M2 below the implied bound"),
    )
}

fn source_ordering() -> Check {
    let zs = [-2.0 * PI, 0.0, 2.0 * PI];
    let mut times = Vec::new();
    for z in zs {
        let mut c = config(2, z, 8.0, 1024, 5.0, 0.5);
        let rho0 = init_profile(ProfileFamily::Gaussian { sigma: 1.0 }, 16.0 * PI, &c)
            .map_err(|e| e.to_string())?;
        c.rho_cap = 100.0 * rho0.max_density();
        let out = run(&c, &rho0).map_err(|e| e.to_string())?;
        times.push(out.detected_time);
    }
    let detail = format!(
        "detected times for Z = -2pi, 0, 2pi: {}",
        times
            .iter()
            .map(|t| t.map_or("none".into(), |t| format!("{t:.5}")))
            .collect::<Vec<_>>()
            .join(", ")
    );
    match (times[0], times[1], times[2]) {
        (Some(a), Some(b), Some(c)) => ensure(a < b && b < c, detail),
        _ => Err(detail),
    }
}

fn report(n: u32, title: &str, check: Check) -> bool {
    match check {
        Ok(detail) => {
            println!("criterion {n:>2} PASS  {title}: {detail}");
            true
        }
        Err(detail) => {
            println!("criterion {n:>2} FAIL  {title}: {detail}");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut log = RunLog::default();
    let results = [
        report(1, "kernel bound V >= 2^(2-nu)", kernel_bound()),
        report(
            2,
            "two-dimensional identity V = 1",
            two_dimensional_identity(),
        ),
        report(3, "f decreasing, closed-form slope", f_monotone()),
        report(
            4,
            "criterion thresholds 8pi and 16pi",
            criterion_corollaries(),
        ),
        report(5, "2D threshold sweep", threshold_sweep(&mut log)),
        report(6, "proof-chain ordering", proof_chain(&mut log)),
        report(
            7,
            "criterion implies shrinking moment",
            shrinking_moment(&mut log),
        ),
        report(8, "mass conservation and positivity", conservation(&log)),
        report(9, "interpolation inequality", interpolation()),
        report(10, "source-sign ordering", source_ordering()),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
