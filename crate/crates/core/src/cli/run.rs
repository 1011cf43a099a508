use std::fs;
use std::path::{Path, PathBuf};

use super::config::{parse_config, Settings};
use super::{Cli, Command, EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK};
use crate::error::{Error, Result};
use crate::io;
use crate::kernel::{btbm_kernel, calibrate_envelope, envelope_bound, lks_samples, KernelKind};
use crate::solver::solve_local;
use crate::verify::{
    default_l1_grid, fit_l1_scaling, fit_lq_scaling, run_check, CheckOutcome, EstimateReport,
    CHECK_NAMES,
};

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Format(format!("{}: {other:?}", path.display())),
    }
}

/// Writes a CSV file with a header row.
fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone)]
pub struct SolveSummary {
    pub out_dir: PathBuf,
    pub samples: usize,
    pub tau_inf: f64,
    pub saturated: bool,
    pub dumps: usize,
    pub warnings: Vec<String>,
}

/// Runs the local solver and writes `norms.csv`, `exit_times.csv` and
/// `fields/u_<step>.lksf` under the output directory.
pub fn solve(s: &Settings) -> Result<SolveSummary> {
    let cfg = s.solver_config()?;
    let u0 = s.initial_data()?;
    ensure_dir(&s.out_dir)?;
    let sol = solve_local(&cfg, &u0)?;
    let traj = &sol.trajectory;
    // Sample k comes from the first run still inside its ball at k.
    let ends: Vec<usize> = sol
        .runs
        .iter()
        .map(|r| {
            let tau = sol.exit_time(r.radius).unwrap_or(cfg.t_final);
            if tau < cfg.t_final {
                r.trajectory.index_of(tau).unwrap_or(r.trajectory.len())
            } else {
                r.trajectory.len()
            }
        })
        .collect();
    let rows = (0..traj.len()).map(|k| {
        let i = ends.iter().position(|&e| k < e).unwrap_or(ends.len() - 1);
        let run = &sol.runs[i];
        vec![
            traj.times()[k].to_string(),
            traj.norms()[k].to_string(),
            traj.fields()[k].mean().to_string(),
            run.iterations.to_string(),
            run.radius.to_string(),
            sol.exit_time(run.radius).unwrap_or(cfg.t_final).to_string(),
        ]
    });
    write_csv(
        &s.out_dir.join("norms.csv"),
        &["t", "l2p_norm", "mean", "picard_iters", "ball_radius", "tau_N"],
        rows,
    )?;
    write_csv(
        &s.out_dir.join("exit_times.csv"),
        &["N", "tau_N"],
        sol.exit_times.iter().map(|(n, t)| vec![n.to_string(), t.to_string()]),
    )?;
    let mut dumps = 0;
    if s.dump_stride > 0 {
        let dir = s.out_dir.join("fields");
        ensure_dir(&dir)?;
        let last = traj.len() - 1;
        for k in (0..traj.len()).filter(|k| k % s.dump_stride == 0 || *k == last) {
            io::save(&dir.join(format!("u_{k:06}.lksf")), &traj.fields()[k], traj.times()[k])?;
            dumps += 1;
        }
    }
    Ok(SolveSummary {
        out_dir: s.out_dir.clone(),
        samples: traj.len(),
        tau_inf: sol.tau_inf,
        saturated: sol.saturated,
        dumps,
        warnings: sol.warnings,
    })
}

/// Runs `name` (or every check for `all`), writing `verify/<check>.csv` and
/// `verify/summary.csv`.
pub fn verify(s: &Settings, name: &str) -> Result<Vec<CheckOutcome>> {
    let names: Vec<&str> = if name == "all" {
        CHECK_NAMES.to_vec()
    } else if CHECK_NAMES.contains(&name) {
        vec![name]
    } else {
        return Err(Error::validation(format!(
            "unknown check `{name}`; expected one of {} or `all`",
            CHECK_NAMES.join(", ")
        )));
    };
    let dir = s.out_dir.join("verify");
    ensure_dir(&dir)?;
    let mut outcomes = Vec::new();
    for n in names {
        let o = run_check(n, s.seed)?;
        let header: Vec<&str> = o.detail.header.iter().map(String::as_str).collect();
        write_csv(&dir.join(format!("{n}.csv")), &header, o.detail.rows.clone())?;
        outcomes.push(o);
    }
    let rows = outcomes.iter().flat_map(|o| {
        o.summary.iter().map(|r| {
            vec![
                r.check.clone(),
                r.expected.to_string(),
                r.measured.to_string(),
                r.tolerance.to_string(),
                r.pass.to_string(),
            ]
        })
    });
    write_csv(
        &dir.join("summary.csv"),
        &["check", "expected", "measured", "tolerance", "pass"],
        rows.collect::<Vec<_>>(),
    )?;
    Ok(outcomes)
}

/// Tabulates both kernels and a kernel envelope calibrated on the same
/// samples, in the configured dimension (1, 3 or 5). Writes
/// `kernel_table.csv` and `envelope.csv`.
pub fn kernel_table(s: &Settings, times: &[f64], r_max: f64, r_count: usize) -> Result<PathBuf> {
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::validation("kernel-table times must be positive"));
    }
    if !(r_max > 0.0 && r_max.is_finite()) || r_count < 2 {
        return Err(Error::validation("kernel-table needs r_max > 0 and at least two radii"));
    }
    let d = s.d;
    let rs: Vec<f64> = (0..r_count)
        .map(|j| r_max * j as f64 / (r_count - 1) as f64)
        .collect();
    let samples = lks_samples(KernelKind::Kernel, d, times, &rs)?;
    let signed = lks_samples_signed(d, times, &rs)?;
    let env = calibrate_envelope(KernelKind::Kernel, d, &samples, 1.0)?;
    ensure_dir(&s.out_dir)?;
    let mut rows = Vec::with_capacity(samples.len());
    for (sample, k) in samples.iter().zip(signed) {
        rows.push(vec![
            sample.t.to_string(),
            sample.r.to_string(),
            d.to_string(),
            k.to_string(),
            btbm_kernel(sample.t, sample.r, d)?.to_string(),
            envelope_bound(&env, sample.t, sample.r, d)?.to_string(),
        ]);
    }
    let path = s.out_dir.join("kernel_table.csv");
    write_csv(&path, &["t", "r", "d", "K_lks", "K_btbm", "envelope"], rows)?;
    write_csv(
        &s.out_dir.join("envelope.csv"),
        &["kind", "d", "C", "c1", "c2"],
        [vec![
            env.kind.name().to_string(),
            d.to_string(),
            env.c.to_string(),
            env.c1.to_string(),
            env.c2.to_string(),
        ]],
    )?;
    Ok(path)
}

fn lks_samples_signed(d: usize, times: &[f64], rs: &[f64]) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let pairs: Vec<(f64, f64)> = times
        .iter()
        .flat_map(|&t| rs.iter().map(move |&r| (t, r)))
        .collect();
    pairs
        .par_iter()
        .map(|&(t, r)| crate::kernel::lks_kernel_real(t, r, d))
        .collect()
}

fn window(v: &[f64], what: &str) -> Result<(f64, f64)> {
    match v {
        [lo, hi] if *lo > 0.0 && lo < hi => Ok((*lo, *hi)),
        _ => Err(Error::validation(format!("{what} must be `lo,hi` with 0 < lo < hi"))),
    }
}

/// Fits the four one-dimensional `L^1` laws and the `L^q` law for the
/// configured `(p, d)`. Writes `scaling_samples.csv` and `scaling_summary.csv`.
pub fn scaling(s: &Settings, l1_window: &[f64], lq_window: &[f64]) -> Result<Vec<EstimateReport>> {
    let l1 = window(l1_window, "l1 window")?;
    let lq = window(lq_window, "lq window")?;
    let grid = default_l1_grid();
    let mut reports = KernelKind::ALL
        .iter()
        .map(|&k| fit_l1_scaling(k, l1, &grid))
        .collect::<Result<Vec<_>>>()?;
    reports.push(fit_lq_scaling(s.p, s.d, lq)?);
    ensure_dir(&s.out_dir)?;
    write_csv(
        &s.out_dir.join("scaling_samples.csv"),
        &["fit", "t", "norm"],
        reports.iter().flat_map(|r| {
            r.samples
                .iter()
                .map(|(t, v)| vec![r.name.clone(), t.to_string(), v.to_string()])
                .collect::<Vec<_>>()
        }),
    )?;
    write_csv(
        &s.out_dir.join("scaling_summary.csv"),
        &["fit", "expected", "fitted", "tolerance", "residual", "integrable", "pass"],
        reports.iter().map(|r| {
            vec![
                r.name.clone(),
                r.expected_exponent.to_string(),
                r.fitted_exponent.to_string(),
                r.tolerance.to_string(),
                r.regression_residual.to_string(),
                r.integrable.map_or(String::new(), |b| b.to_string()),
                r.pass.to_string(),
            ]
        }),
    )?;
    Ok(reports)
}

fn exit_for(e: &Error) -> i32 {
    eprintln!("error: {e}");
    if e.is_validation() {
        EXIT_INVALID
    } else {
        EXIT_NUMERICAL
    }
}

pub(super) fn execute(cli: &Cli) -> i32 {
    let settings = match parse_config(cli.config.as_deref(), &cli.overrides) {
        Ok(s) => s,
        Err(e) => return exit_for(&e),
    };
    let outcome = match &cli.command {
        Command::Solve => solve(&settings).map(|r| {
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "solved {} samples up to t = {} ({}); {} field dumps in {}",
                r.samples,
                r.tau_inf,
                if r.saturated { "saturated" } else { "not saturated" },
                r.dumps,
                r.out_dir.display()
            );
            EXIT_OK
        }),
        Command::Verify { check } => verify(&settings, check).map(|outcomes| {
            let mut ok = true;
            for o in &outcomes {
                for r in &o.summary {
                    ok &= r.pass;
                    println!(
                        "{:<4} {:<34} expected {:>12.5e}  measured {:>12.5e}  tolerance {:.1e}",
                        if r.pass { "PASS" } else { "FAIL" },
                        r.check,
                        r.expected,
                        r.measured,
                        r.tolerance
                    );
                }
            }
            if ok {
                EXIT_OK
            } else {
                EXIT_NUMERICAL
            }
        }),
        Command::KernelTable {
            times,
            r_max,
            r_count,
        } => kernel_table(&settings, times, *r_max, *r_count).map(|p| {
            println!("wrote {}", p.display());
            EXIT_OK
        }),
        Command::Scaling {
            l1_window,
            lq_window,
        } => scaling(&settings, l1_window, lq_window).map(|reports| {
            for r in &reports {
                println!(
                    "{:<4} {:<20} fitted {:>9.5}  expected {:>9.5}  tolerance {:.2}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.name,
                    r.fitted_exponent,
                    r.expected_exponent,
                    r.tolerance
                );
            }
            EXIT_OK
        }),
    };
    outcome.unwrap_or_else(|e| exit_for(&e))
}
