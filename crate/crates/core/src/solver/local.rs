use super::ball::{solve_ball, BallRun};
use super::{SolverConfig, Trajectory, Variant};
use crate::error::Result;
use crate::grid::{lp_norm_unchecked, Field};

/// Solution glued from ball-projected runs with increasing radii.
#[derive(Debug, Clone)]
pub struct LocalSolution {
    /// Glued trajectory on `[0, tau_inf)`, or on `[0, T]` when no radius was
    /// exited.
    pub trajectory: Trajectory,
    /// `(N, tau_N)` for every scheduled radius.
    pub exit_times: Vec<(f64, f64)>,
    pub tau_inf: f64,
    /// Largest radius that was actually solved.
    pub n_final: f64,
    /// False when even the largest radius was exited before `T`.
    pub saturated: bool,
    /// The individual ball runs, in schedule order.
    pub runs: Vec<BallRun>,
    pub warnings: Vec<String>,
}

impl LocalSolution {
    /// `tau_N` for a scheduled radius.
    pub fn exit_time(&self, radius: f64) -> Option<f64> {
        self.exit_times
            .iter()
            .find(|(n, _)| *n == radius)
            .map(|(_, t)| *t)
    }
}

/// First grid time with `|U(t)|_{2p} >= radius`, and its index.
fn exit_time(run: &BallRun, t_final: f64) -> (f64, Option<usize>) {
    let traj = &run.trajectory;
    match traj.norms().iter().position(|&n| n >= run.radius) {
        Some(k) => (traj.times()[k], Some(k)),
        None => (t_final, None),
    }
}

/// Runs the radius schedule and glues `U := U_N` below `tau_N`.
///
/// Once a radius is never reached on `[0, T]` the larger radii would
/// reproduce the same trajectory, so they are recorded with `tau_N = T`
/// without being solved again.
pub fn solve_local(cfg: &SolverConfig, u0: &Field) -> Result<LocalSolution> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let u0_norm = lp_norm_unchecked(u0.grid(), u0.values(), 2.0 * cfg.p);
    if u0_norm >= cfg.n_schedule[0] {
        warnings.push(format!(
            "|u0|_{{2p}} = {u0_norm:.4} is not below the first radius {}; start the schedule above it",
            cfg.n_schedule[0]
        ));
    }
    let times = cfg.times();
    let mut runs = Vec::new();
    let mut exit_times = Vec::new();
    // Per time index: which run supplies the glued value.
    let mut source: Vec<Option<usize>> = vec![None; times.len()];
    let mut covered = 0;
    let mut saturated = false;
    for &radius in &cfg.n_schedule {
        if saturated {
            exit_times.push((radius, cfg.t_final));
            continue;
        }
        let run = solve_ball(cfg, u0, radius)?;
        let (tau, index) = exit_time(&run, cfg.t_final);
        let end = index.unwrap_or(times.len());
        for slot in source.iter_mut().take(end).skip(covered) {
            *slot = Some(runs.len());
        }
        covered = covered.max(end);
        exit_times.push((radius, tau));
        saturated = index.is_none();
        runs.push(run);
    }
    let glued: Vec<Field> = source
        .iter()
        .enumerate()
        .map_while(|(k, s)| s.map(|r| runs[r].trajectory.fields()[k].clone()))
        .collect();
    let tau_inf = exit_times.iter().map(|e| e.1).fold(0.0, f64::max);
    if !saturated {
        warnings.push(format!(
            "local solution horizon not saturated: the largest radius {} is exited at t = {tau_inf}",
            cfg.n_schedule.last().unwrap()
        ));
    }
    let n = glued.len().max(1);
    let glued = if glued.is_empty() { vec![u0.clone()] } else { glued };
    Ok(LocalSolution {
        trajectory: Trajectory::new(times[..n].to_vec(), glued, cfg.p)?,
        exit_times,
        tau_inf,
        n_final: runs.last().map(|r| r.radius).unwrap_or(cfg.n_schedule[0]),
        saturated,
        runs,
        warnings,
    })
}

/// [`solve_local`] for the equation without the `U/2` term.
pub fn solve_variant(cfg: &SolverConfig, u0: &Field) -> Result<LocalSolution> {
    let mut cfg = cfg.clone();
    cfg.variant = Variant::NoLinearTerm;
    solve_local(&cfg, u0)
}
