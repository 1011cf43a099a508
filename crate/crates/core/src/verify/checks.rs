//! Quantitative checks of the solver against the estimates it is built on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::oracle::{direct_integrator, eikonal_integrator, relative_l2, spectral_derivative, OracleOptions};
use super::scaling::log_log_fit;
use crate::conv::{apply_k0, duhamel_k_series, duhamel_kdiv_series, SourceHistory};
use crate::error::{Error, Result};
use crate::grid::{lp_norm_unchecked, Field, GridSpec};
use crate::solver::{
    calibrate_contraction_constant, contraction_ratio, lambda_threshold, random_trajectory,
    solve_local, SolverConfig, Trajectory,
};

fn norm(f: &Field, p: f64) -> f64 {
    lp_norm_unchecked(f.grid(), f.values(), 2.0 * p)
}

#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub radius: f64,
    pub contraction_constant: f64,
    pub lambda: f64,
    /// Ratio per pair at `lambda`.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// Multiples of `lambda` in the sweep.
    pub sweep_factors: Vec<f64>,
    /// Ratios per pair across the sweep.
    pub sweeps: Vec<Vec<f64>>,
    /// Every pair's ratio decreases along the sweep.
    pub monotone: bool,
    pub pass: bool,
}

/// Measures `|O_N U - O_N V|_lambda / |U - V|_lambda` on `trials` random
/// pairs at `lambda = 2 lambda_0(C)`, with `C` calibrated on a disjoint set
/// of pairs and `N` the first scheduled radius.
pub fn check_contraction(cfg: &SolverConfig, trials: usize, seed: u64) -> Result<ContractionReport> {
    cfg.validate()?;
    if trials == 0 {
        return Err(Error::validation("contraction check needs at least one pair"));
    }
    let radius = cfg.n_schedule[0];
    // The initial datum cancels in differences.
    let u0 = Field::zeros(cfg.grid);
    let c = calibrate_contraction_constant(cfg, &u0, radius, 4, seed)?;
    let lambda = 2.0 * lambda_threshold(c.max(f64::MIN_POSITIVE), cfg.p, cfg.grid.dim())?;
    let factors = vec![1.0, 2.0, 4.0, 8.0];
    let lambdas: Vec<f64> = factors.iter().map(|f| f * lambda).collect();
    let times = cfg.times();
    let sweeps = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let base = seed.wrapping_mul(1_000_003).wrapping_add(1_000_000 + 2 * k);
            let u = random_trajectory(&cfg.grid, &times, cfg.p, radius / 2.0, base);
            let v = random_trajectory(&cfg.grid, &times, cfg.p, radius / 2.0, base + 1);
            contraction_ratio(cfg, &u0, radius, &u, &v, &lambdas)
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = sweeps.iter().map(|s| s[0]).collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let monotone = sweeps.iter().all(|s| s.windows(2).all(|w| w[1] < w[0]));
    Ok(ContractionReport {
        radius,
        contraction_constant: c,
        lambda,
        ratios,
        max_ratio,
        sweep_factors: factors,
        sweeps,
        monotone,
        pass: max_ratio < 1.0 && monotone,
    })
}

#[derive(Debug, Clone)]
pub struct ContinuityReport {
    /// Decreasing times.
    pub times: Vec<f64>,
    /// `|K_0 u0 (t) - u0|_{2p} / |u0|_{2p}` (absolute when `u0 = 0`).
    pub relative: Vec<f64>,
    pub monotone: bool,
    /// The relative difference at `t = 1e-4`.
    pub at_threshold: f64,
    pub pass: bool,
}

pub const CONTINUITY_TIME: f64 = 1e-4;
pub const CONTINUITY_BOUND: f64 = 1e-4;

/// `t = 2^{-1}, ..., 2^{-j_max}`.
pub fn dyadic_times(j_max: u32) -> Vec<f64> {
    (1..=j_max).map(|j| 0.5f64.powi(j as i32)).collect()
}

/// Decay of `|K_0 u0 (t) - u0|_{2p}` as `t` decreases along `t_seq`, and its
/// size at `t = 1e-4`.
pub fn check_initial_continuity(u0: &Field, t_seq: &[f64], p: f64) -> Result<ContinuityReport> {
    if t_seq.is_empty() || t_seq.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::validation("continuity times must be positive"));
    }
    let mut times = t_seq.to_vec();
    times.sort_by(|a, b| b.total_cmp(a));
    let scale = norm(u0, p);
    let rel = |t: f64| {
        let d = norm(&apply_k0(u0, t).difference(u0).expect("same grid"), p);
        if scale > 0.0 {
            d / scale
        } else {
            d
        }
    };
    let relative: Vec<f64> = times.par_iter().map(|&t| rel(t)).collect();
    let monotone = relative.windows(2).all(|w| w[1] <= w[0]);
    let at_threshold = rel(CONTINUITY_TIME);
    Ok(ContinuityReport {
        times,
        relative,
        monotone,
        at_threshold,
        pass: monotone && at_threshold <= CONTINUITY_BOUND,
    })
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub deltas: Vec<f64>,
    /// `sup_t |U^1 - U^2|_{2p} / |delta g|_{2p}` per nonzero delta.
    pub ratios: Vec<f64>,
    /// Largest over smallest ratio.
    pub spread: f64,
    pub pass: bool,
}

/// Solves from `u0` and `u0 + delta g` for a fixed smooth `g` with
/// `|g|_{2p} = 1` and compares the resulting stability ratios.
pub fn check_stability(cfg: &SolverConfig, u0: &Field, deltas: &[f64], seed: u64) -> Result<StabilityReport> {
    let g = random_trajectory(&cfg.grid, &[0.0], cfg.p, 1.0, seed).fields()[0].clone();
    let base = solve_local(cfg, u0)?.trajectory;
    let deltas: Vec<f64> = deltas.iter().copied().filter(|d| *d != 0.0).collect();
    if deltas.is_empty() {
        return Err(Error::validation("stability check needs a nonzero perturbation"));
    }
    let ratios = deltas
        .iter()
        .map(|&delta| {
            let perturbed = solve_local(cfg, &u0.add_scaled(delta, &g)?)?.trajectory;
            let len = base.len().min(perturbed.len());
            Ok(base.sup_distance(&perturbed, len)? / (delta.abs() * norm(&g, cfg.p)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = max / min;
    Ok(StabilityReport {
        deltas,
        ratios,
        spread,
        pass: spread <= 2.0,
    })
}

/// Convolution whose time regularity is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolderOperator {
    /// `sum_l K_l`: exponent below `(6p - d)/(8p) - 1/gamma`.
    Kdiv,
    /// `K`: exponent below `1 - 1/gamma`.
    K,
}

impl HolderOperator {
    pub fn name(self) -> &'static str {
        match self {
            HolderOperator::Kdiv => "kdiv",
            HolderOperator::K => "k",
        }
    }

    fn base(self, p: f64, d: usize) -> f64 {
        match self {
            HolderOperator::Kdiv => (6.0 * p - d as f64) / (8.0 * p),
            HolderOperator::K => 1.0,
        }
    }

    /// Twice the smallest admissible `gamma`.
    pub fn default_gamma(self, p: f64, d: usize) -> f64 {
        2.0 / self.base(p, d)
    }

    pub fn theoretical_exponent(self, p: f64, d: usize, gamma: f64) -> f64 {
        self.base(p, d) - 1.0 / gamma
    }
}

#[derive(Debug, Clone)]
pub struct HolderReport {
    pub operator: HolderOperator,
    pub p: f64,
    pub d: usize,
    pub gamma: f64,
    pub theoretical: f64,
    pub fitted: f64,
    pub lags: Vec<f64>,
    /// Largest `|O(s + lag) - O(s)|_{2p}` seen per lag.
    pub increments: Vec<f64>,
    pub pass: bool,
}

/// Fits the Hölder exponent in time of `K h` or `K_div h` for `pairs`
/// random bounded histories `h`, sampling start times at random. The lags
/// are `dt, 2 dt, ..., 64 dt` on the configuration's time grid.
pub fn check_holder(
    operator: HolderOperator,
    cfg: &SolverConfig,
    gamma: f64,
    pairs: usize,
    seed: u64,
) -> Result<HolderReport> {
    cfg.validate()?;
    let (p, d) = (cfg.p, cfg.grid.dim());
    if !(gamma * operator.base(p, d) > 1.0) {
        return Err(Error::validation(format!(
            "gamma = {gamma} is below the admissible threshold {}",
            1.0 / operator.base(p, d)
        )));
    }
    let times = cfg.times();
    let shifts: Vec<usize> = (0..7).map(|k| 1usize << k).collect();
    let max_shift = *shifts.last().unwrap();
    if times.len() <= max_shift + 1 {
        return Err(Error::validation(format!(
            "Hölder check needs more than {} time steps",
            max_shift + 1
        )));
    }
    let per_history = (0..pairs.max(1) as u64)
        .into_par_iter()
        .map(|k| {
            let h = random_trajectory(&cfg.grid, &times, p, 1.0, seed.wrapping_add(k));
            let history = SourceHistory::from_fields(times.clone(), h.fields())?;
            let out = match operator {
                HolderOperator::Kdiv => duhamel_kdiv_series(&history),
                HolderOperator::K => duhamel_k_series(&history),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k) ^ 0x9e37_79b9);
            let starts: Vec<usize> = (0..8)
                .map(|_| rng.random_range(0..times.len() - max_shift))
                .collect();
            let inc: Vec<f64> = shifts
                .iter()
                .map(|&s| {
                    starts
                        .iter()
                        .map(|&j| norm(&out[j + s].difference(&out[j]).expect("same grid"), p))
                        .fold(0.0, f64::max)
                })
                .collect();
            Ok(inc)
        })
        .collect::<Result<Vec<_>>>()?;
    let increments: Vec<f64> = (0..shifts.len())
        .map(|i| per_history.iter().map(|v| v[i]).fold(0.0, f64::max))
        .collect();
    let lags: Vec<f64> = shifts.iter().map(|&s| s as f64 * cfg.dt).collect();
    let theoretical = operator.theoretical_exponent(p, d, gamma);
    let samples: Vec<(f64, f64)> = lags.iter().copied().zip(increments.iter().copied()).collect();
    // Zero input gives zero increments, which any exponent satisfies.
    let fitted = if increments.iter().all(|&v| v > 0.0) {
        log_log_fit(&samples).0
    } else {
        f64::INFINITY
    };
    Ok(HolderReport {
        operator,
        p,
        d,
        gamma,
        theoretical,
        fitted,
        lags,
        increments,
        pass: fitted >= theoretical - 0.05,
    })
}

#[derive(Debug, Clone)]
pub struct EikonalReport {
    pub t_final: f64,
    /// `|d_x U~(T) - U(T)|_2 / |U(T)|_2`.
    pub relative_l2: f64,
    pub pass: bool,
}

pub const EIKONAL_TOLERANCE: f64 = 1e-3;

/// Integrates the eikonal form from `u0_tilde`, differentiates, and compares
/// with the fixed-point solution of the Burgers form from `d_x u0_tilde`.
pub fn eikonal_crosscheck(u0_tilde: &Field, cfg: &SolverConfig) -> Result<EikonalReport> {
    let eik = eikonal_integrator(cfg, u0_tilde, OracleOptions::default())?;
    let u0 = spectral_derivative(u0_tilde);
    let sol = solve_local(cfg, &u0)?;
    let last = sol.trajectory.len() - 1;
    let t = sol.trajectory.times()[last];
    let derived = spectral_derivative(&eik.fields()[last]);
    let relative_l2 = relative_l2(&derived, &sol.trajectory.fields()[last])?;
    Ok(EikonalReport {
        t_final: t,
        relative_l2,
        pass: relative_l2 <= EIKONAL_TOLERANCE,
    })
}

#[derive(Debug, Clone)]
pub struct GlueReport {
    /// `(N, M, tau_N, max_{t < tau_N} |U_M(t) - U_N(t)|_{2p})`.
    pub pairs: Vec<(f64, f64, f64, f64)>,
    pub max_difference: f64,
    pub tolerance: f64,
    /// Number of radii exited before `T`.
    pub exited: usize,
    pub pass: bool,
}

/// Compares every pair of solved balls `N < M` on the grid times strictly
/// before `tau_N`. At `tau_N` itself the projection of `U_N` is already
/// active, so that sample is excluded.
pub fn glue_consistency(cfg: &SolverConfig, u0: &Field) -> Result<GlueReport> {
    let sol = solve_local(cfg, u0)?;
    let mut pairs = Vec::new();
    for (i, small) in sol.runs.iter().enumerate() {
        let tau = sol.exit_time(small.radius).unwrap_or(cfg.t_final);
        let end = small.trajectory.index_of(tau).unwrap_or(small.trajectory.len());
        for large in &sol.runs[i + 1..] {
            let diff = small.trajectory.sup_distance(&large.trajectory, end)?;
            pairs.push((small.radius, large.radius, tau, diff));
        }
    }
    let max_difference = pairs.iter().map(|p| p.3).fold(0.0, f64::max);
    let tolerance = 10.0 * cfg.picard_tol;
    let exited = sol.exit_times.iter().filter(|e| e.1 < cfg.t_final).count();
    Ok(GlueReport {
        pass: exited > 0 && !pairs.is_empty() && max_difference <= tolerance,
        pairs,
        max_difference,
        tolerance,
        exited,
    })
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub dt: f64,
    pub relative_l2: f64,
    pub relative_l2_half_dt: f64,
    /// Error at `dt` over error at `dt / 2`.
    pub improvement: f64,
    pub pass: bool,
}

pub const ORACLE_TOLERANCE: f64 = 1e-3;

fn oracle_error(cfg: &SolverConfig, u0: &Field) -> Result<f64> {
    let sol = solve_local(cfg, u0)?;
    let reference = direct_integrator(cfg, u0)?;
    let k = sol.trajectory.len() - 1;
    relative_l2(&sol.trajectory.fields()[k], &reference.fields()[k])
}

/// Final-time agreement of [`solve_local`] with the direct integrator at
/// `dt` and `dt / 2`.
pub fn oracle_agreement(cfg: &SolverConfig, u0: &Field) -> Result<OracleReport> {
    let coarse = oracle_error(cfg, u0)?;
    let mut half = cfg.clone();
    half.dt = cfg.dt / 2.0;
    let fine = oracle_error(&half, u0)?;
    let improvement = coarse / fine;
    Ok(OracleReport {
        dt: cfg.dt,
        relative_l2: coarse,
        relative_l2_half_dt: fine,
        improvement,
        pass: coarse <= ORACLE_TOLERANCE && improvement >= 2.0,
    })
}

#[derive(Debug, Clone)]
pub struct MeanReport {
    pub initial_mean: f64,
    /// `max_t |mean(t) - mean(0)| / (|mean(0)| t)`.
    pub drift_rate: f64,
    pub pass: bool,
}

pub const MEAN_DRIFT_BOUND: f64 = 1e-9;

/// Relative drift per unit time of the spatial mean along a trajectory.
pub fn mean_drift(traj: &Trajectory) -> MeanReport {
    let m0 = traj.fields()[0].mean();
    let scale = if m0 == 0.0 { 1.0 } else { m0.abs() };
    let drift_rate = traj
        .times()
        .iter()
        .zip(traj.fields())
        .skip(1)
        .map(|(t, f)| (f.mean() - m0).abs() / (scale * t))
        .fold(0.0, f64::max);
    MeanReport {
        initial_mean: m0,
        drift_rate,
        pass: drift_rate <= MEAN_DRIFT_BOUND,
    }
}

#[derive(Debug, Clone)]
pub struct KernelConsistencyReport {
    pub times: Vec<f64>,
    /// Max relative deviation per time.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Off-lattice quadrature of the one-dimensional kernel against spectral
/// synthesis on the grid points of `grid` with `0 <= r <= r_max`. Deviations
/// are relative to the largest sampled magnitude.
pub fn kernel_consistency(ts: &[f64], r_max: f64, grid: &GridSpec) -> Result<KernelConsistencyReport> {
    use crate::kernel::{kernel_on_grid, lks_kernel_real, KernelKind};
    if grid.dim() != 1 {
        return Err(Error::validation("kernel consistency runs in one dimension"));
    }
    let h = grid.spacing();
    let count = (r_max / h).floor() as usize + 1;
    let deviations = ts
        .iter()
        .map(|&t| {
            let synth = kernel_on_grid(KernelKind::Kernel, t, grid)?;
            let quad = (0..count)
                .into_par_iter()
                .map(|j| lks_kernel_real(t, j as f64 * h, 1))
                .collect::<Result<Vec<f64>>>()?;
            let scale = quad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let worst = quad
                .iter()
                .zip(synth.values())
                .map(|(q, s)| (q - s).abs())
                .fold(0.0, f64::max);
            Ok(worst / scale)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(KernelConsistencyReport {
        times: ts.to_vec(),
        deviations,
        max_deviation,
        pass: max_deviation <= 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_continuity() {
        let g = GridSpec::new(1, 32, 20.0).unwrap();
        let r = check_initial_continuity(&Field::zeros(g), &dyadic_times(6), 1.0).unwrap();
        assert!(r.relative.iter().all(|&v| v == 0.0) && r.pass);
    }

    #[test]
    fn neutral_mode_is_invariant() {
        // k = sqrt 2 exactly on a box of length 2 pi sqrt 2 / 2.
        let g = GridSpec::new(1, 32, 2.0 * std::f64::consts::PI / 2f64.sqrt()).unwrap();
        let k = g.wavenumber_step();
        assert!((k * k - 2.0).abs() < 1e-12);
        let u0 = Field::from_fn(g, |x| (k * x[0]).cos()).unwrap();
        let r = check_initial_continuity(&u0, &dyadic_times(8), 1.0).unwrap();
        assert!(r.relative.iter().all(|&v| v < 1e-14), "{:?}", r.relative);
    }

    #[test]
    fn zero_history_has_zero_increments() {
        let g = GridSpec::new(1, 32, 20.0).unwrap();
        let cfg = SolverConfig::new(1.0, g, 0.1, 1e-3).unwrap();
        let times = cfg.times();
        let zeros = vec![Field::zeros(g); times.len()];
        let out = duhamel_kdiv_series(&SourceHistory::from_fields(times, &zeros).unwrap());
        assert!(out.iter().all(|f| f.values().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn holder_gamma_threshold() {
        let g = GridSpec::new(1, 32, 20.0).unwrap();
        let cfg = SolverConfig::new(1.0, g, 0.1, 1e-3).unwrap();
        assert!(check_holder(HolderOperator::Kdiv, &cfg, 1.5, 1, 0).is_err());
        assert!((HolderOperator::Kdiv.default_gamma(1.0, 1) - 3.2).abs() < 1e-12);
        assert!((HolderOperator::Kdiv.theoretical_exponent(1.0, 1, 3.2) - 0.3125).abs() < 1e-12);
        assert!((HolderOperator::K.theoretical_exponent(1.0, 1, 2.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_mean_has_no_drift() {
        let g = GridSpec::new(1, 16, 10.0).unwrap();
        let f = Field::new(g, vec![2.0; 16]).unwrap();
        let traj = Trajectory::new(vec![0.0, 0.1], vec![f.clone(), f], 1.0).unwrap();
        assert_eq!(mean_drift(&traj).drift_rate, 0.0);
    }
}
