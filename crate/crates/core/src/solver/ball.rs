use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use super::{check_dimension, InitialGuess, LambdaChoice, SolverConfig, Trajectory, Variant};
use crate::conv::{divergence_symbol, etd_step, propagate, EtdTable};
use crate::error::{Error, Result};
use crate::grid::{
    forward_transform, inverse_transform, lp_norm_unchecked, Field, GridSpec, SpectralField,
};

/// Radial retraction onto `{ |v|_{2p} <= radius }`.
pub fn project_ball(v: &Field, radius: f64, p: f64) -> Field {
    let norm = lp_norm_unchecked(v.grid(), v.values(), 2.0 * p);
    if norm <= radius {
        return v.clone();
    }
    let mut factor = radius / norm;
    loop {
        let out = v.scaled(factor);
        // Rounding can leave the rescaled norm a hair above the radius.
        if lp_norm_unchecked(out.grid(), out.values(), 2.0 * p) <= radius {
            return out;
        }
        factor *= 1.0 - f64::EPSILON;
    }
}

/// `(int_0^T e^{-lambda t} |U(t)|_{2p}^{2p} dt)^{1/2p}` by the trapezoid rule.
pub fn weighted_norm(u: &Trajectory, lambda: f64, p: f64) -> f64 {
    let norms: Vec<f64> = u
        .fields()
        .iter()
        .map(|f| lp_norm_unchecked(f.grid(), f.values(), 2.0 * p))
        .collect();
    weighted_norm_of_norms(u.times(), &norms, lambda, p)
}

/// [`weighted_norm`] from precomputed `|U(t_k)|_{2p}`.
pub fn weighted_norm_of_norms(times: &[f64], norms: &[f64], lambda: f64, p: f64) -> f64 {
    let q = 2.0 * p;
    let g: Vec<f64> = times
        .iter()
        .zip(norms)
        .map(|(t, n)| (-lambda * t).exp() * n.powf(q))
        .collect();
    let integral: f64 = times
        .windows(2)
        .zip(g.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum();
    integral.powf(1.0 / q)
}

/// `1/lambda + Gamma(b) lambda^{-b}` with `b = (6p - d)/(8p)`: the factor by
/// which the solution map can stretch distances in the weighted norm.
fn stretch(lambda: f64, p: f64, d: usize) -> f64 {
    let b = (6.0 * p - d as f64) / (8.0 * p);
    1.0 / lambda + gamma(b) * lambda.powf(-b)
}

/// Root of `1/lambda + Gamma((6p-d)/(8p)) lambda^{(d-6p)/(8p)} = min(1, 1/c)`.
///
/// The left side decreases strictly from infinity to zero, so the root is
/// unique; it is located by bisection. Fails for `d >= 6p`.
pub fn lambda_threshold(c: f64, p: f64, d: usize) -> Result<f64> {
    check_dimension(p, d)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::validation(format!("contraction constant must be positive, got {c}")));
    }
    let target = (1.0f64).min(1.0 / c);
    let f = |l: f64| stretch(l, p, d) - target;
    let mut lo = 1.0;
    while f(lo) < 0.0 {
        lo *= 0.5;
    }
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = if f(lo).abs() < f(hi).abs() { lo } else { hi };
    Ok(root)
}

/// The solution map `O_N` of the ball-projected equation on a fixed time
/// grid, applied to whole trajectories.
pub(crate) struct MildOperator {
    grid: GridSpec,
    p: f64,
    radius: f64,
    times: Vec<f64>,
    table: EtdTable,
    u0: Field,
    u0_hat: Vec<Complex64>,
    divergence: Vec<Complex64>,
    mask: Option<Vec<f64>>,
    linear: f64,
}

impl MildOperator {
    pub(crate) fn new(cfg: &SolverConfig, u0: &Field, radius: f64) -> Result<Self> {
        cfg.validate()?;
        if *u0.grid() != cfg.grid {
            return Err(Error::GridMismatch("initial data is not on the solver grid".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::validation(format!("ball radius must be positive, got {radius}")));
        }
        let mask = cfg.dealias.then(|| {
            cfg.grid
                .dealias_mask()
                .into_iter()
                .map(|keep| if keep { 1.0 } else { 0.0 })
                .collect()
        });
        Ok(MildOperator {
            grid: cfg.grid,
            p: cfg.p,
            radius,
            times: cfg.times(),
            table: EtdTable::lks(&cfg.grid, cfg.dt),
            u0: u0.clone(),
            u0_hat: forward_transform(u0).into_coeffs(),
            divergence: divergence_symbol(&cfg.grid),
            mask,
            linear: match cfg.variant {
                Variant::Full => 1.0,
                Variant::NoLinearTerm => 0.0,
            },
        })
    }


    // (1/2) linear * V^ + (1/2) div * (V^2)^ with V the projected slice.
    fn source(&self, u: &Field) -> Vec<Complex64> {
        let v = project_ball(u, self.radius, self.p);
        let v_hat = forward_transform(&v);
        let square = match &self.mask {
            Some(mask) => {
                let low = inverse_transform(&v_hat.multiply(mask));
                let sq: Vec<f64> = low.values().iter().map(|x| x * x).collect();
                forward_transform(&Field::from_raw(self.grid, sq)).multiply(mask)
            }
            None => {
                let sq: Vec<f64> = v.values().iter().map(|x| x * x).collect();
                forward_transform(&Field::from_raw(self.grid, sq))
            }
        };
        v_hat
            .coeffs()
            .iter()
            .zip(square.coeffs())
            .zip(&self.divergence)
            .map(|((lin, sq), div)| 0.5 * self.linear * lin + 0.5 * div * sq)
            .collect()
    }

    pub(crate) fn apply(&self, u: &[Field]) -> Vec<Field> {
        debug_assert_eq!(u.len(), self.times.len());
        let sources: Vec<Vec<Complex64>> = u.par_iter().map(|f| self.source(f)).collect();
        let mut acc = Vec::with_capacity(sources.len());
        acc.push(self.u0_hat.clone());
        for j in 0..sources.len() - 1 {
            let next = etd_step(&self.table, &acc[j], &sources[j], &sources[j + 1]);
            acc.push(next);
        }
        acc.into_par_iter()
            .enumerate()
            .map(|(j, c)| {
                if j == 0 {
                    self.u0.clone()
                } else {
                    inverse_transform(&SpectralField::new(self.grid, c).expect("grid length"))
                }
            })
            .collect()
    }

    /// `K_0 u_0` at every time.
    pub(crate) fn free_evolution(&self) -> Vec<Field> {
        let u0_hat = SpectralField::new(self.grid, self.u0_hat.clone()).expect("grid length");
        self.times
            .par_iter()
            .map(|&t| {
                if t == 0.0 {
                    self.u0.clone()
                } else {
                    inverse_transform(&propagate(&u0_hat, t))
                }
            })
            .collect()
    }
}

/// `O_N U` for a whole trajectory on the solver's time grid.
pub fn apply_on(cfg: &SolverConfig, u0: &Field, radius: f64, u: &Trajectory) -> Result<Trajectory> {
    let op = MildOperator::new(cfg, u0, radius)?;
    if u.len() != op.times.len() || *u.grid() != cfg.grid {
        return Err(Error::GridMismatch(
            "trajectory does not match the solver's space-time grid".into(),
        ));
    }
    Trajectory::new(op.times.clone(), op.apply(u.fields()), cfg.p)
}

/// Band-limited random fields, independent at each time, each rescaled to
/// `|.|_{2p} = norm`.
pub fn random_trajectory(grid: &GridSpec, times: &[f64], p: f64, norm: f64, seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = (grid.n() / 6).clamp(1, 8) as i64;
    let mut idx = vec![0; grid.dim()];
    let fields = times
        .iter()
        .map(|_| {
            let coeffs: Vec<Complex64> = (0..grid.len())
                .map(|flat| {
                    grid.unflatten(flat, &mut idx);
                    if idx.iter().all(|&j| grid.lattice_index(j).abs() <= kmax) {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    } else {
                        Complex64::default()
                    }
                })
                .collect();
            let f = inverse_transform(&SpectralField::new(*grid, coeffs).expect("grid length"));
            let current = lp_norm_unchecked(grid, f.values(), 2.0 * p);
            f.scaled(norm / current)
        })
        .collect();
    Trajectory::new(times.to_vec(), fields, p).expect("consistent trajectory")
}

/// `|O_N U - O_N V|_lambda / |U - V|_lambda` for each weight in `lambdas`.
pub fn contraction_ratio(
    cfg: &SolverConfig,
    u0: &Field,
    radius: f64,
    u: &Trajectory,
    v: &Trajectory,
    lambdas: &[f64],
) -> Result<Vec<f64>> {
    let op = MildOperator::new(cfg, u0, radius)?;
    ratios_with(&op, cfg.p, u, v, lambdas)
}

fn ratios_with(
    op: &MildOperator,
    p: f64,
    u: &Trajectory,
    v: &Trajectory,
    lambdas: &[f64],
) -> Result<Vec<f64>> {
    let ou = Trajectory::new(op.times.clone(), op.apply(u.fields()), p)?;
    let ov = Trajectory::new(op.times.clone(), op.apply(v.fields()), p)?;
    let out_diff = ou.difference(&ov)?;
    let in_diff = u.difference(v)?;
    lambdas
        .iter()
        .map(|&l| {
            let denom = weighted_norm_of_norms(in_diff.times(), in_diff.norms(), l, p);
            if denom == 0.0 {
                return Err(Error::validation("contraction pair must be distinct"));
            }
            Ok(weighted_norm_of_norms(out_diff.times(), out_diff.norms(), l, p) / denom)
        })
        .collect()
}

/// Smallest `C` with `ratio^{2p} <= C (1/lambda + Gamma(b) lambda^{-b})` over
/// `pairs` random trajectory pairs and reference weights 1, 4, 16.
pub fn calibrate_contraction_constant(
    cfg: &SolverConfig,
    u0: &Field,
    radius: f64,
    pairs: usize,
    seed: u64,
) -> Result<f64> {
    let op = MildOperator::new(cfg, u0, radius)?;
    calibrate_with(&op, cfg, radius, pairs, seed)
}

fn calibrate_with(
    op: &MildOperator,
    cfg: &SolverConfig,
    radius: f64,
    pairs: usize,
    seed: u64,
) -> Result<f64> {
    const REFERENCE: [f64; 3] = [1.0, 4.0, 16.0];
    let d = cfg.grid.dim();
    let mut worst = 0.0f64;
    for k in 0..pairs as u64 {
        let base = seed.wrapping_mul(1_000_003).wrapping_add(2 * k);
        let u = random_trajectory(&cfg.grid, &op.times, cfg.p, radius / 2.0, base);
        let v = random_trajectory(&cfg.grid, &op.times, cfg.p, radius / 2.0, base + 1);
        for (ratio, l) in ratios_with(op, cfg.p, &u, &v, &REFERENCE)?.into_iter().zip(REFERENCE) {
            worst = worst.max(ratio.powf(2.0 * cfg.p) / stretch(l, cfg.p, d));
        }
    }
    Ok(worst)
}

/// Output of one ball-projected solve.
#[derive(Debug, Clone)]
pub struct BallRun {
    pub radius: f64,
    pub lambda: f64,
    pub contraction_constant: f64,
    pub trajectory: Trajectory,
    pub iterations: usize,
    /// Weighted distance between successive iterates.
    pub differences: Vec<f64>,
    /// Ratios of successive differences.
    pub ratios: Vec<f64>,
    /// Weighted norm of `O_N U - U` for the returned trajectory.
    pub residual: f64,
}

/// Picard iteration `U <- O_N U` until successive iterates are closer than
/// `picard_tol`, both in the weighted norm and uniformly in time.
pub fn solve_ball(cfg: &SolverConfig, u0: &Field, radius: f64) -> Result<BallRun> {
    let op = MildOperator::new(cfg, u0, radius)?;
    let c = calibrate_with(&op, cfg, radius, 4, cfg.seed)?;
    let auto = 2.0 * lambda_threshold(c.max(f64::MIN_POSITIVE), cfg.p, cfg.grid.dim())?;
    let lambda = match cfg.lambda {
        LambdaChoice::Auto => auto,
        LambdaChoice::Fixed(l) => l.max(auto),
    };
    let mut current = match cfg.initial_guess {
        InitialGuess::Propagated => op.free_evolution(),
        InitialGuess::Zero => vec![Field::zeros(cfg.grid); op.times.len()],
    };
    let mut differences = Vec::new();
    let mut ratios = Vec::new();
    for iteration in 0..cfg.max_picard_iters {
        let next = op.apply(&current);
        let norms: Vec<f64> = next
            .par_iter()
            .zip(&current)
            .map(|(a, b)| {
                let diff: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
                lp_norm_unchecked(&cfg.grid, &diff, 2.0 * cfg.p)
            })
            .collect();
        let diff = weighted_norm_of_norms(&op.times, &norms, lambda, cfg.p);
        let sup = norms.iter().copied().fold(0.0, f64::max);
        if let Some(&prev) = differences.last() {
            ratios.push(if prev > 0.0 { diff / prev } else { 0.0 });
        }
        differences.push(diff);
        if !diff.is_finite() {
            break;
        }
        if diff < cfg.picard_tol && sup < cfg.picard_tol {
            // `current` is returned: its residual is exactly `diff`.
            return Ok(BallRun {
                radius,
                lambda,
                contraction_constant: c,
                trajectory: Trajectory::new(op.times.clone(), current, cfg.p)?,
                iterations: iteration,
                differences,
                ratios,
                residual: diff,
            });
        }
        current = next;
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_picard_iters,
        last_difference: differences.last().copied().unwrap_or(f64::NAN),
        last_ratio: ratios.last().copied().unwrap_or(f64::NAN),
    })
}
