//! Mild-form solver for the Kuramoto–Sivashinsky–Burgers equation
//! `U_t = -(1/8)(Delta + 2)^2 U + U/2 - (1/2) sum_l d_l U^2`.
//!
//! The nonlinearity is first made globally Lipschitz by radially retracting
//! each time slice onto the `L^{2p}` ball of radius `N`. The resulting
//! equation is solved as a fixed point over whole trajectories
//! ([`solve_ball`]); running an increasing sequence of radii and keeping each
//! solution up to its exit time gives the local solution ([`solve_local`]).

mod ball;
mod local;

pub use ball::{
    apply_on, calibrate_contraction_constant, contraction_ratio, lambda_threshold,
    project_ball, random_trajectory, solve_ball, weighted_norm, weighted_norm_of_norms, BallRun,
};
pub use local::{solve_local, solve_variant, LocalSolution};

use crate::error::{Error, Result};
use crate::grid::{lp_norm_unchecked, Field, GridSpec};

/// Which equation is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `U/2` kept: the full equation.
    Full,
    /// The `U/2` term dropped.
    NoLinearTerm,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoLinearTerm => "no_linear_term",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    /// Twice the threshold derived from a calibrated contraction constant.
    Auto,
    /// A user weight; raised to the automatic value if smaller.
    Fixed(f64),
}

/// First Picard iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialGuess {
    /// `U(t) = K_0 u_0 (t)`.
    Propagated,
    /// `U(t) = 0`.
    Zero,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Integrability index: fields are measured in `L^{2p}`.
    pub p: f64,
    pub grid: GridSpec,
    pub t_final: f64,
    pub dt: f64,
    /// Increasing ball radii.
    pub n_schedule: Vec<f64>,
    pub lambda: LambdaChoice,
    pub picard_tol: f64,
    pub max_picard_iters: usize,
    pub dealias: bool,
    pub variant: Variant,
    pub initial_guess: InitialGuess,
    /// Seed for the random pairs used to calibrate the contraction constant.
    pub seed: u64,
}

impl SolverConfig {
    /// A configuration with the documented defaults for everything but the
    /// grid and the time stepping.
    pub fn new(p: f64, grid: GridSpec, t_final: f64, dt: f64) -> Result<Self> {
        let cfg = SolverConfig {
            p,
            grid,
            t_final,
            dt,
            n_schedule: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            lambda: LambdaChoice::Auto,
            picard_tol: 1e-10,
            max_picard_iters: 200,
            dealias: true,
            variant: Variant::Full,
            initial_guess: InitialGuess::Propagated,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_dimension(self.p, self.grid.dim())?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::validation(format!("T must be positive, got {}", self.t_final)));
        }
        if !(self.dt > 0.0 && self.dt < self.t_final) {
            return Err(Error::validation(format!(
                "dt must lie in (0, T), got dt = {} with T = {}",
                self.dt, self.t_final
            )));
        }
        let steps = self.t_final / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps {
            return Err(Error::validation(format!(
                "T / dt must be an integer, got {steps}"
            )));
        }
        if self.n_schedule.is_empty()
            || self.n_schedule.iter().any(|n| !(*n > 0.0 && n.is_finite()))
            || self.n_schedule.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(Error::validation(
                "N_schedule must be a nonempty, strictly increasing list of positive radii",
            ));
        }
        if let LambdaChoice::Fixed(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::validation(format!("lambda must be positive, got {l}")));
            }
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::validation("picard_tol must be positive"));
        }
        if self.max_picard_iters == 0 {
            return Err(Error::validation("max_picard_iters must be at least 1"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Uniform time grid `0, dt, ..., T`.
    pub fn times(&self) -> Vec<f64> {
        let m = self.steps();
        (0..=m)
            .map(|j| if j == m { self.t_final } else { j as f64 * self.dt })
            .collect()
    }
}

/// The well-posedness theory covers `d < 6p` only: beyond it the time
/// singularity `(t - s)^{-(2p+d)/(8p)}` of the Burgers convolution is not
/// integrable.
pub fn check_dimension(p: f64, d: usize) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::validation(format!("p must be at least 1, got {p}")));
    }
    if d as f64 >= 6.0 * p {
        return Err(Error::validation(format!(
            "dimension d = {d} violates d < 6p (p = {p}); the existence theory needs d < 6p, e.g. raise p above {}",
            d as f64 / 6.0
        )));
    }
    Ok(())
}

/// Fields at uniformly spaced times, with their `L^{2p}` norms.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    fields: Vec<Field>,
    norms: Vec<f64>,
    p: f64,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, fields: Vec<Field>, p: f64) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::validation("trajectory needs one field per time"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::validation("trajectory times must increase strictly"));
        }
        let grid = *fields[0].grid();
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch("trajectory fields on different grids".into()));
        }
        if !(p >= 1.0) {
            return Err(Error::validation(format!("p must be at least 1, got {p}")));
        }
        let norms = fields
            .iter()
            .map(|f| lp_norm_unchecked(f.grid(), f.values(), 2.0 * p))
            .collect();
        Ok(Trajectory {
            times,
            fields,
            norms,
            p,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    /// `|U(t_k)|_{2p}` per time.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn grid(&self) -> &GridSpec {
        self.fields[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &Field {
        self.fields.last().unwrap()
    }

    /// Index of the sample at time `t`, if `t` is on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * self.times.last().unwrap().max(1.0);
        self.times.iter().position(|s| (s - t).abs() <= tol)
    }

    /// The first `len` samples.
    pub fn truncated(&self, len: usize) -> Trajectory {
        Trajectory {
            times: self.times[..len].to_vec(),
            fields: self.fields[..len].to_vec(),
            norms: self.norms[..len].to_vec(),
            p: self.p,
        }
    }

    /// `self - other`, sample by sample.
    pub fn difference(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.times.len() != other.times.len() {
            return Err(Error::validation("trajectories have different lengths"));
        }
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| a.difference(b))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.times.clone(), fields, self.p)
    }

    /// `max_t |self(t) - other(t)|_{2p}` over the first `len` samples.
    pub fn sup_distance(&self, other: &Trajectory, len: usize) -> Result<f64> {
        let diff = self.truncated(len).difference(&other.truncated(len))?;
        Ok(diff.norms.iter().copied().fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let g = GridSpec::new(1, 16, 10.0).unwrap();
        let cfg = SolverConfig::new(1.0, g, 0.25, 1e-3).unwrap();
        assert_eq!(cfg.steps(), 250);
        assert_eq!(*cfg.times().last().unwrap(), 0.25);
        assert!(SolverConfig::new(1.0, g, 0.25, 0.3).is_err());
        assert!(SolverConfig::new(1.0, g, 0.25, 0.07).is_err());
        assert!(SolverConfig::new(0.5, g, 0.25, 1e-3).is_err());
        let mut bad = cfg.clone();
        bad.n_schedule = vec![2.0, 2.0];
        assert!(bad.validate().is_err());
        assert!(check_dimension(1.0, 6).unwrap_err().is_validation());
        assert!(check_dimension(1.0, 5).is_ok());
        assert!(check_dimension(2.0, 5).is_ok());
    }
}
