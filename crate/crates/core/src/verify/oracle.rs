//! Reference integrators that share no code path with the fixed-point
//! solver beyond the grid and transforms: a second-order exponential
//! Runge–Kutta method (Cox–Matthews ETD2RK) for the Burgers form of the
//! equation and for its eikonal form.

use num_complex::Complex64;

use crate::conv::{etd_panel_weights, phi1};
use crate::error::{Error, Result};
use crate::grid::{forward_transform, inverse_transform, Field, GridSpec, SpectralField};
use crate::kernel::decay_rate;
use crate::solver::{SolverConfig, Trajectory, Variant};

/// Norm above which a state is declared blown up.
const BLOW_UP: f64 = 1e150;

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Oracle steps per solver step.
    pub substeps: usize,
    /// Drop the quadratic term (leaves the exact linear evolution).
    pub linear_only: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            substeps: 8,
            linear_only: false,
        }
    }
}

/// What is squared and how its derivative enters.
#[derive(Clone, Copy)]
enum Nonlinearity {
    /// `-(1/2) sum_l d_l (U^2)`.
    Burgers,
    /// `-(1/2) (d_x U)^2`, for `d = 1`.
    Eikonal,
}

struct Stepper {
    grid: GridSpec,
    damping: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
    dt: f64,
    gradient: Vec<Complex64>,
    mask: Option<Vec<f64>>,
    kind: Nonlinearity,
    active: bool,
}

impl Stepper {
    fn new(cfg: &SolverConfig, dt: f64, kind: Nonlinearity, active: bool) -> Self {
        let grid = cfg.grid;
        let growth = match cfg.variant {
            Variant::Full => 0.5,
            Variant::NoLinearTerm => 0.0,
        };
        // Linear part L = growth - a(xi); the tables use z = -L dt.
        let z: Vec<f64> = grid
            .squared_wavenumbers()
            .into_iter()
            .map(|k2| (decay_rate(k2) - growth) * dt)
            .collect();
        let mut gradient = vec![Complex64::default(); grid.len()];
        for axis in 0..grid.dim() {
            for (g, k) in gradient.iter_mut().zip(grid.derivative_wavenumbers(axis)) {
                *g += Complex64::new(0.0, k);
            }
        }
        Stepper {
            grid,
            damping: z.iter().map(|z| (-z).exp()).collect(),
            phi1: z.iter().map(|&z| phi1(z)).collect(),
            phi2: z.iter().map(|&z| etd_panel_weights(z).1).collect(),
            dt,
            gradient,
            mask: cfg.dealias.then(|| {
                grid.dealias_mask()
                    .into_iter()
                    .map(|k| if k { 1.0 } else { 0.0 })
                    .collect()
            }),
            kind,
            active,
        }
    }

    fn nonlinear(&self, u: &[Complex64]) -> Vec<Complex64> {
        if !self.active {
            return vec![Complex64::default(); u.len()];
        }
        let spec = SpectralField::new(self.grid, u.to_vec()).expect("grid length");
        let base = match self.kind {
            Nonlinearity::Burgers => spec,
            Nonlinearity::Eikonal => {
                let g: Vec<Complex64> = u.iter().zip(&self.gradient).map(|(c, k)| c * k).collect();
                SpectralField::new(self.grid, g).expect("grid length")
            }
        };
        let base = match &self.mask {
            Some(m) => base.multiply(m),
            None => base,
        };
        let real = inverse_transform(&base);
        let sq: Vec<f64> = real.values().iter().map(|x| x * x).collect();
        let mut sq_hat = forward_transform(&Field::from_raw(self.grid, sq));
        if let Some(m) = &self.mask {
            sq_hat = sq_hat.multiply(m);
        }
        sq_hat
            .coeffs()
            .iter()
            .zip(&self.gradient)
            .map(|(s, k)| match self.kind {
                Nonlinearity::Burgers => -0.5 * k * s,
                Nonlinearity::Eikonal => -0.5 * s,
            })
            .collect()
    }

    fn step(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n0 = self.nonlinear(u);
        let a: Vec<Complex64> = (0..u.len())
            .map(|m| u[m] * self.damping[m] + n0[m] * (self.dt * self.phi1[m]))
            .collect();
        if !self.active {
            return a;
        }
        let na = self.nonlinear(&a);
        (0..u.len())
            .map(|m| a[m] + (na[m] - n0[m]) * (self.dt * self.phi2[m]))
            .collect()
    }
}

fn integrate(cfg: &SolverConfig, u0: &Field, kind: Nonlinearity, opts: OracleOptions) -> Result<Trajectory> {
    cfg.validate()?;
    if *u0.grid() != cfg.grid {
        return Err(Error::GridMismatch("initial data is not on the solver grid".into()));
    }
    if opts.substeps == 0 {
        return Err(Error::validation("oracle needs at least one substep"));
    }
    let stepper = Stepper::new(cfg, cfg.dt / opts.substeps as f64, kind, !opts.linear_only);
    let times = cfg.times();
    let mut fields = vec![u0.clone()];
    let mut state = forward_transform(u0).into_coeffs();
    for j in 1..times.len() {
        for _ in 0..opts.substeps {
            state = stepper.step(&state);
        }
        let f = inverse_transform(&SpectralField::new(cfg.grid, state.clone())?);
        let max = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(max.is_finite() && max < BLOW_UP) {
            return Err(Error::BlowUp {
                time: times[j],
                last_valid: times[j - 1],
            });
        }
        fields.push(f);
    }
    Trajectory::new(times, fields, cfg.p)
}

/// Reference solution of the Burgers form without any ball projection, at
/// `dt / 8` internally and sampled on the solver's time grid.
pub fn direct_integrator(cfg: &SolverConfig, u0: &Field) -> Result<Trajectory> {
    integrate(cfg, u0, Nonlinearity::Burgers, OracleOptions::default())
}

pub fn direct_integrator_with(cfg: &SolverConfig, u0: &Field, opts: OracleOptions) -> Result<Trajectory> {
    integrate(cfg, u0, Nonlinearity::Burgers, opts)
}

/// The eikonal equation `U_t = -(1/8)(U'''' + 4 U'') - (1/2)(U')^2` in one
/// dimension, by the same scheme.
pub fn eikonal_integrator(cfg: &SolverConfig, u0: &Field, opts: OracleOptions) -> Result<Trajectory> {
    if cfg.grid.dim() != 1 {
        return Err(Error::validation("the eikonal integrator is one-dimensional"));
    }
    integrate(cfg, u0, Nonlinearity::Eikonal, opts)
}

/// Spectral derivative along axis 0.
pub fn spectral_derivative(f: &Field) -> Field {
    let k = f.grid().derivative_wavenumbers(0);
    let spec = forward_transform(f);
    let coeffs = spec
        .coeffs()
        .iter()
        .zip(k)
        .map(|(c, k)| c * Complex64::new(0.0, k))
        .collect();
    inverse_transform(&SpectralField::new(*f.grid(), coeffs).expect("grid length"))
}

/// Relative `L^2` distance `|a - b|_2 / |b|_2`.
pub fn relative_l2(a: &Field, b: &Field) -> Result<f64> {
    let diff = a.difference(b)?.lp_norm(2.0)?;
    let scale = b.lp_norm(2.0)?;
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_stays_zero() {
        let g = GridSpec::new(1, 32, 20.0).unwrap();
        let cfg = SolverConfig::new(1.0, g, 0.1, 1e-2).unwrap();
        let traj = direct_integrator(&cfg, &Field::zeros(g)).unwrap();
        assert!(traj.norms().iter().all(|&n| n == 0.0));
    }

    #[test]
    fn linear_modes_evolve_exactly() {
        let g = GridSpec::new(1, 32, 20.0).unwrap();
        let cfg = SolverConfig::new(1.0, g, 0.5, 1e-2).unwrap();
        let k = 3.0 * g.wavenumber_step();
        let u0 = Field::from_fn(g, |x| (k * x[0]).cos()).unwrap();
        let opts = OracleOptions {
            substeps: 3,
            linear_only: true,
        };
        let traj = direct_integrator_with(&cfg, &u0, opts).unwrap();
        let rate = 0.5 - decay_rate(k * k);
        for (t, f) in traj.times().iter().zip(traj.fields()) {
            let expect = u0.scaled((rate * t).exp());
            let err = f.difference(&expect).unwrap().lp_norm(2.0).unwrap();
            assert!(err < 1e-10 * expect.lp_norm(2.0).unwrap());
        }
    }

    #[test]
    fn constant_eikonal_data_has_no_gradient() {
        let g = GridSpec::new(1, 32, 20.0).unwrap();
        let cfg = SolverConfig::new(1.0, g, 0.1, 1e-2).unwrap();
        let u0 = Field::new(g, vec![0.7; 32]).unwrap();
        let traj = eikonal_integrator(&cfg, &u0, OracleOptions::default()).unwrap();
        let last = spectral_derivative(traj.last());
        assert!(last.values().iter().all(|v| v.abs() < 1e-14));
        assert!(traj.last().values().iter().all(|v| (v - 0.7).abs() < 1e-12));
    }
}
