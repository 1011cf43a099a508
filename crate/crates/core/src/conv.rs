//! Convolution with the L-KS kernel as per-mode multipliers.
//!
//! `apply_k0` propagates initial data; `duhamel_k` and `duhamel_kdiv` are the
//! time convolutions `int_0^t K_{t-s} * h(s) ds` and
//! `sum_l int_0^t (d/dy_l K_{t-s}) * h(s) ds`. In Fourier space both reduce
//! to `int_0^t exp(-(t-s) a) h(s) ds` per mode (times `-i xi_l` for the
//! derivative). The source is reconstructed piecewise linearly between its
//! samples and each panel is integrated exactly against the exponential.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{forward_transform, inverse_transform, Field, GridSpec, SpectralField};
use crate::kernel::decay_rate;

/// Mode-count above which per-mode loops run on the rayon pool.
const PARALLEL_MODES: usize = 1 << 14;

/// `(1 - e^{-z}(1 + z)) / z^2` and `(z - 1 + e^{-z}) / z^2`: the weights of
/// the left and right panel endpoints in
/// `int_0^1 e^{-z(1-u)} ((1-u) h_0 + u h_1) du`. Valid for either sign of `z`.
pub fn etd_panel_weights(z: f64) -> (f64, f64) {
    if z.abs() < 0.5 {
        // Alternating series in z; 20 terms leave an error below 1e-19.
        let mut left = 0.0;
        let mut right = 0.0;
        let mut term = 0.5; // (-z)^{k-2} / k! at k = 2
        for k in 2..22 {
            left += (k as f64 - 1.0) * term;
            right += term;
            term *= -z / (k as f64 + 1.0);
        }
        (left, right)
    } else {
        let e = (-z).exp();
        ((1.0 - e * (1.0 + z)) / (z * z), (z - 1.0 + e) / (z * z))
    }
}

/// `(1 - e^{-z}) / z`, continuous through `z = 0`.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 - z / 2.0 + z * z / 6.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// Per-mode step factors for one panel of width `dt`:
/// `E = e^{-a dt}` and the endpoint weights scaled by `dt`.
#[derive(Debug, Clone)]
pub struct EtdTable {
    pub decay: Vec<f64>,
    pub damping: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl EtdTable {
    /// Table for per-mode rates `decay` (which may be negative).
    pub fn from_rates(decay: Vec<f64>, dt: f64) -> Self {
        let mut damping = Vec::with_capacity(decay.len());
        let mut left = Vec::with_capacity(decay.len());
        let mut right = Vec::with_capacity(decay.len());
        for &a in &decay {
            let (wl, wr) = etd_panel_weights(a * dt);
            damping.push((-a * dt).exp());
            left.push(wl * dt);
            right.push(wr * dt);
        }
        EtdTable {
            decay,
            damping,
            left,
            right,
        }
    }

    /// Table for the L-KS rates `a(xi)` on `grid`.
    pub fn lks(grid: &GridSpec, dt: f64) -> Self {
        Self::from_rates(grid.squared_wavenumbers().into_iter().map(decay_rate).collect(), dt)
    }
}

/// `-i sum_l xi_l` per mode (Nyquist entries zeroed).
pub fn divergence_symbol(grid: &GridSpec) -> Vec<Complex64> {
    let mut total = vec![0.0; grid.len()];
    for axis in 0..grid.dim() {
        for (t, k) in total.iter_mut().zip(grid.derivative_wavenumbers(axis)) {
            *t += k;
        }
    }
    total.into_iter().map(|k| Complex64::new(0.0, -k)).collect()
}

/// `e^{-t a}` applied mode by mode; the identity at `t = 0`.
pub fn apply_k0(z: &Field, t: f64) -> Field {
    assert!(t >= 0.0 && t.is_finite(), "propagation time must be nonnegative");
    if t == 0.0 {
        return z.clone();
    }
    inverse_transform(&propagate(&forward_transform(z), t))
}

/// Spectral form of [`apply_k0`].
pub fn propagate(spec: &SpectralField, t: f64) -> SpectralField {
    let symbol: Vec<f64> = spec
        .grid()
        .squared_wavenumbers()
        .into_iter()
        .map(|k2| (-t * decay_rate(k2)).exp())
        .collect();
    spec.multiply(&symbol)
}

/// Samples `h(s_0), ..., h(s_m)` of a source on one grid, `s_0 = 0`.
#[derive(Debug, Clone)]
pub struct SourceHistory {
    times: Vec<f64>,
    fields: Vec<SpectralField>,
}

impl SourceHistory {
    pub fn new(times: Vec<f64>, fields: Vec<SpectralField>) -> Result<Self> {
        if times.len() < 2 || times.len() != fields.len() {
            return Err(Error::validation(format!(
                "a source history needs at least two samples and one field per time ({} times, {} fields)",
                times.len(),
                fields.len()
            )));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::validation(
                "source times must start at 0 and increase strictly",
            ));
        }
        let grid = *fields[0].grid();
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch("source fields live on different grids".into()));
        }
        Ok(SourceHistory { times, fields })
    }

    pub fn from_fields(times: Vec<f64>, fields: &[Field]) -> Result<Self> {
        Self::new(times, fields.iter().map(forward_transform).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn grid(&self) -> &GridSpec {
        self.fields[0].grid()
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn check_end(&self, t: f64) -> Result<()> {
        let end = self.end();
        if (t - end).abs() > 1e-12 * end.max(1.0) {
            return Err(Error::validation(format!(
                "evaluation time {t} differs from the last source time {end}"
            )));
        }
        Ok(())
    }
}

/// `int_0^t e^{-(t-s) a} h(s) ds` per mode at every history time.
fn duhamel_spectral(h: &SourceHistory) -> Vec<Vec<Complex64>> {
    let decay: Vec<f64> = h.grid().squared_wavenumbers().into_iter().map(decay_rate).collect();
    let mut out = vec![vec![Complex64::default(); decay.len()]];
    for (j, w) in h.times.windows(2).enumerate() {
        let table = EtdTable::from_rates(decay.clone(), w[1] - w[0]);
        let next = etd_step(
            &table,
            &out[j],
            h.fields[j].coeffs(),
            h.fields[j + 1].coeffs(),
        );
        out.push(next);
    }
    out
}

/// One panel of the Duhamel recurrence
/// `I_{j+1} = E I_j + w_left h_j + w_right h_{j+1}`.
pub fn etd_step(
    table: &EtdTable,
    acc: &[Complex64],
    h0: &[Complex64],
    h1: &[Complex64],
) -> Vec<Complex64> {
    let mut next = vec![Complex64::default(); acc.len()];
    let body = |(m, out): (usize, &mut Complex64)| {
        *out = acc[m] * table.damping[m] + h0[m] * table.left[m] + h1[m] * table.right[m];
    };
    if acc.len() >= PARALLEL_MODES {
        next.par_iter_mut().enumerate().for_each(body);
    } else {
        next.iter_mut().enumerate().for_each(body);
    }
    next
}

fn to_field(grid: GridSpec, coeffs: Vec<Complex64>) -> Field {
    inverse_transform(&SpectralField::new(grid, coeffs).expect("length matches grid"))
}

fn apply_divergence(grid: &GridSpec, coeffs: &mut [Complex64]) {
    for (c, s) in coeffs.iter_mut().zip(divergence_symbol(grid)) {
        *c *= s;
    }
}

/// `int_0^t K_{t-s} * h(s) ds` with `t` the last history time.
pub fn duhamel_k(h: &SourceHistory, t: f64) -> Result<Field> {
    h.check_end(t)?;
    let last = duhamel_spectral(h).pop().unwrap();
    Ok(to_field(*h.grid(), last))
}

/// [`duhamel_k`] at every history time.
pub fn duhamel_k_series(h: &SourceHistory) -> Vec<Field> {
    let grid = *h.grid();
    duhamel_spectral(h)
        .into_iter()
        .map(|c| to_field(grid, c))
        .collect()
}

/// `sum_l int_0^t (d/dy_l K_{t-s}) * h(s) ds`, multiplier `-i xi_l`.
pub fn duhamel_kdiv(h: &SourceHistory, t: f64) -> Result<Field> {
    h.check_end(t)?;
    let mut last = duhamel_spectral(h).pop().unwrap();
    apply_divergence(h.grid(), &mut last);
    Ok(to_field(*h.grid(), last))
}

/// [`duhamel_kdiv`] at every history time.
pub fn duhamel_kdiv_series(h: &SourceHistory) -> Vec<Field> {
    let grid = *h.grid();
    duhamel_spectral(h)
        .into_iter()
        .map(|mut c| {
            apply_divergence(&grid, &mut c);
            to_field(grid, c)
        })
        .collect()
}
