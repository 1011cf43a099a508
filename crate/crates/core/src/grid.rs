//! Periodic `d`-dimensional grids, sampled fields, their discrete Fourier
//! twins, and Riemann-sum `L^p` norms.
//!
//! The torus `[0, L)^d` with `n` points per axis stands in for `R^d`.
//! Samples are stored row-major with axis 0 varying slowest, and spectral
//! coefficients use the same layout in FFT order: storage index `j` on an
//! axis holds the integer wavenumber `j` for `j < n/2` and `j - n` otherwise,
//! so the physical wavenumber is `(2 pi / L) * k`.
//!
//! Transform normalization: `forward` produces the coefficients `c_k` of
//! the trigonometric interpolant `f(x) = sum_k c_k exp(i <xi_k, x>)`, i.e.
//! `c_k = n^{-d} sum_j f_j exp(-i <xi_k, x_j>)`. With this choice Parseval
//! reads `|f|_2^2 = L^d * sum_k |c_k|^2`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

pub const MAX_DIM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    length: f64,
}

impl GridSpec {
    /// Builds a grid with `n` points on each of `dim` axes of edge `length`.
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::validation(format!(
                "dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::validation(format!(
                "points per axis must be even and at least 4, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::validation(format!(
                "box length must be positive and finite, got {length}"
            )));
        }
        Ok(GridSpec { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of samples, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Box volume `L^d`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Lattice spacing `2 pi / L` of the wavenumbers.
    pub fn wavenumber_step(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Integer wavenumber held at storage index `j` of one axis.
    pub fn lattice_index(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Integer wavenumbers of one axis, ascending: `-n/2, ..., n/2 - 1`.
    pub fn wavenumber_components(&self) -> Vec<i64> {
        let half = (self.n / 2) as i64;
        (-half..half).collect()
    }

    /// Physical wavenumbers of one axis in storage order.
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        let step = self.wavenumber_step();
        (0..self.n)
            .map(|j| step * self.lattice_index(j) as f64)
            .collect()
    }

    /// Splits a flat index into per-axis indices (axis 0 first).
    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for axis in (0..self.dim).rev() {
            out[axis] = flat % self.n;
            flat /= self.n;
        }
    }

    /// `|xi|^2` for every mode, in storage order.
    pub fn squared_wavenumbers(&self) -> Vec<f64> {
        let k = self.axis_wavenumbers();
        let mut idx = vec![0; self.dim];
        (0..self.len())
            .map(|flat| {
                self.unflatten(flat, &mut idx);
                idx.iter().map(|&j| k[j] * k[j]).sum()
            })
            .collect()
    }

    /// `xi_axis` for every mode, with the Nyquist entry zeroed so that odd
    /// derivatives map real fields to real fields.
    pub fn derivative_wavenumbers(&self, axis: usize) -> Vec<f64> {
        assert!(axis < self.dim, "axis {axis} out of range");
        let k = self.axis_wavenumbers();
        let nyquist = self.n / 2;
        let mut idx = vec![0; self.dim];
        (0..self.len())
            .map(|flat| {
                self.unflatten(flat, &mut idx);
                let j = idx[axis];
                if j == nyquist {
                    0.0
                } else {
                    k[j]
                }
            })
            .collect()
    }

    /// Two-thirds rule: `true` for modes kept when forming quadratic products.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let mut idx = vec![0; self.dim];
        (0..self.len())
            .map(|flat| {
                self.unflatten(flat, &mut idx);
                idx.iter()
                    .all(|&j| 3 * (self.lattice_index(j).unsigned_abs() as usize) < self.n)
            })
            .collect()
    }

    /// Physical coordinates of a flat sample index.
    pub fn point(&self, flat: usize, out: &mut [f64]) {
        let mut idx = vec![0; self.dim];
        self.unflatten(flat, &mut idx);
        let h = self.spacing();
        for (o, j) in out.iter_mut().zip(idx) {
            *o = j as f64 * h;
        }
    }

    fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Real samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!("non-finite sample at index {i}")));
        }
        Ok(Field { grid, values })
    }

    /// Skips the finiteness scan; callers guarantee the invariants.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.point(i, &mut x);
                f(&x)
            })
            .collect();
        Field::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Spatial mean over the box.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn scaled(&self, factor: f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    /// `self - other`.
    pub fn difference(&self, other: &Field) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(Field::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &Field) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(Field::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + factor * b)
                .collect(),
        ))
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }
}

/// Fourier coefficients of a field, in storage (FFT) order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Largest violation of `c(-k) = conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let mut idx = vec![0; g.dim()];
        let mut worst = 0.0f64;
        for flat in 0..g.len() {
            g.unflatten(flat, &mut idx);
            let mirror = idx
                .iter()
                .fold(0, |acc, &j| acc * n + (n - j) % n);
            let d = (self.coeffs[flat] - self.coeffs[mirror].conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// Mode-wise product with a real multiplier.
    pub fn multiply(&self, symbol: &[f64]) -> SpectralField {
        debug_assert_eq!(symbol.len(), self.coeffs.len());
        SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(symbol)
                .map(|(c, s)| c * s)
                .collect(),
        }
    }
}

/// Discrete Fourier coefficients of `f`.
pub fn forward_transform(f: &Field) -> SpectralField {
    let g = *f.grid();
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::transform(&mut data, g.n(), g.dim(), false);
    let scale = 1.0 / g.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    SpectralField {
        grid: g,
        coeffs: data,
    }
}

/// Real part of the trigonometric sum with coefficients `spec`.
///
/// For coefficient sets without Hermitian symmetry the imaginary part of the
/// synthesis is discarded.
pub fn inverse_transform(spec: &SpectralField) -> Field {
    let g = spec.grid;
    let mut data = spec.coeffs.clone();
    fft::transform(&mut data, g.n(), g.dim(), true);
    Field::from_raw(g, data.into_iter().map(|c| c.re).collect())
}

/// Checked variant of [`inverse_transform`] that rejects a foreign grid.
pub fn inverse_transform_on(grid: &GridSpec, spec: &SpectralField) -> Result<Field> {
    grid.check_same(&spec.grid)?;
    Ok(inverse_transform(spec))
}

/// Riemann-sum `L^p` norm `(sum |f_i|^p * cell_volume)^(1/p)`.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::validation(format!("L^p norm needs p >= 1, got {p}")));
    }
    Ok(lp_norm_unchecked(f.grid(), f.values(), p))
}

pub(crate) fn lp_norm_unchecked(grid: &GridSpec, values: &[f64], p: f64) -> f64 {
    let sum = lp_power_sum(values, p);
    (sum * grid.cell_volume()).powf(1.0 / p)
}

/// `sum |v|^p`, using integer powers when `p` is integral.
pub(crate) fn lp_power_sum(values: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else if p.fract() == 0.0 && p <= 64.0 {
        let e = p as i32;
        values.iter().map(|v| v.abs().powi(e)).sum()
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: GridSpec, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        Field::new(grid, values).unwrap()
    }

    #[test]
    fn make_grid_examples() {
        let g = GridSpec::new(1, 8, 2.0 * PI).unwrap();
        assert_eq!(g.wavenumber_components(), vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        let k = g.axis_wavenumbers();
        assert!((k[1] - 1.0).abs() < 1e-15 && (k[4] + 4.0).abs() < 1e-15);

        let g = GridSpec::new(2, 4, PI).unwrap();
        let mut k = g.axis_wavenumbers();
        k.sort_by(f64::total_cmp);
        for (a, b) in k.iter().zip([-4.0, -2.0, 0.0, 2.0]) {
            assert!((a - b).abs() < 1e-14);
        }

        assert!(matches!(GridSpec::new(1, 7, 1.0), Err(Error::Validation(_))));
        assert!(GridSpec::new(1, 2, 1.0).is_err());
        assert!(GridSpec::new(0, 8, 1.0).is_err());
        assert!(GridSpec::new(6, 8, 1.0).is_err());
        assert!(GridSpec::new(1, 8, 0.0).is_err());
        assert!(GridSpec::new(1, 8, -1.0).is_err());
    }

    #[test]
    fn constant_field_has_only_dc() {
        let g = GridSpec::new(2, 8, 3.0).unwrap();
        let f = Field::new(g, vec![2.5; g.len()]).unwrap();
        let s = forward_transform(&f);
        assert!((s.coeffs()[0] - Complex64::new(2.5, 0.0)).norm() < 1e-14);
        assert!(s.coeffs()[1..].iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn cosine_has_two_harmonics() {
        let g = GridSpec::new(1, 16, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, |x| x[0].cos()).unwrap();
        let s = forward_transform(&f);
        let nonzero: Vec<usize> = (0..g.len()).filter(|&j| s.coeffs()[j].norm() > 1e-12).collect();
        assert_eq!(nonzero, vec![1, 15]);
        assert!((s.coeffs()[1].re - 0.5).abs() < 1e-14);
        assert!((s.coeffs()[15].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn roundtrip_random_fields() {
        for (dim, n) in [(1, 64), (2, 16), (3, 8)] {
            let g = GridSpec::new(dim, n, 5.0).unwrap();
            let f = random_field(g, dim as u64);
            let back = inverse_transform(&forward_transform(&f));
            let scale = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = f
                .values()
                .iter()
                .zip(back.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err / scale < 1e-12, "d={dim}: {err}");
            assert!(forward_transform(&f).hermitian_defect() < 1e-14);
        }
    }

    #[test]
    fn parseval_relation() {
        for (dim, n) in [(1, 32), (2, 8), (3, 8)] {
            let g = GridSpec::new(dim, n, 1.7).unwrap();
            let f = random_field(g, 11 + dim as u64);
            let s = forward_transform(&f);
            let lhs = lp_norm(&f, 2.0).unwrap().powi(2);
            let rhs = g.volume() * s.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
            assert!((lhs - rhs).abs() / lhs < 1e-12);
        }
    }

    #[test]
    fn lp_norm_examples() {
        let g = GridSpec::new(1, 64, 2.0 * PI).unwrap();
        assert_eq!(lp_norm(&Field::zeros(g), 3.0).unwrap(), 0.0);
        let ones = Field::new(g, vec![1.0; 64]).unwrap();
        assert!((lp_norm(&ones, 2.0).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-12);
        let sine = Field::from_fn(g, |x| x[0].sin()).unwrap();
        assert!((lp_norm(&sine, 2.0).unwrap() - PI.sqrt()).abs() < 1e-10);
        assert!(lp_norm(&sine, 0.5).is_err());
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = GridSpec::new(1, 8, 1.0).unwrap();
        let b = GridSpec::new(1, 8, 2.0).unwrap();
        let spec = forward_transform(&Field::zeros(b));
        assert!(matches!(
            inverse_transform_on(&a, &spec),
            Err(Error::GridMismatch(_))
        ));
        assert!(Field::zeros(a).difference(&Field::zeros(b)).is_err());
    }

    #[test]
    fn dealias_mask_keeps_lower_two_thirds() {
        let g = GridSpec::new(1, 12, 1.0).unwrap();
        let kept: Vec<i64> = g
            .dealias_mask()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(j, _)| g.lattice_index(j))
            .collect();
        assert_eq!(kept, vec![0, 1, 2, 3, -3, -2, -1]);
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = GridSpec::new(1, 4, 1.0).unwrap();
        assert!(Field::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(Field::new(g, vec![0.0; 3]).is_err());
    }
}
