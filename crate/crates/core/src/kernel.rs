//! The L-KS kernel, its Brownian-time twin, and the envelope integrals that
//! dominate both.
//!
//! With the unitary Fourier transform the L-KS kernel has symbol
//! `(2 pi)^{-d/2} exp(-t a(xi))`, `a(xi) = (|xi|^2 - 2)^2 / 8`. It is the
//! fundamental solution of `u_t = -(1/8)(Delta + 2)^2 u`, so it carries mass
//! `exp(-t/2)` and, unlike a heat kernel, changes sign.

use std::f64::consts::PI;

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{inverse_transform, Field, GridSpec, SpectralField};
use crate::quadrature::Integrator;

use num_complex::Complex64;

/// The kernel itself or one of the derivatives the estimates are stated for.
/// Spatial derivatives act along axis 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Kernel,
    TimeDeriv,
    SpaceDeriv,
    Mixed,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Kernel,
        KernelKind::TimeDeriv,
        KernelKind::SpaceDeriv,
        KernelKind::Mixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Kernel => "kernel",
            KernelKind::TimeDeriv => "time_deriv",
            KernelKind::SpaceDeriv => "space_deriv",
            KernelKind::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown kernel kind '{s}'")))
    }

    fn has_space_derivative(self) -> bool {
        matches!(self, KernelKind::SpaceDeriv | KernelKind::Mixed)
    }

    fn has_time_derivative(self) -> bool {
        matches!(self, KernelKind::TimeDeriv | KernelKind::Mixed)
    }
}

/// `a = (|xi|^2 - 2)^2 / 8` as a function of `|xi|^2`.
#[inline]
pub fn decay_rate(xi_sq: f64) -> f64 {
    let s = xi_sq - 2.0;
    0.125 * s * s
}

/// `(2 pi)^{-d/2} exp(-t a(xi))` with `d = xi.len()`.
pub fn lks_symbol(t: f64, xi: &[f64]) -> f64 {
    debug_assert!(t >= 0.0);
    let xi_sq: f64 = xi.iter().map(|x| x * x).sum();
    (2.0 * PI).powf(-(xi.len() as f64) / 2.0) * (-t * decay_rate(xi_sq)).exp()
}

/// Radius beyond which `exp(-t a) < 1e-18`.
pub fn frequency_cutoff(t: f64) -> f64 {
    let a_max = (1e18f64).ln() / t;
    (2.0 + (8.0 * a_max).sqrt()).sqrt()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

// j1(x) / x for the spherical Bessel function j1.
fn j1_over_x(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0
    } else {
        (x.sin() - x * x.cos()) / (x * x * x)
    }
}

/// Real-space L-KS kernel at separation `r`, by radial quadrature of its
/// Fourier form.
///
/// Dimensions 1, 3 and 5 are supported off the lattice (the angular
/// integral is elementary there); other dimensions go through
/// [`kernel_on_grid`]. Spatial derivatives are only available for `d = 1`,
/// where `r` is read as the signed coordinate `x`.
pub fn lks_kernel_real(t: f64, r: f64, d: usize) -> Result<f64> {
    lks_kernel_real_kind(KernelKind::Kernel, t, r, d, &Integrator::default())
}

pub fn lks_kernel_real_kind(
    kind: KernelKind,
    t: f64,
    r: f64,
    d: usize,
    quad: &Integrator,
) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::validation(format!("kernel time must be positive, got {t}")));
    }
    if !r.is_finite() || (d > 1 && r < 0.0) {
        return Err(Error::validation(format!("invalid separation {r}")));
    }
    if !matches!(d, 1 | 3 | 5) {
        return Err(Error::validation(format!(
            "off-lattice kernel evaluation supports d in {{1, 3, 5}}, got {d}; use kernel_on_grid"
        )));
    }
    if d > 1 && kind.has_space_derivative() {
        return Err(Error::validation(
            "off-lattice spatial derivatives are only available for d = 1",
        ));
    }
    let rho_max = frequency_cutoff(t);
    let time_factor = |a: f64| if kind.has_time_derivative() { -a } else { 1.0 };
    let integrand = |rho: f64| {
        let a = decay_rate(rho * rho);
        let m = (-t * a).exp() * time_factor(a);
        let x = rho * r;
        match d {
            1 if kind.has_space_derivative() => -rho * m * x.sin(),
            1 => m * x.cos(),
            3 => rho * rho * m * sinc(x),
            _ => rho.powi(4) * m * j1_over_x(x),
        }
    };
    let prefactor = match d {
        1 => 1.0 / PI,
        3 => 1.0 / (2.0 * PI * PI),
        _ => 1.0 / (4.0 * PI * PI * PI),
    };
    let points = oscillation_breakpoints(rho_max, r.abs());
    Ok(prefactor * quad.integrate(integrand, &points)?.value)
}

// Uniform panels on [0, rho_max] no wider than half a period of cos(rho r).
fn oscillation_breakpoints(rho_max: f64, r: f64) -> Vec<f64> {
    let mut step = rho_max / 16.0;
    if r > 0.0 {
        step = step.min(PI / r);
    }
    let count = ((rho_max / step).ceil() as usize).clamp(1, 4096);
    (0..=count)
        .map(|i| rho_max * i as f64 / count as f64)
        .collect()
}

/// Integral of the kernel over `R^d`, by radial quadrature of
/// [`lks_kernel_real`]. The exact value is `exp(-t/2)`.
pub fn lks_kernel_mass(t: f64, d: usize) -> Result<f64> {
    let quad = Integrator::default();
    let inner = Integrator::new(1e-13, 1e-12);
    let radius = 8.0 + 40.0 * t.powf(0.25);
    let panels = (radius / 1.5).ceil() as usize;
    let points: Vec<f64> = (0..=panels)
        .map(|i| radius * i as f64 / panels as f64)
        .collect();
    let shell = sphere_area(d);
    // A failed inner quadrature poisons the outer sum and is reported there.
    let est = quad.integrate(
        |r| {
            lks_kernel_real_kind(KernelKind::Kernel, t, r, d, &inner)
                .map_or(f64::NAN, |k| shell * r.powi(d as i32 - 1) * k)
        },
        &points,
    )?;
    Ok(est.value)
}

/// Surface area of the unit sphere in `R^d` (2 for `d = 1`).
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Density of Brownian motion run at an independent reflected-Brownian
/// clock: `2 int_0^inf (2 pi s)^{-d/2} e^{-r^2/2s} (2 pi t)^{-1/2} e^{-s^2/2t} ds`.
///
/// The density is infinite at `r = 0` when `d >= 2`.
pub fn btbm_kernel(t: f64, r: f64, d: usize) -> Result<f64> {
    btbm_kernel_with(t, r, d, &Integrator::new(1e-14, 1e-11))
}

pub fn btbm_kernel_with(t: f64, r: f64, d: usize, quad: &Integrator) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::validation(format!("kernel time must be positive, got {t}")));
    }
    if !(r >= 0.0 && r.is_finite()) || d == 0 {
        return Err(Error::validation(format!("invalid separation {r} or dimension {d}")));
    }
    if r == 0.0 && d >= 2 {
        return Ok(f64::INFINITY);
    }
    // With s = u^2 the clock density becomes smooth at the origin.
    let pre = 4.0 * (2.0 * PI).powf(-(d as f64) / 2.0) / (2.0 * PI * t).sqrt();
    let r2 = r * r;
    let f = |u: f64| {
        if u == 0.0 {
            return if d == 1 && r == 0.0 { 1.0 } else { 0.0 };
        }
        let u2 = u * u;
        u.powi(1 - d as i32) * (-r2 / (2.0 * u2) - u2 * u2 / (2.0 * t)).exp()
    };
    let u_max = (2.0 * t * 60.0).powf(0.25);
    let u_star = (r2 * t).powf(1.0 / 6.0);
    let mut points = vec![0.0];
    if r > 0.0 {
        let lo = (r / 12.0).min(u_max * 1e-3).min(u_star * 1e-2);
        let mut u = lo;
        while u < u_max {
            points.push(u);
            u *= 1.5;
        }
    } else {
        points.extend((1..16).map(|i| u_max * i as f64 / 16.0));
    }
    let hi = u_max.max(u_star * 4.0);
    if *points.last().unwrap() < hi {
        points.push(hi);
    }
    Ok(pre * quad.integrate(f, &points)?.value)
}

/// `int_{R^d} K^BTBM dx` by radial quadrature; exactly 1.
pub fn btbm_mass(t: f64, d: usize) -> Result<f64> {
    let quad = Integrator::new(1e-12, 1e-11);
    let radius = 14.0 * t.powf(0.25) * (1.0 + 0.5 * d as f64).sqrt();
    let points: Vec<f64> = (0..=64).map(|i| radius * i as f64 / 64.0).collect();
    let shell = sphere_area(d);
    Ok(quad
        .integrate(
            |r| {
                if r == 0.0 {
                    return 0.0;
                }
                shell * r.powi(d as i32 - 1) * btbm_kernel(t, r, d).unwrap_or(f64::NAN)
            },
            &points,
        )?
        .value)
}

/// Synthesizes a kernel (or derivative) on a periodic grid from its symbol,
/// centered at the origin. Works in any supported dimension.
pub fn kernel_on_grid(kind: KernelKind, t: f64, grid: &GridSpec) -> Result<Field> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::validation(format!("kernel time must be nonnegative, got {t}")));
    }
    let xi_sq = grid.squared_wavenumbers();
    let xi0 = grid.derivative_wavenumbers(0);
    let scale = 1.0 / grid.volume();
    let coeffs = xi_sq
        .iter()
        .zip(&xi0)
        .map(|(&k2, &k0)| {
            let a = decay_rate(k2);
            let mut m = Complex64::new(scale * (-t * a).exp(), 0.0);
            if kind.has_time_derivative() {
                m *= -a;
            }
            if kind.has_space_derivative() {
                m *= Complex64::new(0.0, k0);
            }
            m
        })
        .collect();
    Ok(inverse_transform(&SpectralField::new(*grid, coeffs)?))
}

/// Constants of one envelope integral
/// `C t^{-beta} int_0^inf s^{-alpha} e^{-c1 r^2/s} e^{-c2 s^2/t} ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    pub kind: KernelKind,
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
}

impl EnvelopeParams {
    pub fn new(kind: KernelKind, c: f64, c1: f64, c2: f64) -> Result<Self> {
        if [c, c1, c2].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::validation(format!(
                "envelope constants must be positive and finite, got ({c}, {c1}, {c2})"
            )));
        }
        Ok(EnvelopeParams { kind, c, c1, c2 })
    }

    /// `(alpha, beta)`: the power of `s` and of `t` in the envelope.
    pub fn exponents(&self, d: usize) -> (f64, f64) {
        let alpha = if self.kind.has_space_derivative() {
            (d as f64 + 1.0) / 2.0
        } else {
            d as f64 / 2.0
        };
        let beta = if self.kind.has_time_derivative() { 1.5 } else { 0.5 };
        (alpha, beta)
    }
}

/// Envelope value at `(t, r)` by quadrature in `log s`.
pub fn envelope_bound(params: &EnvelopeParams, t: f64, r: f64, d: usize) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) || !(r >= 0.0 && r.is_finite()) {
        return Err(Error::validation(format!("invalid envelope point t={t}, r={r}")));
    }
    if r == 0.0 {
        return Ok(envelope_at_origin(params, t, d));
    }
    let (alpha, beta) = params.exponents(d);
    let EnvelopeParams { c, c1, c2, .. } = *params;
    let r2 = r * r;
    let f = |v: f64| {
        let s = v.exp();
        (s.ln() * (1.0 - alpha) - c1 * r2 / s - c2 * s * s / t).exp()
    };
    let v_lo = (c1 * r2 / 200.0).ln();
    let v_hi = (200.0 * t / c2).sqrt().ln();
    let count = (((v_hi - v_lo) / 0.5).ceil() as usize).max(4);
    let points: Vec<f64> = (0..=count)
        .map(|i| v_lo + (v_hi - v_lo) * i as f64 / count as f64)
        .collect();
    let quad = Integrator::new(0.0, 1e-12);
    Ok(c * t.powf(-beta) * quad.integrate(f, &points)?.value)
}

/// Closed form at `r = 0`:
/// `int_0^inf s^{-alpha} e^{-c2 s^2/t} ds = (1/2) (t/c2)^{(1-alpha)/2} Gamma((1-alpha)/2)`
/// for `alpha < 1`; the integral diverges otherwise.
pub fn envelope_at_origin(params: &EnvelopeParams, t: f64, d: usize) -> f64 {
    let (alpha, beta) = params.exponents(d);
    if alpha >= 1.0 {
        return f64::INFINITY;
    }
    let h = (1.0 - alpha) / 2.0;
    params.c * t.powf(-beta) * 0.5 * (t / params.c2).powf(h) * gamma(h)
}

/// One `(t, r, |kernel value|)` sample used for calibrating and validating
/// envelope constants.
#[derive(Debug, Clone, Copy)]
pub struct KernelSample {
    pub t: f64,
    pub r: f64,
    pub value: f64,
}

/// Absolute L-KS kernel values on a product grid, in parallel.
pub fn lks_samples(kind: KernelKind, d: usize, ts: &[f64], rs: &[f64]) -> Result<Vec<KernelSample>> {
    let quad = Integrator::new(1e-15, 1e-11);
    let pairs: Vec<(f64, f64)> = ts
        .iter()
        .flat_map(|&t| rs.iter().map(move |&r| (t, r)))
        .collect();
    pairs
        .par_iter()
        .map(|&(t, r)| {
            let value = lks_kernel_real_kind(kind, t, r, d, &quad)?.abs();
            Ok(KernelSample { t, r, value })
        })
        .collect()
}

/// Largest `|K| / envelope` over the samples.
pub fn dominance_ratio(params: &EnvelopeParams, d: usize, samples: &[KernelSample]) -> Result<f64> {
    let unit = EnvelopeParams { c: 1.0, ..*params };
    let ratios: Result<Vec<f64>> = samples
        .par_iter()
        .map(|s| Ok(s.value / envelope_bound(&unit, s.t, s.r, d)?))
        .collect();
    Ok(ratios?.into_iter().fold(0.0, f64::max) / params.c)
}

/// Picks `(c1, c2)` from a candidate grid minimizing the constant `C` needed
/// for dominance on `samples`, then inflates `C` by `margin`.
pub fn calibrate_envelope(
    kind: KernelKind,
    d: usize,
    samples: &[KernelSample],
    margin: f64,
) -> Result<EnvelopeParams> {
    const CANDIDATES: [f64; 6] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.4];
    let mut best: Option<EnvelopeParams> = None;
    for &c1 in &CANDIDATES {
        for &c2 in &CANDIDATES {
            let trial = EnvelopeParams::new(kind, 1.0, c1, c2)?;
            let needed = dominance_ratio(&trial, d, samples)?;
            if needed.is_finite() && best.is_none_or(|b| needed < b.c) {
                best = Some(EnvelopeParams { c: needed, ..trial });
            }
        }
    }
    let best = best.ok_or_else(|| Error::validation("no envelope candidate dominates the samples"))?;
    EnvelopeParams::new(kind, best.c * margin, best.c1, best.c2)
}
