//! Initial data used by the CLI, the examples and the verification checks.

use crate::error::{Error, Result};
use crate::grid::{lp_norm_unchecked, Field, GridSpec};

/// Unit-width Gaussian centered in the box, scaled so `|u0|_{2p} = norm`.
pub fn gaussian_bump(grid: &GridSpec, norm: f64, p: f64) -> Result<Field> {
    let c = grid.length() / 2.0;
    let f = Field::from_fn(*grid, |x| {
        (-x.iter().map(|xi| (xi - c).powi(2)).sum::<f64>() / 2.0).exp()
    })?;
    normalized(f, norm, p)
}

/// `cos(k x_0)` with `k` the lattice wavenumber closest to the neutral
/// radius `sqrt 2`, scaled so `|u0|_{2p} = norm`.
pub fn single_mode(grid: &GridSpec, norm: f64, p: f64) -> Result<Field> {
    let step = grid.wavenumber_step();
    let k = (2f64.sqrt() / step).round().max(1.0) * step;
    let f = Field::from_fn(*grid, |x| (k * x[0]).cos())?;
    normalized(f, norm, p)
}

fn normalized(f: Field, norm: f64, p: f64) -> Result<Field> {
    if !(norm >= 0.0 && norm.is_finite()) {
        return Err(Error::validation(format!("u0_scale must be finite and nonnegative, got {norm}")));
    }
    let current = lp_norm_unchecked(f.grid(), f.values(), 2.0 * p);
    Ok(f.scaled(norm / current))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prescribed_norms() {
        let g = GridSpec::new(1, 128, 50.0).unwrap();
        for p in [1.0, 2.0] {
            let b = gaussian_bump(&g, 1.5, p).unwrap();
            assert!((b.lp_norm(2.0 * p).unwrap() - 1.5).abs() < 1e-12);
            let m = single_mode(&g, 0.5, p).unwrap();
            assert!((m.lp_norm(2.0 * p).unwrap() - 0.5).abs() < 1e-12);
        }
        assert!(gaussian_bump(&g, -1.0, 1.0).is_err());
    }
}
