//! Power laws in time of kernel norms: the four L^1 laws in one dimension
//! and the L^q law of the spatial derivative.

use ksburgers::kernel::KernelKind;
use ksburgers::verify::{default_l1_grid, fit_l1_scaling, fit_lq_scaling, LQ_CASES, LQ_WINDOW};

fn main() -> ksburgers::Result<()> {
    let grid = default_l1_grid();
    for kind in KernelKind::ALL {
        let r = fit_l1_scaling(kind, (1e-3, 1e-1), &grid)?;
        println!(
            "{:<16} slope {:>8.4} (expected {:>6.3}, residual {:.1e})",
            r.name, r.fitted_exponent, r.expected_exponent, r.regression_residual
        );
    }
    for (p, d) in LQ_CASES {
        let r = fit_lq_scaling(p, d, LQ_WINDOW)?;
        println!("{:<16} slope {:>8.4} (expected {:>6.3})", r.name, r.fitted_exponent, r.expected_exponent);
    }
    Ok(())
}
