//! In one dimension the derivative of the eikonal solution solves the
//! Burgers form.

use ksburgers::init::gaussian_bump;
use ksburgers::solver::SolverConfig;
use ksburgers::verify::eikonal_crosscheck;
use ksburgers::GridSpec;

fn main() -> ksburgers::Result<()> {
    let grid = GridSpec::new(1, 256, 50.0)?;
    let cfg = SolverConfig::new(1.0, grid, 0.25, 1e-3)?;
    for scale in [0.5, 1.0, 2.0] {
        let r = eikonal_crosscheck(&gaussian_bump(&grid, scale, 1.0)?, &cfg)?;
        println!("|u0~|_2 = {scale}: relative L2 mismatch at T = {} is {:.3e}", r.t_final, r.relative_l2);
    }
    Ok(())
}
