//! Picard iteration inside one ball: the weight lambda, the calibrated
//! contraction constant and the geometric decay of successive differences.

use ksburgers::init::gaussian_bump;
use ksburgers::solver::{lambda_threshold, solve_ball, SolverConfig};
use ksburgers::verify::check_contraction;
use ksburgers::GridSpec;

fn main() -> ksburgers::Result<()> {
    let grid = GridSpec::new(1, 128, 50.0)?;
    let mut cfg = SolverConfig::new(1.0, grid, 0.25, 1e-3)?;
    let u0 = gaussian_bump(&grid, 1.0, cfg.p)?;

    let run = solve_ball(&cfg, &u0, 2.0)?;
    println!("C = {:.3e}, lambda = {:.4}", run.contraction_constant, run.lambda);
    for (k, (d, r)) in run.differences.iter().zip(std::iter::once(&f64::NAN).chain(&run.ratios)).enumerate() {
        println!("iteration {k:>2}: difference {d:.3e}  ratio {r:.3}");
    }
    println!("threshold for C = 1: {:.4}", lambda_threshold(1.0, 1.0, 1)?);

    cfg.n_schedule = vec![1.0];
    let report = check_contraction(&cfg, 20, 7)?;
    println!(
        "20 random pairs at lambda = {:.3}: max ratio {:.3e}, decreasing in lambda: {}",
        report.lambda, report.max_ratio, report.monotone
    );
    Ok(())
}
