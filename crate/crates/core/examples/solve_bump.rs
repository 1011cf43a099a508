//! Solves from a Gaussian bump and compares with the direct integrator.

use ksburgers::init::gaussian_bump;
use ksburgers::solver::{solve_local, SolverConfig};
use ksburgers::verify::{direct_integrator, oracle::relative_l2};
use ksburgers::GridSpec;

fn main() -> ksburgers::Result<()> {
    let grid = GridSpec::new(1, 256, 50.0)?;
    let cfg = SolverConfig::new(1.0, grid, 0.5, 1e-3)?;
    let u0 = gaussian_bump(&grid, 1.0, cfg.p)?;

    let sol = solve_local(&cfg, &u0)?;
    let traj = &sol.trajectory;
    for k in (0..traj.len()).step_by(100) {
        println!("t = {:.3}  |U|_2 = {:.6}  mean = {:.12}", traj.times()[k], traj.norms()[k], traj.fields()[k].mean());
    }
    for (n, tau) in &sol.exit_times {
        println!("N = {n:<4} tau_N = {tau}");
    }

    let reference = direct_integrator(&cfg, &u0)?;
    let err = relative_l2(traj.last(), reference.last())?;
    println!("relative L2 distance to the direct integrator at T: {err:.3e}");
    Ok(())
}
