//! A bump that leaves the first balls before T: exit times per radius and
//! the agreement of larger balls with smaller ones before each exit.

use ksburgers::solver::solve_local;
use ksburgers::verify::{glue_consistency, glue_problem};

fn main() -> ksburgers::Result<()> {
    let (cfg, u0) = glue_problem()?;
    let sol = solve_local(&cfg, &u0)?;
    for (n, tau) in &sol.exit_times {
        println!("N = {n:<5} tau_N = {tau}");
    }
    println!("tau_inf = {}, saturated: {}", sol.tau_inf, sol.saturated);
    for w in &sol.warnings {
        println!("warning: {w}");
    }
    let glue = glue_consistency(&cfg, &u0)?;
    for (n, m, tau, diff) in &glue.pairs {
        println!("U_{m} vs U_{n} on t < {tau}: {diff:.2e}");
    }
    println!("max {:.2e} against tolerance {:.0e}", glue.max_difference, glue.tolerance);
    Ok(())
}
