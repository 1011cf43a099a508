//! Acceptance gate. Each test prints one PASS/FAIL line with the measured
//! value and its pinned tolerance, then asserts.

use ksburgers::conv::apply_k0;
use ksburgers::init::gaussian_bump;
use ksburgers::kernel::{btbm_kernel, btbm_mass, kernel_on_grid, lks_kernel_real, KernelKind};
use ksburgers::solver::{lambda_threshold, solve_local, SolverConfig};
use ksburgers::verify::{
    check_contraction, check_holder, check_stability, default_l1_grid, direct_integrator,
    eikonal_crosscheck, fit_l1_scaling, fit_lq_scaling, HolderOperator,
};
use ksburgers::{Field, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(name: &str, pass: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn rel_l2(a: &Field, b: &Field) -> f64 {
    a.difference(b).unwrap().lp_norm(2.0).unwrap() / b.lp_norm(2.0).unwrap()
}

fn reference_bump() -> (SolverConfig, Field) {
    let grid = GridSpec::new(1, 256, 50.0).unwrap();
    let cfg = SolverConfig::new(1.0, grid, 0.5, 1e-3).unwrap();
    let u0 = gaussian_bump(&grid, 1.0, 1.0).unwrap();
    (cfg, u0)
}

#[test]
fn kernel_quadrature_matches_spectral_synthesis() {
    let grid = GridSpec::new(1, 2048, 80.0).unwrap();
    let h = grid.spacing();
    let mut worst = 0.0f64;
    for t in [0.01, 0.1, 1.0] {
        let synth = kernel_on_grid(KernelKind::Kernel, t, &grid).unwrap();
        let quad: Vec<f64> = (0..)
            .map(|j| j as f64 * h)
            .take_while(|r| *r <= 10.0)
            .map(|r| lks_kernel_real(t, r, 1).unwrap())
            .collect();
        let scale = quad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (q, s) in quad.iter().zip(synth.values()) {
            worst = worst.max((q - s).abs() / scale);
        }
    }
    assert!(report(
        "kernel representation consistency",
        worst <= 1e-6,
        format!("max relative deviation {worst:.3e} (tolerance 1e-6)")
    ));
}

#[test]
fn l1_norms_follow_power_laws() {
    let grid = default_l1_grid();
    let targets = [
        (KernelKind::Kernel, 0.0, 0.02),
        (KernelKind::SpaceDeriv, -0.25, 0.02),
        (KernelKind::TimeDeriv, -1.0, 0.03),
        (KernelKind::Mixed, -1.25, 0.05),
    ];
    let mut all = true;
    let mut parts = Vec::new();
    for (kind, expected, tol) in targets {
        let fit = fit_l1_scaling(kind, (1e-3, 1e-1), &grid).unwrap();
        let ok = (fit.fitted_exponent - expected).abs() <= tol;
        all &= ok;
        parts.push(format!(
            "{} {:.4} vs {expected} ± {tol}{}",
            kind.name(),
            fit.fitted_exponent,
            if ok { "" } else { " [out]" }
        ));
    }
    assert!(report("L1 scaling", all, parts.join("; ")));
}

#[test]
fn lq_norms_follow_power_law_and_barrier() {
    let mut all = true;
    let mut parts = Vec::new();
    for (p, d) in [(1.0, 1), (1.0, 3), (1.0, 5), (2.0, 3)] {
        let expected = -(2.0 * p + d as f64) / (8.0 * p);
        let fit = fit_lq_scaling(p, d, (1e-5, 1e-3)).unwrap();
        let ok = (fit.fitted_exponent - expected).abs() <= 0.03;
        all &= ok;
        parts.push(format!("(p={p},d={d}) {:.4} vs {expected:.4}", fit.fitted_exponent));
    }
    let d5 = fit_lq_scaling(1.0, 5, (1e-5, 1e-3)).unwrap();
    all &= d5.integrable == Some(true);
    let rejected = lambda_threshold(1.0, 1.0, 6).is_err_and(|e| e.is_validation());
    all &= rejected;
    parts.push(format!("d=5 integrable {:?}; (p=1,d=6) rejected {rejected}", d5.integrable));
    assert!(report("Lq scaling", all, parts.join("; ")));
}

#[test]
fn btbm_twin_is_a_probability_kernel() {
    let mass = btbm_mass(1.0, 1).unwrap();
    let mut negatives = 0;
    for i in 0..10 {
        let t = 10f64.powf(-2.0 + 3.0 * i as f64 / 9.0);
        for j in 1..=20 {
            for d in 1..=5 {
                negatives += (btbm_kernel(t, 0.5 * j as f64, d).unwrap() < 0.0) as usize;
            }
        }
    }
    let lks_min = (0..=200)
        .map(|j| lks_kernel_real(1.0, 0.05 * j as f64, 1).unwrap())
        .fold(f64::INFINITY, f64::min);
    let pass = (mass - 1.0).abs() <= 1e-8 && negatives == 0 && lks_min < 0.0;
    assert!(report(
        "BTBM twin",
        pass,
        format!("mass - 1 = {:.2e}; negative samples {negatives}/1000; min L-KS value {lks_min:.4}", mass - 1.0)
    ));
}

#[test]
fn propagator_is_a_semigroup() {
    let grid = GridSpec::new(2, 32, 20.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let z = Field::new(grid, (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let (s, t) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        worst = worst.max(rel_l2(&apply_k0(&apply_k0(&z, s), t), &apply_k0(&z, s + t)));
    }
    assert!(report(
        "semigroup identity",
        worst <= 1e-12,
        format!("max relative deviation over 100 trials {worst:.2e} (tolerance 1e-12)")
    ));
}

#[test]
fn solution_map_contracts() {
    let grid = GridSpec::new(1, 128, 50.0).unwrap();
    let mut cfg = SolverConfig::new(1.0, grid, 0.25, 1e-3).unwrap();
    cfg.n_schedule = vec![1.0];
    let r = check_contraction(&cfg, 20, 3).unwrap();
    assert!(report(
        "contraction",
        r.max_ratio < 1.0 && r.monotone,
        format!(
            "max ratio {:.3e} over 20 pairs at lambda {:.3}; decreasing in lambda {}",
            r.max_ratio, r.lambda, r.monotone
        )
    ));
}

#[test]
fn fixed_point_solver_matches_direct_integrator() {
    let (cfg, u0) = reference_bump();
    let err = |cfg: &SolverConfig| {
        let sol = solve_local(cfg, &u0).unwrap();
        let reference = direct_integrator(cfg, &u0).unwrap();
        assert_eq!(sol.trajectory.len(), reference.len());
        rel_l2(sol.trajectory.last(), reference.last())
    };
    let coarse = err(&cfg);
    let mut half = cfg.clone();
    half.dt /= 2.0;
    let fine = err(&half);
    assert!(report(
        "solver vs oracle",
        coarse <= 1e-3 && coarse / fine >= 2.0,
        format!("relative L2 {coarse:.3e} (tolerance 1e-3); gain from halving dt {:.2} (at least 2)", coarse / fine)
    ));
}

#[test]
fn glued_balls_agree_before_exit() {
    let grid = GridSpec::new(1, 128, 50.0).unwrap();
    let mut cfg = SolverConfig::new(1.0, grid, 0.5, 1e-3).unwrap();
    cfg.n_schedule = vec![1.95, 2.0, 2.03, 2.05, 4.0];
    let u0 = gaussian_bump(&grid, 1.9, 1.0).unwrap();
    let sol = solve_local(&cfg, &u0).unwrap();
    let (n0, tau0) = sol.exit_times[0];
    let mut worst = 0.0f64;
    for (i, small) in sol.runs.iter().enumerate() {
        let tau = sol.exit_time(small.radius).unwrap();
        let end = small.trajectory.times().iter().take_while(|t| **t < tau).count();
        for large in &sol.runs[i + 1..] {
            for k in 0..end {
                let d = small.trajectory.fields()[k]
                    .difference(&large.trajectory.fields()[k])
                    .unwrap()
                    .lp_norm(2.0)
                    .unwrap();
                worst = worst.max(d);
            }
        }
    }
    let tol = 10.0 * cfg.picard_tol;
    assert!(report(
        "glue consistency",
        tau0 < cfg.t_final && sol.runs.len() > 1 && worst <= tol,
        format!("first ball N = {n0} exited at {tau0}; max difference {worst:.2e} (tolerance {tol:.0e})")
    ));
}

#[test]
fn spatial_mean_is_conserved() {
    let (cfg, u0) = reference_bump();
    let traj = solve_local(&cfg, &u0).unwrap().trajectory;
    let m0 = u0.mean();
    let rate = traj
        .times()
        .iter()
        .zip(traj.fields())
        .skip(1)
        .map(|(t, f)| (f.mean() - m0).abs() / (m0.abs() * t))
        .fold(0.0, f64::max);
    assert!(report(
        "mean conservation",
        rate <= 1e-9,
        format!("relative drift per unit time {rate:.2e} (tolerance 1e-9)")
    ));
}

#[test]
fn eikonal_derivative_solves_burgers_form() {
    let grid = GridSpec::new(1, 256, 50.0).unwrap();
    let cfg = SolverConfig::new(1.0, grid, 0.25, 1e-3).unwrap();
    let r = eikonal_crosscheck(&gaussian_bump(&grid, 1.0, 1.0).unwrap(), &cfg).unwrap();
    assert!(report(
        "eikonal cross-check",
        r.relative_l2 <= 1e-3,
        format!("relative L2 at T = {} is {:.3e} (tolerance 1e-3)", r.t_final, r.relative_l2)
    ));
}

#[test]
fn propagator_is_continuous_at_time_zero() {
    let grid = GridSpec::new(1, 256, 50.0).unwrap();
    let mut all = true;
    let mut parts = Vec::new();
    for p in [1.0, 2.0] {
        let u0 = gaussian_bump(&grid, 1.0, p).unwrap();
        let q = 2.0 * p;
        let rel = apply_k0(&u0, 1e-4).difference(&u0).unwrap().lp_norm(q).unwrap() / u0.lp_norm(q).unwrap();
        all &= rel <= 1e-4;
        parts.push(format!("p={p}: {rel:.3e}"));
    }
    assert!(report("initial continuity", all, format!("{} (tolerance 1e-4)", parts.join(", "))));
}

#[test]
fn stability_ratios_are_delta_independent() {
    let grid = GridSpec::new(1, 128, 50.0).unwrap();
    let cfg = SolverConfig::new(1.0, grid, 0.25, 1e-3).unwrap();
    let u0 = gaussian_bump(&grid, 1.0, 1.0).unwrap();
    let r = check_stability(&cfg, &u0, &[1e-2, 1e-3, 1e-4], 5).unwrap();
    let max = r.ratios.iter().copied().fold(0.0, f64::max);
    let min = r.ratios.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(report(
        "weak stability",
        max / min <= 2.0,
        format!("ratios {:?}; spread {:.4} (at most 2)", r.ratios, max / min)
    ));
}

#[test]
fn convolutions_are_holder_in_time() {
    let grid = GridSpec::new(1, 128, 50.0).unwrap();
    let mut all = true;
    let mut parts = Vec::new();
    for (op, p, gamma, theory) in [
        (HolderOperator::Kdiv, 1.0, 3.2, 5.0 / 8.0 - 1.0 / 3.2),
        (HolderOperator::Kdiv, 2.0, 32.0 / 11.0, 11.0 / 16.0 - 11.0 / 32.0),
        (HolderOperator::K, 1.0, 2.0, 0.5),
    ] {
        let cfg = SolverConfig::new(p, grid, 0.128, 1e-3).unwrap();
        let r = check_holder(op, &cfg, gamma, 8, 1).unwrap();
        let ok = r.fitted >= theory - 0.05;
        all &= ok;
        parts.push(format!("{} p={p}: {:.3} vs {:.4}", op.name(), r.fitted, theory));
    }
    assert!(report("Hölder in time", all, format!("{} (margin 0.05)", parts.join("; "))));
}
