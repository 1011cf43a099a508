use ksburgers::conv::{apply_k0, duhamel_k, duhamel_kdiv, SourceHistory};
use ksburgers::kernel::{kernel_on_grid, KernelKind};
use ksburgers::solver::{project_ball, random_trajectory, weighted_norm};
use ksburgers::{forward_transform, inverse_transform, lp_norm, Field, GridSpec};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = GridSpec> {
    (1usize..=3, prop::sample::select(vec![8usize, 12, 16]), 5.0f64..40.0)
        .prop_map(|(d, n, l)| GridSpec::new(d, n, l).unwrap())
}

fn field_strategy() -> impl Strategy<Value = Field> {
    grid_strategy().prop_flat_map(|g| {
        prop::collection::vec(-2.0f64..2.0, g.len()).prop_map(move |v| Field::new(g, v).unwrap())
    })
}

fn pair_strategy() -> impl Strategy<Value = (Field, Field)> {
    grid_strategy().prop_flat_map(|g| {
        (
            prop::collection::vec(-2.0f64..2.0, g.len()),
            prop::collection::vec(-2.0f64..2.0, g.len()),
        )
            .prop_map(move |(a, b)| (Field::new(g, a).unwrap(), Field::new(g, b).unwrap()))
    })
}

fn rel(a: &Field, b: &Field) -> f64 {
    let scale = b.lp_norm(2.0).unwrap().max(1e-300);
    a.difference(b).unwrap().lp_norm(2.0).unwrap() / scale
}

/// `sup_t |K_t|_1` of the discrete kernel on `grid` for `t` in `(0, 1]`:
/// the Young constant of the discrete propagator.
fn young_constant(grid: &GridSpec) -> f64 {
    (1..=200)
        .map(|i| {
            let t = 10f64.powf(-4.0 + 4.0 * i as f64 / 200.0);
            lp_norm(&kernel_on_grid(KernelKind::Kernel, t, grid).unwrap(), 1.0).unwrap()
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_roundtrip(f in field_strategy()) {
        let spec = forward_transform(&f);
        prop_assert!(spec.hermitian_defect() < 1e-13);
        prop_assert!(rel(&inverse_transform(&spec), &f) < 1e-13);
    }

    #[test]
    fn parseval(f in field_strategy()) {
        let g = *f.grid();
        let coeff_sum: f64 = forward_transform(&f).coeffs().iter().map(|c| c.norm_sqr()).sum();
        let l2 = f.lp_norm(2.0).unwrap().powi(2);
        prop_assert!((g.volume() * coeff_sum - l2).abs() <= 1e-12 * l2.max(1e-300));
    }

    #[test]
    fn lp_norm_is_a_norm((f, g) in pair_strategy(), p in 1.0f64..6.0, c in -3.0f64..3.0) {
        let nf = f.lp_norm(p).unwrap();
        let ng = g.lp_norm(p).unwrap();
        let sum = f.add_scaled(1.0, &g).unwrap().lp_norm(p).unwrap();
        prop_assert!(sum <= (nf + ng) * (1.0 + 1e-12));
        let scaled = f.scaled(c).lp_norm(p).unwrap();
        prop_assert!((scaled - c.abs() * nf).abs() <= 1e-12 * nf.max(1e-300));
    }

    #[test]
    fn semigroup(f in field_strategy(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        prop_assert!(rel(&apply_k0(&apply_k0(&f, s), t), &apply_k0(&f, s + t)) < 1e-12);
    }

    #[test]
    fn propagator_contracts_l2_and_is_young_bounded_in_l4(f in field_strategy(), t in 1e-4f64..1.0) {
        let out = apply_k0(&f, t);
        prop_assert!(out.lp_norm(2.0).unwrap() <= f.lp_norm(2.0).unwrap() * (1.0 + 1e-12));
        let c = young_constant(f.grid()) * 1.01;
        prop_assert!(out.lp_norm(4.0).unwrap() <= c * f.lp_norm(4.0).unwrap());
    }

    #[test]
    fn distance_to_data_grows_with_time(f in field_strategy(), t in 1e-5f64..0.5) {
        // Every mode factor |e^{-t a} - 1| is nondecreasing in t.
        let near = apply_k0(&f, t).difference(&f).unwrap().lp_norm(2.0).unwrap();
        let far = apply_k0(&f, 2.0 * t).difference(&f).unwrap().lp_norm(2.0).unwrap();
        prop_assert!(near <= far * (1.0 + 1e-10) + 1e-14);
    }

    #[test]
    fn projection_is_idempotent_retraction(f in field_strategy(), radius in 0.01f64..10.0, p in prop::sample::select(vec![1.0f64, 1.5, 2.0])) {
        let once = project_ball(&f, radius, p);
        prop_assert!(once.lp_norm(2.0 * p).unwrap() <= radius);
        let twice = project_ball(&once, radius, p);
        prop_assert_eq!(&once, &twice);
        if f.lp_norm(2.0 * p).unwrap() <= radius {
            prop_assert_eq!(&once, &f);
        }
    }

    #[test]
    fn duhamel_operators_are_linear(seed in 0u64..1000, a in -2.0f64..2.0) {
        let g = GridSpec::new(1, 16, 12.0).unwrap();
        let times: Vec<f64> = (0..=5).map(|j| j as f64 * 0.02).collect();
        let u = random_trajectory(&g, &times, 1.0, 1.0, seed);
        let v = random_trajectory(&g, &times, 1.0, 1.0, seed + 7);
        let mix: Vec<Field> = u.fields().iter().zip(v.fields()).map(|(x, y)| x.scaled(a).add_scaled(1.0, y).unwrap()).collect();
        let hu = SourceHistory::from_fields(times.clone(), u.fields()).unwrap();
        let hv = SourceHistory::from_fields(times.clone(), v.fields()).unwrap();
        let hm = SourceHistory::from_fields(times.clone(), &mix).unwrap();
        let t = 0.1;
        for op in [duhamel_k, duhamel_kdiv] {
            let lhs = op(&hm, t).unwrap();
            let rhs = op(&hu, t).unwrap().scaled(a).add_scaled(1.0, &op(&hv, t).unwrap()).unwrap();
            prop_assert!(lhs.difference(&rhs).unwrap().lp_norm(2.0).unwrap() < 1e-12);
        }
        prop_assert!(duhamel_kdiv(&hm, t).unwrap().mean().abs() < 1e-15);
    }

    #[test]
    fn weighted_norm_decreases_in_lambda(seed in 0u64..1000, l in 0.1f64..50.0) {
        let g = GridSpec::new(1, 16, 12.0).unwrap();
        let times: Vec<f64> = (0..=10).map(|j| j as f64 * 0.05).collect();
        let u = random_trajectory(&g, &times, 1.0, 1.0, seed);
        prop_assert!(weighted_norm(&u, 2.0 * l, 1.0) < weighted_norm(&u, l, 1.0));
    }
}
