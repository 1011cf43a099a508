//! The time singularity of the Burgers convolution becomes non-integrable at
//! d = 6p, and the solver refuses such dimensions.

use ksburgers::solver::{check_dimension, lambda_threshold};
use ksburgers::verify::{fit_lq_scaling, LQ_WINDOW};

fn main() -> ksburgers::Result<()> {
    for d in 1..=7 {
        let r = fit_lq_scaling(1.0, d, LQ_WINDOW)?;
        println!(
            "p = 1, d = {d}: exponent {:>7.4} (theory {:>7.4}), integrable: {}",
            r.fitted_exponent,
            r.expected_exponent,
            r.integrable.unwrap()
        );
    }
    match lambda_threshold(1.0, 1.0, 6) {
        Ok(l) => println!("unexpected threshold {l}"),
        Err(e) => println!("lambda_threshold(p = 1, d = 6): {e}"),
    }
    println!("p = 2, d = 6 accepted: {}", check_dimension(2.0, 6).is_ok());
    Ok(())
}
