//! Every registered check, as run by `ksb verify all`.

use ksburgers::verify::{run_check, CHECK_NAMES};

fn main() -> ksburgers::Result<()> {
    let mut failed = 0;
    for name in CHECK_NAMES {
        let outcome = run_check(name, 0)?;
        for r in &outcome.summary {
            failed += !r.pass as usize;
            println!(
                "{} {:<34} measured {:>12.5e} expected {:>12.5e}",
                if r.pass { "PASS" } else { "FAIL" },
                r.check,
                r.measured,
                r.expected
            );
        }
    }
    println!("{failed} failing rows");
    Ok(())
}
