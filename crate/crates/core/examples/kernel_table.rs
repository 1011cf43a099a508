//! The L-KS kernel next to its BTBM twin in one dimension, with an envelope
//! calibrated to dominate the L-KS samples.

use ksburgers::kernel::{btbm_kernel, calibrate_envelope, envelope_bound, lks_kernel_real, lks_samples, KernelKind};

fn main() -> ksburgers::Result<()> {
    let times = [0.01, 0.1, 1.0];
    let radii: Vec<f64> = (0..=20).map(|j| 0.5 * j as f64).collect();
    let samples = lks_samples(KernelKind::Kernel, 1, &times, &radii)?;
    let env = calibrate_envelope(KernelKind::Kernel, 1, &samples, 1.0)?;
    println!("envelope: C = {:.4}, c1 = {}, c2 = {}", env.c, env.c1, env.c2);
    println!("{:>6} {:>6} {:>13} {:>13} {:>13}", "t", "r", "K_lks", "K_btbm", "envelope");
    for &t in &times {
        for &r in radii.iter().step_by(4) {
            println!(
                "{t:>6} {r:>6} {:>13.5e} {:>13.5e} {:>13.5e}",
                lks_kernel_real(t, r, 1)?,
                btbm_kernel(t, r, 1)?,
                envelope_bound(&env, t, r, 1)?
            );
        }
    }
    Ok(())
}
