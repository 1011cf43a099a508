//! Multi-dimensional complex FFT over row-major `n^d` arrays, built from
//! 1-d `rustfft` passes along each axis.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Arrays smaller than this are transformed on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 15;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let planner = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()));
    let mut guard = planner.lock().expect("fft planner poisoned");
    if inverse {
        guard.plan_fft_inverse(n)
    } else {
        guard.plan_fft_forward(n)
    }
}

/// Unnormalized in-place transform of every axis.
pub(crate) fn transform(data: &mut [Complex64], n: usize, dim: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = plan(n, inverse);
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            batch(&*fft, data, n);
        } else {
            strided_axis(&*fft, data, n, stride);
        }
    }
}

fn batch(fft: &dyn Fft<f64>, lines: &mut [Complex64], n: usize) {
    if lines.len() >= PARALLEL_THRESHOLD {
        let per_task = (PARALLEL_THRESHOLD / n).max(1) * n;
        lines.par_chunks_mut(per_task).for_each(|chunk| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(chunk, &mut scratch);
        });
    } else {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(lines, &mut scratch);
    }
}

// Lines along a non-contiguous axis are gathered into a contiguous buffer,
// transformed as a batch, and scattered back.
fn strided_axis(fft: &dyn Fft<f64>, data: &mut [Complex64], n: usize, stride: usize) {
    let block = n * stride;
    let mut buf = vec![Complex64::default(); block];
    for chunk in data.chunks_mut(block) {
        for i in 0..stride {
            for j in 0..n {
                buf[i * n + j] = chunk[j * stride + i];
            }
        }
        batch(fft, &mut buf, n);
        for i in 0..stride {
            for j in 0..n {
                chunk[j * stride + i] = buf[i * n + j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Direct O(N^2) DFT on a 2-d array.
    fn dft2(data: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); n * n];
        for k0 in 0..n {
            for k1 in 0..n {
                let mut acc = Complex64::default();
                for j0 in 0..n {
                    for j1 in 0..n {
                        let phase = -2.0 * PI * ((k0 * j0 + k1 * j1) as f64) / n as f64;
                        acc += data[j0 * n + j1] * Complex64::from_polar(1.0, phase);
                    }
                }
                out[k0 * n + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_direct_dft_in_two_dimensions() {
        let n = 6;
        let data: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        transform(&mut fast, n, 2, false);
        let slow = dft2(&data, n);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
