//! FFT backend for the core `Dft` trait.

use std::sync::{Arc, Mutex};

use mdht_core::spectral::{Dft, Direction};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Columns gathered per batch on strided axes.
const BATCH: usize = 32;

/// Mixed-radix FFT from `rustfft`, planned per axis length and cached.
pub struct RustFft {
    planner: Mutex<FftPlanner<f64>>,
}

impl Default for RustFft {
    fn default() -> Self {
        RustFft { planner: Mutex::new(FftPlanner::new()) }
    }
}

impl RustFft {
    pub fn new() -> Self {
        Self::default()
    }

    fn plan(&self, n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
        let mut p = self.planner.lock().unwrap_or_else(|e| e.into_inner());
        match dir {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    }
}

impl Dft for RustFft {
    fn transform(&self, data: &mut [Complex64], shape: &[usize], dir: Direction) {
        let total: usize = shape.iter().product();
        assert_eq!(total, data.len(), "buffer does not match the grid shape");
        let mut stride = total;
        for &n in shape {
            stride /= n;
            if n == 1 {
                continue;
            }
            let plan = self.plan(n, dir);
            if stride == 1 {
                let chunk = n * (4096 / n).max(1);
                data.par_chunks_mut(chunk).for_each(|c| {
                    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
                    plan.process_with_scratch(c, &mut scratch);
                });
            } else {
                data.par_chunks_mut(n * stride).for_each(|block| strided(block, n, stride, plan.as_ref()));
            }
        }
    }
}

/// Transforms the `stride` interleaved lines of one outer block.
fn strided(block: &mut [Complex64], n: usize, stride: usize, plan: &dyn Fft<f64>) {
    let mut buf = vec![Complex64::default(); n * BATCH];
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
    let mut c0 = 0;
    while c0 < stride {
        let w = BATCH.min(stride - c0);
        for k in 0..n {
            let row = &block[k * stride + c0..k * stride + c0 + w];
            for (b, &x) in row.iter().enumerate() {
                buf[b * n + k] = x;
            }
        }
        plan.process_with_scratch(&mut buf[..w * n], &mut scratch);
        for k in 0..n {
            let row = &mut block[k * stride + c0..k * stride + c0 + w];
            for (b, y) in row.iter_mut().enumerate() {
                *y = buf[b * n + k];
            }
        }
        c0 += w;
    }
}
