//! Discrete Fourier transform interface and a direct reference implementation.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Kernel `exp(−2πi k x / n)`.
    Forward,
    /// Kernel `exp(+2πi k x / n)`, without the `1/n` factor.
    Inverse,
}

/// Unnormalised multidimensional DFT over a row-major array.
pub trait Dft {
    fn transform(&self, data: &mut [Complex64], shape: &[usize], dir: Direction);
}

/// Direct `O(n²)` transform along each axis. Slow, but simple enough to serve
/// as a reference for faster backends.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveDft;

impl Dft for NaiveDft {
    fn transform(&self, data: &mut [Complex64], shape: &[usize], dir: Direction) {
        let sgn = match dir {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        };
        let total: usize = shape.iter().product();
        debug_assert_eq!(total, data.len());
        let mut stride = total;
        for &n in shape {
            stride /= n;
            if n == 1 {
                continue;
            }
            let tw: Vec<Complex64> = (0..n)
                .map(|k| {
                    let a = sgn * 2.0 * core::f64::consts::PI * k as f64 / n as f64;
                    Complex64::new(libm::cos(a), libm::sin(a))
                })
                .collect();
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let block = n * stride;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    for k in 0..n {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (j, x) in line.iter().enumerate() {
                            acc += x * tw[(j * k) % n];
                        }
                        data[base + k * stride] = acc;
                    }
                }
            }
        }
    }
}
