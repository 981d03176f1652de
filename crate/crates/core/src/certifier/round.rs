//! Arithmetic rounded toward +∞.
//!
//! Each operation computes the round-to-nearest result together with its
//! exact error term and steps up one ulp only when the true value lies above.
//! Results that are representable come out exact.

/// Smallest float strictly greater than `x` (for finite `x`).
pub fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let b = x.to_bits();
    f64::from_bits(if x > 0.0 { b + 1 } else { b - 1 })
}

pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err > 0.0 {
        next_up(s)
    } else {
        s
    }
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    let err = libm::fma(a, b, -p);
    if err > 0.0 {
        next_up(p)
    } else {
        p
    }
}

pub fn sqrt_up(x: f64) -> f64 {
    let s = libm::sqrt(x);
    if !s.is_finite() {
        return s;
    }
    if libm::fma(s, s, -x) < 0.0 {
        next_up(s)
    } else {
        s
    }
}

/// Sum of the slice, left to right.
pub fn sum_up(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, add_up)
}
