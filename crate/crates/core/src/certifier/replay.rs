//! Closed-form replays of the norm recursions and constant bookkeeping.
//!
//! The loops use the same upward rounding, in the same order, as the
//! certificate engine, so an engine tree and its replay agree bit for bit.

use alloc::format;
use alloc::string::String;

use super::round::{add_up, mul_up, sqrt_up};
use crate::error::{Error, Result};

fn power_of_two_log(n: u64, what: &str) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::invalid(format!("{what} must be a power of two, got {n}")));
    }
    Ok(n.trailing_zeros())
}

/// `1 + 3√D·log₂N`: pair arcs along a curve crossed at most `D` times by a
/// generic line.
pub fn replay_curve_recursion(n: u64, d: u64) -> Result<f64> {
    let k = power_of_two_log(n, "N")?;
    if d == 0 {
        return Err(Error::invalid("D must be at least 1"));
    }
    let step = mul_up(sqrt_up(d as f64), 3.0);
    Ok((0..k).fold(1.0, |acc, _| add_up(acc, step)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductReplay {
    /// `1 + 5 Σ_{r=1..R} 2^{r/2}`.
    pub value: f64,
    /// `5 / (1 − 2^{−1/2})`.
    pub constant: f64,
    /// `value ≤ constant · 2^{R/2}`.
    pub within_closed_form: bool,
}

/// Planar product `U_{2^R} × U_{2^R}` with 2 × 2 blocks.
pub fn replay_product_recursion(r: u32) -> Result<ProductReplay> {
    if r > 60 {
        return Err(Error::invalid("R above 60 does not fit the direction count"));
    }
    let mut acc = 1.0;
    for k in 1..=r {
        acc = add_up(acc, mul_up(sqrt_up((1u64 << k) as f64), 5.0));
    }
    let constant = 5.0 / (1.0 - core::f64::consts::FRAC_1_SQRT_2);
    let within = acc <= constant * libm::exp2(r as f64 / 2.0);
    Ok(ProductReplay { value: acc, constant, within_closed_form: within })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicReplay {
    pub value: f64,
    /// Halving stops once `N < d²/c`.
    pub floor: f64,
    /// Size reached when halving stopped; its TRIVIAL bound is the base.
    pub base: u64,
    pub steps: u32,
    /// Every output depends on this constant.
    pub c: f64,
    pub note: String,
}

/// Directions on a degree-`d` curve: `B(N) ≤ B(N/2) + 5√d` while `d² ≤ cN`,
/// then `B(N) ≤ N`.
pub fn replay_algebraic_recursion(n: u64, d: u64, c: f64) -> Result<AlgebraicReplay> {
    power_of_two_log(n, "N")?;
    if d == 0 {
        return Err(Error::invalid("degree must be at least 1"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c must be positive"));
    }
    let floor = (d as f64) * (d as f64) / c;
    let mut size = n;
    let mut steps = 0;
    while size > 1 && size as f64 >= floor {
        size /= 2;
        steps += 1;
    }
    let step = mul_up(sqrt_up(d as f64), 5.0);
    let value = (0..steps).fold(size as f64, |acc, _| add_up(acc, step));
    Ok(AlgebraicReplay {
        value,
        floor,
        base: size,
        steps,
        c,
        note: format!("conditional on c = {c}"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm3dConstants {
    pub c: f64,
    pub c0: f64,
    /// `2(A₁c₀⁻² + 1)`.
    pub big_c0: f64,
    pub a_min: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Thm3dConstants {
    /// The three lower bounds on `A`: base case, halving step, large degree.
    pub fn lower_bounds(&self) -> [f64; 3] {
        [2.0 * self.a1 / (self.c0 * self.c0), 5.0 / core::f64::consts::LN_2, self.big_c0]
    }
}

/// `c = 1/(16A₂)` satisfies `2A₂c < 1/4` with room; `c₀` solves
/// `8⁴A₁c₀² = c`.
pub fn replay_thm3d_constants(a1: f64, a2: f64) -> Result<Thm3dConstants> {
    if !(a1 > 0.0 && a1.is_finite() && a2 > 0.0 && a2.is_finite()) {
        return Err(Error::invalid("A1 and A2 must be positive and finite"));
    }
    let c = 1.0 / (16.0 * a2);
    let c0 = libm::sqrt(c / (4096.0 * a1));
    let big_c0 = 2.0 * (a1 / (c0 * c0) + 1.0);
    let mut k = Thm3dConstants { c, c0, big_c0, a_min: 0.0, a1, a2 };
    k.a_min = k.lower_bounds().into_iter().fold(0.0, f64::max);
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gen3dStep {
    /// `h(N)/ln N`.
    pub omega: f64,
    /// `√N ω²`.
    pub d0: f64,
    /// `A₁d₀²`, the number of components.
    pub components: f64,
    /// `A₁ω⁻⁴`, points per component.
    pub per_cell: f64,
    /// `A₁^{1/4}(ε + 4h((ln N)⁴)/h(N))`.
    pub contraction: f64,
    /// `5A₁^{1/4}ε`, which dominates the contraction.
    pub contraction_bound: f64,
    /// `A√d₀ ln N = A N^{1/4} h(N)`, the zero-set part.
    pub zero_set_bound: f64,
}

/// One induction step of the `N^{1/4}h(N)` bound at `N = e^{ln_n}`. `h`
/// receives `ln N` and returns `h(N)`.
pub fn replay_3dgen_step(ln_n: f64, h: &dyn Fn(f64) -> f64, a1: f64, a: f64, eps: f64) -> Result<Gen3dStep> {
    if !(ln_n > 1.0 && ln_n.is_finite()) {
        return Err(Error::invalid("ln N must exceed 1"));
    }
    if !(a1 > 0.0 && a > 0.0) {
        return Err(Error::invalid("A1 and A must be positive"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("epsilon must lie in (0, 1)"));
    }
    let violated = |what: &str| Err(Error::Infeasible(format!("step condition fails: {what}")));
    let hn = h(ln_n);
    let h_small = h(4.0 * libm::log(ln_n));
    if !(hn.is_finite() && hn > 0.0 && h_small.is_finite()) {
        return Err(Error::invalid("h must be positive and finite"));
    }
    let omega = hn / ln_n;
    if omega > eps {
        return violated("h(N)/ln N <= eps");
    }
    if ln_n + 4.0 * libm::log(omega) <= -libm::log(eps) {
        return violated("N (h(N)/ln N)^4 > 1/eps");
    }
    if hn <= 1.0 / eps {
        return violated("h(N) > 1/eps");
    }
    if h_small >= eps * hn {
        return violated("h((ln N)^4) < eps h(N)");
    }
    let q = libm::sqrt(libm::sqrt(a1));
    if 10.0 * q * eps >= 1.0 {
        return violated("10 A1^(1/4) eps < 1");
    }
    let d0 = libm::exp(ln_n / 2.0) * omega * omega;
    Ok(Gen3dStep {
        omega,
        d0,
        components: a1 * d0 * d0,
        per_cell: a1 / (omega * omega * omega * omega),
        contraction: q * (eps + 4.0 * h_small / hn),
        contraction_bound: 5.0 * q * eps,
        zero_set_bound: a * libm::sqrt(d0) * ln_n,
    })
}
