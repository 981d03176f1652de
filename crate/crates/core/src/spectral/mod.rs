//! Directional Hilbert transforms as exact Fourier multipliers on a periodic grid.
//!
//! A field lives on the torus `∏ [o_j, o_j + L_j)` sampled at `n_j` points per
//! axis. Index `i` on an axis of length `n` stands for the frequency
//! `k/L` with `k = i` below `n/2` and `k = i − n` above it. The Nyquist index
//! `n/2` is treated as frequency zero on that axis, which keeps every
//! multiplier odd under `ξ ↦ −ξ` so real inputs give real outputs.

mod dft;

pub use dft::{Dft, Direction, NaiveDft};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::rational::{common_denominator, from_f64, scaled_integer, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    shape: Vec<usize>,
    box_len: Vec<f64>,
    origin: Vec<f64>,
    values: Vec<f64>,
}

impl SampledField {
    pub fn new(shape: Vec<usize>, box_len: Vec<f64>, origin: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::invalid("field needs at least one axis"));
        }
        if box_len.len() != shape.len() {
            return Err(Error::DimMismatch { expected: shape.len(), found: box_len.len() });
        }
        if origin.len() != shape.len() {
            return Err(Error::DimMismatch { expected: shape.len(), found: origin.len() });
        }
        if let Some(n) = shape.iter().find(|n| !n.is_power_of_two()) {
            return Err(Error::invalid(format!("axis length {n} is not a power of two")));
        }
        if box_len.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::invalid("box lengths must be positive and finite"));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::invalid("origin must be finite"));
        }
        let total = shape
            .iter()
            .try_fold(1usize, |a, &n| a.checked_mul(n))
            .ok_or_else(|| Error::Overflow("grid size overflows usize".into()))?;
        if values.len() != total {
            return Err(Error::DimMismatch { expected: total, found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("field values must be finite"));
        }
        Ok(SampledField { shape, box_len, origin, values })
    }

    pub fn zeros(shape: Vec<usize>, box_len: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        let total = shape.iter().product();
        Self::new(shape, box_len, origin, vec![0.0; total])
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(
        shape: Vec<usize>,
        box_len: Vec<f64>,
        origin: Vec<f64>,
        mut f: impl FnMut(&[f64]) -> f64,
    ) -> Result<Self> {
        let mut field = Self::zeros(shape, box_len, origin)?;
        let mut x = vec![0.0; field.dim()];
        for i in 0..field.values.len() {
            field.coords_into(i, &mut x);
            field.values[i] = f(&x);
        }
        if field.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sampled function produced a non-finite value"));
        }
        Ok(field)
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.shape.clone(), self.box_len.clone(), self.origin.clone(), values)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn box_len(&self) -> &[f64] {
        &self.box_len
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.box_len[axis] / self.shape[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k)).product()
    }

    /// `‖f‖₂²` by the Riemann sum over the grid.
    pub fn norm_sq(&self) -> f64 {
        self.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    pub fn same_grid(&self, other: &SampledField) -> bool {
        self.shape == other.shape && self.box_len == other.box_len && self.origin == other.origin
    }

    /// Physical coordinates of the flat index `i`.
    pub fn coords_into(&self, mut i: usize, out: &mut [f64]) {
        for k in (0..self.dim()).rev() {
            let n = self.shape[k];
            out[k] = self.origin[k] + (i % n) as f64 * self.spacing(k);
            i /= n;
        }
    }

    pub fn coords(&self, i: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.coords_into(i, &mut x);
        x
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Signed integer frequency of index `i` on an axis of `n` samples, with the
/// Nyquist index folded to zero.
pub fn freq_index(i: usize, n: usize) -> i64 {
    if 2 * i < n {
        i as i64
    } else if 2 * i == n {
        0
    } else {
        i as i64 - n as i64
    }
}

/// `sgn(ξ·⟨v,1⟩)` for every grid frequency, computed exactly.
pub fn multiplier_signs(shape: &[usize], box_len: &[f64], v: &[Rational]) -> Result<Vec<i8>> {
    let dim = shape.len();
    if v.len() + 1 != dim {
        return Err(Error::DimMismatch { expected: dim - 1, found: v.len() });
    }
    let mut c = Vec::with_capacity(dim);
    for (j, &l) in box_len.iter().enumerate() {
        let num = if j + 1 < dim { v[j].clone() } else { Rational::from_integer(1.into()) };
        c.push(num / from_f64(l)?);
    }
    let den = common_denominator(c.iter());
    let weights: Vec<BigInt> = c
        .iter()
        .map(|q| scaled_integer(q, &den).expect("common denominator clears every entry"))
        .collect();
    let total: usize = shape.iter().product();
    let mut out = Vec::with_capacity(total);
    let limit = BigInt::from(1u128 << 90);
    if weights.iter().all(|w| w.abs() <= limit) {
        let w: Vec<i128> = weights.iter().map(|x| x.to_i128().expect("bounded above")).collect();
        fill_small(shape, &w, 0, 0, &mut out);
    } else {
        fill_big(shape, &weights, 0, BigInt::zero(), &mut out);
    }
    Ok(out)
}

fn fill_small(shape: &[usize], w: &[i128], axis: usize, acc: i128, out: &mut Vec<i8>) {
    let n = shape[axis];
    if axis + 1 == shape.len() {
        for i in 0..n {
            out.push((acc + freq_index(i, n) as i128 * w[axis]).signum() as i8);
        }
    } else {
        for i in 0..n {
            fill_small(shape, w, axis + 1, acc + freq_index(i, n) as i128 * w[axis], out);
        }
    }
}

fn fill_big(shape: &[usize], w: &[BigInt], axis: usize, acc: BigInt, out: &mut Vec<i8>) {
    let n = shape[axis];
    for i in 0..n {
        let next = &acc + BigInt::from(freq_index(i, n)) * &w[axis];
        if axis + 1 == shape.len() {
            out.push(if next.is_positive() { 1 } else if next.is_negative() { -1 } else { 0 });
        } else {
            fill_big(shape, w, axis + 1, next, out);
        }
    }
}

fn check_direction(f: &SampledField, v: &[Rational]) -> Result<()> {
    if v.len() + 1 != f.dim() {
        return Err(Error::DimMismatch { expected: f.dim() - 1, found: v.len() });
    }
    Ok(())
}

/// Full complex spectrum of a real field.
#[derive(Debug, Clone)]
pub struct Spectrum {
    field: SampledField,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(f: &SampledField, dft: &dyn Dft) -> Spectrum {
        let mut data: Vec<Complex64> = f.values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        dft.transform(&mut data, &f.shape, Direction::Forward);
        Spectrum { field: f.clone(), data }
    }

    pub fn field(&self) -> &SampledField {
        &self.field
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// `H_{v₁} f` and, when given, `H_{v₂} f` from one inverse transform:
    /// the first lands in the real part and the second in the imaginary part.
    pub fn hv_pair(&self, s1: &[i8], s2: Option<&[i8]>, dft: &dyn Dft) -> (Vec<f64>, Option<Vec<f64>>) {
        let mut z: Vec<Complex64> = match s2 {
            Some(s2) => self
                .data
                .iter()
                .zip(s1.iter().zip(s2))
                .map(|(f, (&a, &b))| {
                    let (a, b) = (a as f64, b as f64);
                    Complex64::new(a * f.im + b * f.re, -a * f.re + b * f.im)
                })
                .collect(),
            None => self
                .data
                .iter()
                .zip(s1)
                .map(|(f, &a)| {
                    let a = a as f64;
                    Complex64::new(a * f.im, -a * f.re)
                })
                .collect(),
        };
        dft.transform(&mut z, &self.field.shape, Direction::Inverse);
        let scale = 1.0 / z.len() as f64;
        let first = z.iter().map(|c| c.re * scale).collect();
        let second = s2.map(|_| z.iter().map(|c| c.im * scale).collect());
        (first, second)
    }

    pub fn signs(&self, v: &[Rational]) -> Result<Vec<i8>> {
        check_direction(&self.field, v)?;
        multiplier_signs(&self.field.shape, &self.field.box_len, v)
    }
}

/// `H_v f`, the field with transform `−i·sgn(ξ·⟨v,1⟩)·f̂(ξ)`.
pub fn apply_hv(f: &SampledField, v: &[Rational], dft: &dyn Dft) -> Result<SampledField> {
    check_direction(f, v)?;
    let spec = Spectrum::of(f, dft);
    let s = spec.signs(v)?;
    let (g, _) = spec.hv_pair(&s, None, dft);
    f.with_values(g)
}

/// `sup_{v∈Ω} |H_v f|` pointwise.
pub fn apply_maximal(f: &SampledField, omega: &DirectionSet, dft: &dyn Dft) -> Result<SampledField> {
    if omega.is_empty() {
        return Err(Error::Empty("direction set is empty"));
    }
    if omega.dim() + 1 != f.dim() {
        return Err(Error::DimMismatch { expected: f.dim() - 1, found: omega.dim() });
    }
    let spec = Spectrum::of(f, dft);
    let mut acc = vec![0.0f64; f.len()];
    for pair in canonical_directions(omega).chunks(2) {
        let s1 = spec.signs(&pair[0])?;
        let s2 = pair.get(1).map(|v| spec.signs(v)).transpose()?;
        let (g1, g2) = spec.hv_pair(&s1, s2.as_deref(), dft);
        max_abs_into(&mut acc, &g1);
        if let Some(g2) = g2 {
            max_abs_into(&mut acc, &g2);
        }
    }
    f.with_values(acc)
}

/// Directions in sorted order. Transforms are paired in this order, so the
/// maximal function does not depend on how Ω lists its points.
pub fn canonical_directions(omega: &DirectionSet) -> Vec<&[Rational]> {
    let mut pts: Vec<&[Rational]> = omega.points().iter().map(|p| p.as_slice()).collect();
    pts.sort();
    pts
}

pub fn max_abs_into(acc: &mut [f64], vals: &[f64]) {
    for (a, v) in acc.iter_mut().zip(vals) {
        let x = v.abs();
        if x > *a {
            *a = x;
        }
    }
}

/// Keeps only the frequencies with `ξ·⟨v,1⟩ = 0`.
pub fn null_projection(f: &SampledField, v: &[Rational], dft: &dyn Dft) -> Result<SampledField> {
    check_direction(f, v)?;
    let mut spec = Spectrum::of(f, dft);
    let s = spec.signs(v)?;
    for (z, &si) in spec.data.iter_mut().zip(&s) {
        if si != 0 {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    dft.transform(&mut spec.data, &f.shape, Direction::Inverse);
    let scale = 1.0 / spec.data.len() as f64;
    f.with_values(spec.data.iter().map(|c| c.re * scale).collect())
}

/// Frequencies on some hyperplane `⟨v,1⟩^⊥` with `v` on the segment `[v₁, v₂]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyWedge {
    pub v1: Vec<Rational>,
    pub v2: Vec<Rational>,
}

fn lifted_dot(xi: &[Rational], v: &[Rational]) -> Rational {
    let n = v.len();
    let mut acc = xi[n].clone();
    for (a, b) in xi[..n].iter().zip(v) {
        acc += a * b;
    }
    acc
}

impl FrequencyWedge {
    pub fn new(v1: Vec<Rational>, v2: Vec<Rational>) -> Result<Self> {
        if v1.len() != v2.len() {
            return Err(Error::DimMismatch { expected: v1.len(), found: v2.len() });
        }
        Ok(FrequencyWedge { v1, v2 })
    }

    /// Membership from the two endpoint signs.
    pub fn contains(&self, xi: &[Rational]) -> bool {
        let a = crate::rational::sign(&lifted_dot(xi, &self.v1));
        let b = crate::rational::sign(&lifted_dot(xi, &self.v2));
        a != b || a == 0
    }

    /// Membership by solving `ξ·⟨(1−t)v₁ + t v₂, 1⟩ = 0` for `t ∈ [0, 1]`.
    pub fn contains_by_segment(&self, xi: &[Rational]) -> bool {
        let a = lifted_dot(xi, &self.v1);
        let b = lifted_dot(xi, &self.v2);
        if a == b {
            return a.is_zero();
        }
        let t = &a / (&a - &b);
        !t.is_negative() && t <= Rational::from_integer(1.into())
    }
}

/// Energy of `ĝ` outside the wedge of `[v₁, v₂]`, where `g = H_{v₁}f − H_{v₂}f`
/// is formed in physical space and transformed back.
pub fn wedge_energy_outside(f: &SampledField, v1: &[Rational], v2: &[Rational], dft: &dyn Dft) -> Result<f64> {
    let g1 = apply_hv(f, v1, dft)?;
    let g2 = apply_hv(f, v2, dft)?;
    let diff: Vec<f64> = g1.values().iter().zip(g2.values()).map(|(a, b)| a - b).collect();
    let g = f.with_values(diff)?;
    let spec = Spectrum::of(&g, dft);
    let s1 = spec.signs(v1)?;
    let s2 = spec.signs(v2)?;
    let mut outside = 0.0;
    for ((z, &a), &b) in spec.data.iter().zip(&s1).zip(&s2) {
        let inside = a != b || a == 0;
        if !inside {
            outside += z.norm_sqr();
        }
    }
    // Parseval: Σ|g|² = Σ|ĝ|² / N.
    Ok(outside * f.cell_volume() / f.len() as f64)
}

/// Integer grid shift of axis `j` per step along the last axis, and the
/// constant offset coming from the origin of the last axis.
fn shear_steps(f: &SampledField, w: &[Rational]) -> Result<Vec<(i64, i64)>> {
    let n = f.dim() - 1;
    if w.len() != n {
        return Err(Error::DimMismatch { expected: n, found: w.len() });
    }
    let h_last = from_f64(f.spacing(n))?;
    let o_last = from_f64(f.origin[n])?;
    let l_last = from_f64(f.box_len[n])?;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let h = from_f64(f.spacing(j))?;
        let l = from_f64(f.box_len[j])?;
        let step = &w[j] * &h_last / &h;
        let off = &w[j] * &o_last / &h;
        let wrap = &w[j] * &l_last / &l;
        if !(step.is_integer() && off.is_integer() && wrap.is_integer()) {
            return Err(Error::NonIntegerShear(format!(
                "axis {j}: w = {} does not move grid points to grid points",
                w[j]
            )));
        }
        let to_i64 = |q: &Rational| {
            q.to_integer()
                .to_i64()
                .ok_or_else(|| Error::Overflow("shear shift does not fit i64".into()))
        };
        out.push((to_i64(&step)?, to_i64(&off)?));
    }
    Ok(out)
}

/// `g(y′, y_last) = f(y′ + w·y_last, y_last)` on the periodic grid.
pub fn shear_transport(f: &SampledField, w: &[Rational]) -> Result<SampledField> {
    let steps = shear_steps(f, w)?;
    let n = f.dim() - 1;
    let n_last = f.shape[n];
    let inner: usize = f.shape[..n].iter().product();
    let mut out = vec![0.0; f.len()];
    let mut idx = vec![0usize; n];
    for p in 0..inner {
        let mut q = p;
        for k in (0..n).rev() {
            idx[k] = q % f.shape[k];
            q /= f.shape[k];
        }
        for il in 0..n_last {
            let mut src = 0usize;
            for k in 0..n {
                let (step, off) = steps[k];
                let m = f.shape[k] as i64;
                let s = (idx[k] as i64 + off + step * il as i64).rem_euclid(m);
                src = src * f.shape[k] + s as usize;
            }
            out[p * n_last + il] = f.values[src * n_last + il];
        }
    }
    f.with_values(out)
}

/// `χ ⊗ f` laid out with the axes of `χ` between the first `n` axes of `f`
/// and its last axis.
pub fn tensor_insert(f: &SampledField, chi: &SampledField) -> Result<SampledField> {
    let n = f.dim() - 1;
    let mut shape = f.shape[..n].to_vec();
    shape.extend_from_slice(&chi.shape);
    shape.push(f.shape[n]);
    let mut box_len = f.box_len[..n].to_vec();
    box_len.extend_from_slice(&chi.box_len);
    box_len.push(f.box_len[n]);
    let mut origin = f.origin[..n].to_vec();
    origin.extend_from_slice(&chi.origin);
    origin.push(f.origin[n]);
    let n_last = f.shape[n];
    let inner: usize = f.shape[..n].iter().product();
    let mut values = Vec::with_capacity(inner * chi.len() * n_last);
    for p in 0..inner {
        for c in chi.values() {
            for il in 0..n_last {
                values.push(c * f.values[p * n_last + il]);
            }
        }
    }
    SampledField::new(shape, box_len, origin, values)
}

/// Applies `H_{(v,w)}` to the separable extension of `f_core` by `chi` and
/// checks the result against `χ ⊗ H_v f_core`. For nonzero `w` the
/// extension is sheared first so that the identity still holds exactly.
pub fn slice_apply(
    f_core: &SampledField,
    chi: &SampledField,
    v: &[Rational],
    w: &[Rational],
    dft: &dyn Dft,
) -> Result<SampledField> {
    check_direction(f_core, v)?;
    if w.len() != chi.dim() {
        return Err(Error::DimMismatch { expected: chi.dim(), found: w.len() });
    }
    let nrm = chi.norm_sq();
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!("slice profile must have unit norm, found {}", libm::sqrt(nrm))));
    }
    let ext = tensor_insert(f_core, chi)?;
    let expected = tensor_insert(&apply_hv(f_core, v, dft)?, chi)?;
    let mut dir = v.to_vec();
    dir.extend_from_slice(w);
    let (got, expected) = if w.iter().all(Zero::is_zero) {
        (apply_hv(&ext, &dir, dft)?, expected)
    } else {
        let n = f_core.dim() - 1;
        let mut shift = vec![Rational::zero(); n];
        shift.extend(w.iter().map(|x| -x));
        let sheared = shear_transport(&ext, &shift)?;
        (apply_hv(&sheared, &dir, dft)?, shear_transport(&expected, &shift)?)
    };
    let scale = expected.max_abs().max(1.0);
    let err = got
        .values()
        .iter()
        .zip(expected.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if err > 1e-10 * scale {
        return Err(Error::Infeasible(format!("separable identity off by {err}")));
    }
    Ok(got)
}
