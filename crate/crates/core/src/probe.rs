//! Test functions, regions and Rayleigh-quotient probes for lower bounds.
//!
//! The sharpness field is `f(y) = 1_ℛ(y) / (N₂/N₁ + y₁ + y_{n+1})` with
//! `ℛ = [0,5] × [0,2]^{n−1} × [0,1]`. For `n = 1` there is no `N₂`; it is
//! taken to be 1.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::{FromPrimitive, Num};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::directions::{product, uniform, DirectionSet};
use crate::error::{Error, Result};
use crate::rational::{to_f64, Rational};
use crate::spectral::{freq_index, Dft, Direction, SampledField, Spectrum};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharpnessSpec {
    sizes: Vec<u64>,
}

impl SharpnessSpec {
    /// `sizes = [N₁, …, Nₙ]`, nonincreasing and at least 1.
    pub fn new(sizes: Vec<u64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Empty("sharpness sizes"));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::invalid("sharpness sizes must be at least 1"));
        }
        if sizes.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!("sharpness sizes {sizes:?} are not nonincreasing")));
        }
        Ok(SharpnessSpec { sizes })
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn n1(&self) -> u64 {
        self.sizes[0]
    }

    pub fn n2(&self) -> u64 {
        self.sizes.get(1).copied().unwrap_or(1)
    }

    pub fn total(&self) -> u64 {
        self.sizes.iter().product()
    }

    /// `N₂/N₁`.
    pub fn ratio(&self) -> f64 {
        self.n2() as f64 / self.n1() as f64
    }

    /// `∏ U_{N_k}`.
    pub fn omega(&self) -> Result<DirectionSet> {
        let factors = self.sizes.iter().map(|&m| uniform(m)).collect::<Result<Vec<_>>>()?;
        let label = self.sizes.iter().map(|m| format!("U{m}")).collect::<Vec<_>>().join("x");
        Ok(product(&factors)?.with_label(label))
    }

    /// Upper faces of ℛ: 5 on the first axis, 2 on the middle ones, 1 on the last.
    pub fn rect_hi(&self) -> Vec<f64> {
        let n = self.n();
        (0..=n).map(|k| if k == n { 1.0 } else if k == 0 { 5.0 } else { 2.0 }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Wv,
    Xv,
    Sv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub v: Vec<Rational>,
    pub spec: SharpnessSpec,
}

impl RegionSpec {
    pub fn new(kind: RegionKind, v: Vec<Rational>, spec: SharpnessSpec) -> Result<Self> {
        if v.len() != spec.n() {
            return Err(Error::DimMismatch { expected: spec.n(), found: v.len() });
        }
        Ok(RegionSpec { kind, v, spec })
    }
}

/// Membership in terms of `s = −x_{n+1}` and `z_k = x_k − v_k x_{n+1}`:
/// - W: `2N₂ < s < 4N₁`, `0 < z_k < s/N_k`;
/// - X: W and `z_k < a_k − v_k` with `a₁ = 5`, `a_k = 2`;
/// - S: `2N₂ < s < 4N₁`, `N₂/N₁ < z₁ < s/N₁`, `0 < z_k < 2 − v_k` for `k ≥ 2`.
fn member<T>(x: &[T], v: &[T], sizes: &[u64], kind: RegionKind) -> bool
where
    T: Clone + PartialOrd + Num + FromPrimitive,
{
    let n = sizes.len();
    let c = |m: u64| T::from_u64(m).expect("small integers convert");
    let n1 = c(sizes[0]);
    let n2 = c(sizes.get(1).copied().unwrap_or(1));
    let s = T::zero() - x[n].clone();
    let two = c(2);
    if !(s > two.clone() * n2.clone() && s < c(4) * n1.clone()) {
        return false;
    }
    for k in 0..n {
        let z = x[k].clone() - v[k].clone() * x[n].clone();
        let nk = c(sizes[k]);
        let a = if k == 0 { c(5) } else { two.clone() };
        let ok = match kind {
            RegionKind::Wv => z > T::zero() && z < s.clone() / nk,
            RegionKind::Xv => {
                z > T::zero() && z.clone() < s.clone() / nk && z < a - v[k].clone()
            }
            RegionKind::Sv => {
                if k == 0 {
                    z > n2.clone() / n1.clone() && z < s.clone() / n1.clone()
                } else {
                    z > T::zero() && z < two.clone() - v[k].clone()
                }
            }
        };
        if !ok {
            return false;
        }
    }
    true
}

fn check_point(x_len: usize, region: &RegionSpec) -> Result<()> {
    if x_len != region.spec.n() + 1 {
        return Err(Error::DimMismatch { expected: region.spec.n() + 1, found: x_len });
    }
    Ok(())
}

/// Floating-point membership test.
pub fn region_membership(x: &[f64], region: &RegionSpec) -> Result<bool> {
    check_point(x.len(), region)?;
    let v: Vec<f64> = region.v.iter().map(to_f64).collect();
    Ok(member(x, &v, region.spec.sizes(), region.kind))
}

/// Exact membership test.
pub fn region_membership_exact(x: &[Rational], region: &RegionSpec) -> Result<bool> {
    check_point(x.len(), region)?;
    Ok(member(x, &region.v, region.spec.sizes(), region.kind))
}

/// Smallest axis-parallel box holding ℛ and every `S_v`, `v ∈ ∏U_{N_k}`:
/// `[−4N₁, 5] × [−4N₁, 2]^{n−1} × [−4N₁, 1]`.
pub fn required_box(spec: &SharpnessSpec) -> (Vec<f64>, Vec<f64>) {
    let lo = vec![-4.0 * spec.n1() as f64; spec.n() + 1];
    (lo, spec.rect_hi())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGrid {
    pub shape: Vec<usize>,
    pub box_len: Vec<f64>,
    pub origin: Vec<f64>,
}

/// Per axis the box is `padding · 2^⌈log₂ span⌉`, centred on the required
/// region; see [`probe_grid_with_box`] for the placement.
pub fn default_probe_grid(spec: &SharpnessSpec, shape: &[usize], padding: f64) -> Result<ProbeGrid> {
    if !(padding.is_finite() && padding >= 1.0) {
        return Err(Error::invalid("padding must be at least 1"));
    }
    let (lo, hi) = required_box(spec);
    let box_len: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| padding * libm::exp2(libm::ceil(libm::log2(h - l))))
        .collect();
    probe_grid_with_box(spec, shape, &box_len)
}

/// Places a box of the given lengths around the required region. The origin
/// is moved by less than one cell so that integer coordinates fall halfway
/// between samples; with spacing at most 1 the faces of ℛ never carry a
/// sample and the Riemann sum is a midpoint rule on ℛ.
pub fn probe_grid_with_box(spec: &SharpnessSpec, shape: &[usize], box_len: &[f64]) -> Result<ProbeGrid> {
    if shape.len() != spec.n() + 1 {
        return Err(Error::DimMismatch { expected: spec.n() + 1, found: shape.len() });
    }
    if box_len.len() != shape.len() {
        return Err(Error::DimMismatch { expected: shape.len(), found: box_len.len() });
    }
    let (lo, hi) = required_box(spec);
    let mut origin = Vec::with_capacity(shape.len());
    for k in 0..shape.len() {
        let l = box_len[k];
        if !(l.is_finite() && l > 0.0) || shape[k] == 0 {
            return Err(Error::invalid("box lengths and sample counts must be positive"));
        }
        let h = l / shape[k] as f64;
        let centred = 0.5 * (lo[k] + hi[k]) - 0.5 * l;
        let mut o = (libm::floor(centred / h) + 0.5) * h;
        // Shifting must not uncover the required region.
        if o > lo[k] {
            o -= h;
        }
        if o > lo[k] || o + l < hi[k] {
            return Err(Error::BoxTooSmall { lo, hi });
        }
        origin.push(o);
    }
    Ok(ProbeGrid { shape: shape.to_vec(), box_len: box_len.to_vec(), origin })
}

/// Samples the sharpness test function. The sampled torus must contain the
/// required box.
pub fn build_sharpness_field(spec: &SharpnessSpec, grid: &ProbeGrid) -> Result<SampledField> {
    let (lo, hi) = required_box(spec);
    if grid.shape.len() != lo.len() {
        return Err(Error::DimMismatch { expected: lo.len(), found: grid.shape.len() });
    }
    let fits = (0..lo.len()).all(|k| grid.origin[k] <= lo[k] && grid.origin[k] + grid.box_len[k] >= hi[k]);
    if !fits {
        return Err(Error::BoxTooSmall { lo, hi });
    }
    let rect = spec.rect_hi();
    let a = spec.ratio();
    let n = spec.n();
    SampledField::from_fn(grid.shape.clone(), grid.box_len.clone(), grid.origin.clone(), |y| {
        if y.iter().zip(&rect).all(|(&t, &r)| (0.0..=r).contains(&t)) {
            1.0 / (a + y[0] + y[n])
        } else {
            0.0
        }
    })
}

/// `‖f‖₂² = 2^{n−1}(ln(1 + N₁/N₂) − ln((a + 6)/(a + 5)))`, `a = N₂/N₁`.
pub fn f_norm_exact(spec: &SharpnessSpec) -> f64 {
    let a = spec.ratio();
    let scale = libm::exp2((spec.n() as f64) - 1.0);
    scale * (libm::log1p(1.0 / a) - libm::log((a + 6.0) / (a + 5.0)))
}

/// `[2^{n−2} ln(1 + N₁/N₂), 2^{n−1} ln(1 + N₁/N₂)]`.
pub fn f_norm_sandwich(spec: &SharpnessSpec) -> (f64, f64) {
    let l = libm::log1p(1.0 / spec.ratio());
    let half = libm::exp2(spec.n() as f64 - 2.0);
    (half * l, 2.0 * half * l)
}

fn uniform_open(rng: &mut impl Rng, lo: &Rational, hi: &Rational, resolution: u64) -> Rational {
    let k: u64 = rng.gen_range(1..resolution);
    lo + (hi - lo) * Rational::new(k.into(), resolution.into())
}

/// A uniformly drawn rational point of `S_v` with denominators bounded by
/// `resolution` in the parameter coordinates.
pub fn random_sv_point(spec: &SharpnessSpec, v: &[Rational], rng: &mut impl Rng, resolution: u64) -> Result<Vec<Rational>> {
    if v.len() != spec.n() {
        return Err(Error::DimMismatch { expected: spec.n(), found: v.len() });
    }
    if resolution < 2 {
        return Err(Error::invalid("resolution must be at least 2"));
    }
    let q = |m: u64| Rational::from_integer(m.into());
    let n = spec.n();
    let n1 = q(spec.n1());
    let n2 = q(spec.n2());
    let lo_s = &n2 * q(2);
    let hi_s = &n1 * q(4);
    let s = uniform_open(rng, &lo_s, &hi_s, resolution);
    let floor1 = &n2 / &n1;
    let top1 = &s / &n1;
    if top1 <= floor1 {
        return Err(Error::Infeasible("drawn height leaves an empty first band".into()));
    }
    let mut x = Vec::with_capacity(n + 1);
    let z1 = uniform_open(rng, &floor1, &top1, resolution);
    let xn = -s;
    x.push(&z1 + &v[0] * &xn);
    for vk in &v[1..] {
        let z = uniform_open(rng, &q(0), &(q(2) - vk), resolution);
        x.push(z + vk * &xn);
    }
    x.push(xn);
    Ok(x)
}

/// Draws `samples` points from `S_v` and from `S_{v′}` and reports whether
/// none of them lies in the other region. Points are drawn where `S_v` is
/// nonempty at the drawn height; heights with an empty band are redrawn.
pub fn sv_disjointness_check(spec: &SharpnessSpec, v: &[Rational], w: &[Rational], samples: usize, seed: u64) -> Result<bool> {
    if v == w {
        return Err(Error::invalid("disjointness needs two different directions"));
    }
    let rv = RegionSpec::new(RegionKind::Sv, v.to_vec(), spec.clone())?;
    let rw = RegionSpec::new(RegionKind::Sv, w.to_vec(), spec.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = 0;
    while drawn < samples {
        for (own, other) in [(&rv, &rw), (&rw, &rv)] {
            let x = match random_sv_point(spec, &own.v, &mut rng, 1 << 20) {
                Ok(x) => x,
                Err(Error::Infeasible(_)) => continue,
                Err(e) => return Err(e),
            };
            debug_assert!(region_membership_exact(&x, own)?);
            if region_membership_exact(&x, other)? {
                return Ok(false);
            }
        }
        drawn += 1;
    }
    Ok(true)
}

/// Open ℛ.
fn in_open_rect(y: &[Rational], spec: &SharpnessSpec) -> bool {
    let n = spec.n();
    let zero = Rational::from_integer(0.into());
    y.iter().enumerate().all(|(k, t)| {
        let top = if k == n { 1 } else if k == 0 { 5 } else { 2 };
        *t > zero && *t < Rational::from_integer(top.into())
    })
}

/// `(t, x + ⟨v,1⟩t ∈ ℛ°)` on an even scan of `[−x_{n+1} − 1, −x_{n+1} + 2]`
/// with `steps` subdivisions per unit.
pub fn hit_set_scan(x: &[Rational], v: &[Rational], spec: &SharpnessSpec, steps: u64) -> Result<Vec<(Rational, bool)>> {
    let n = spec.n();
    if x.len() != n + 1 || v.len() != n {
        return Err(Error::DimMismatch { expected: n + 1, found: x.len() });
    }
    if steps == 0 {
        return Err(Error::invalid("scan needs at least one step per unit"));
    }
    let base = -x[n].clone() - Rational::from_integer(1.into());
    let step = Rational::new(1.into(), steps.into());
    let mut out = Vec::with_capacity(3 * steps as usize + 1);
    for i in 0..=3 * steps {
        let t = &base + &step * Rational::from_integer(i.into());
        let y: Vec<Rational> = (0..=n)
            .map(|k| if k == n { &x[n] + &t } else { &x[k] + &v[k] * &t })
            .collect();
        out.push((t.clone(), in_open_rect(&y, spec)));
    }
    Ok(out)
}

/// For `x ∈ X_v`, checks that the scanned hit set equals
/// `I₀ = {t : 0 < x_{n+1} + t < 1}` sample by sample.
pub fn interval_hit_check(x: &[Rational], v: &[Rational], spec: &SharpnessSpec, steps: u64) -> Result<bool> {
    let region = RegionSpec::new(RegionKind::Xv, v.to_vec(), spec.clone())?;
    if !region_membership_exact(x, &region)? {
        return Err(Error::invalid("point is not in X_v"));
    }
    let n = spec.n();
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    Ok(hit_set_scan(x, v, spec, steps)?.into_iter().all(|(t, hit)| {
        let h = &x[n] + &t;
        hit == (h > zero && h < one)
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvEnergy {
    /// `∫_{S_v} |H_v f|²` by grid quadrature.
    pub energy: f64,
    /// `energy · N₁ / ln(N₁/N₂ + 1)³`.
    pub c_hat: f64,
    /// Minimum over grid points of `S_v` of `|H_v f(x)| · |x_{n+1}| / ln(4N₁/|x_{n+1}|)`.
    pub c_prime_min: f64,
    pub points: usize,
}

/// Grid indices lying in `S_v`.
pub fn sv_grid_points(spec: &SharpnessSpec, v: &[Rational], f: &SampledField) -> Result<Vec<usize>> {
    let region = RegionSpec::new(RegionKind::Sv, v.to_vec(), spec.clone())?;
    check_point(f.dim(), &region)?;
    let vf: Vec<f64> = v.iter().map(to_f64).collect();
    let mut x = vec![0.0; f.dim()];
    let mut out = Vec::new();
    for i in 0..f.len() {
        f.coords_into(i, &mut x);
        if member(&x, &vf, spec.sizes(), RegionKind::Sv) {
            out.push(i);
        }
    }
    Ok(out)
}

pub fn sv_restricted_energy(spec: &SharpnessSpec, v: &[Rational], f: &SampledField, dft: &dyn Dft) -> Result<SvEnergy> {
    let idx = sv_grid_points(spec, v, f)?;
    if idx.is_empty() {
        return Err(Error::BoxTooSmall { lo: required_box(spec).0, hi: required_box(spec).1 });
    }
    let h = crate::spectral::apply_hv(f, v, dft)?;
    Ok(sv_energy_from(spec, &idx, &h))
}

/// Energy statistics of a precomputed `H_v f` over the given grid indices.
pub fn sv_energy_from(spec: &SharpnessSpec, idx: &[usize], hv: &SampledField) -> SvEnergy {
    let n = spec.n();
    let vol = hv.cell_volume();
    let four_n1 = 4.0 * spec.n1() as f64;
    let mut energy = 0.0;
    let mut c_prime = f64::INFINITY;
    let mut x = vec![0.0; hv.dim()];
    for &i in idx {
        let val = hv.values()[i];
        energy += val * val * vol;
        hv.coords_into(i, &mut x);
        let s = -x[n];
        let c = libm::fabs(val) * s / libm::log(four_n1 / s);
        if c < c_prime {
            c_prime = c;
        }
    }
    let l = libm::log1p(1.0 / spec.ratio());
    SvEnergy { energy, c_hat: energy * spec.n1() as f64 / (l * l * l), c_prime_min: c_prime, points: idx.len() }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    let w: f64 = rng.gen::<f64>();
    libm::sqrt(-2.0 * libm::log(u)) * libm::cos(2.0 * core::f64::consts::PI * w)
}

/// White noise restricted to frequencies with `|k_j| ≤ cutoff · n_j / 2` on
/// every axis, scaled to unit norm.
pub fn band_limited_noise(grid: &ProbeGrid, cutoff: f64, seed: u64, dft: &dyn Dft) -> Result<SampledField> {
    if !(cutoff > 0.0 && cutoff <= 1.0) {
        return Err(Error::invalid("cutoff must lie in (0, 1]"));
    }
    let total: usize = grid.shape.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z: Vec<Complex64> = (0..total).map(|_| Complex64::new(gaussian(&mut rng), 0.0)).collect();
    dft.transform(&mut z, &grid.shape, Direction::Forward);
    let limits: Vec<i64> = grid.shape.iter().map(|&n| libm::floor(cutoff * n as f64 / 2.0) as i64).collect();
    let mut idx = vec![0usize; grid.shape.len()];
    for c in z.iter_mut() {
        let keep = idx.iter().zip(&grid.shape).zip(&limits).all(|((&i, &n), &lim)| {
            // Nyquist is dropped so the mask stays symmetric.
            2 * i != n && freq_index(i, n).abs() <= lim
        });
        if !keep {
            *c = Complex64::new(0.0, 0.0);
        }
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < grid.shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    dft.transform(&mut z, &grid.shape, Direction::Inverse);
    let vals: Vec<f64> = z.iter().map(|c| c.re).collect();
    let field = SampledField::new(grid.shape.clone(), grid.box_len.clone(), grid.origin.clone(), vals)?;
    let nrm = field.norm();
    if nrm == 0.0 {
        return Err(Error::invalid("noise vanished; raise the cutoff"));
    }
    let scaled = field.values().iter().map(|v| v / nrm).collect();
    field.with_values(scaled)
}

/// `‖H_Ω f‖₂ / ‖f‖₂`.
pub fn rayleigh(f: &SampledField, omega: &DirectionSet, dft: &dyn Dft) -> Result<f64> {
    let nf = f.norm();
    if nf == 0.0 {
        return Err(Error::invalid("probe has zero norm"));
    }
    let m = crate::spectral::apply_maximal(f, omega, dft)?;
    Ok(m.norm() / nf)
}

/// Pointwise maximiser of `|H_v f|`: per sample the direction index and the
/// signed value `H_v f(x)` attaining the maximum (first index on ties).
pub struct Argmax {
    pub index: Vec<u32>,
    pub value: Vec<f64>,
}

pub fn maximal_argmax(spec: &Spectrum, omega: &DirectionSet, dft: &dyn Dft) -> Result<Argmax> {
    let f = spec.field();
    if omega.is_empty() {
        return Err(Error::Empty("direction set is empty"));
    }
    if omega.dim() + 1 != f.dim() {
        return Err(Error::DimMismatch { expected: f.dim() - 1, found: omega.dim() });
    }
    let len = f.len();
    let mut best = vec![-1.0f64; len];
    let mut out = Argmax { index: vec![0; len], value: vec![0.0; len] };
    let mut fold = |j: usize, g: &[f64]| {
        for i in 0..len {
            let a = libm::fabs(g[i]);
            if a > best[i] {
                best[i] = a;
                out.index[i] = j as u32;
                out.value[i] = g[i];
            }
        }
    };
    for (p, pair) in omega.points().chunks(2).enumerate() {
        let s1 = spec.signs(&pair[0])?;
        let s2 = pair.get(1).map(|v| spec.signs(v)).transpose()?;
        let (g1, g2) = spec.hv_pair(&s1, s2.as_deref(), dft);
        fold(2 * p, &g1);
        if let Some(g2) = g2 {
            fold(2 * p + 1, &g2);
        }
    }
    Ok(out)
}

/// Index of `−ξ` for every grid frequency.
fn negated_indices(shape: &[usize]) -> Vec<usize> {
    let total: usize = shape.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; shape.len()];
    for _ in 0..total {
        let mut lin = 0;
        for (k, &n) in shape.iter().enumerate() {
            lin = lin * n + (n - idx[k]) % n;
        }
        out.push(lin);
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// One step of power iteration on the linearised maximal operator
/// `T g(x) = H_{v(x)} g(x)`, where `v(x)` maximises `|H_v f(x)|`. Returns
/// `T*T f` normalised, or `None` when it vanishes.
pub fn refine_step(f: &SampledField, omega: &DirectionSet, dft: &dyn Dft) -> Result<Option<SampledField>> {
    let spec = Spectrum::of(f, dft);
    let am = maximal_argmax(&spec, omega, dft)?;
    let shape = f.shape();
    let len = f.len();
    let neg = negated_indices(shape);
    let mut acc = vec![Complex64::new(0.0, 0.0); len];
    let mut z = vec![Complex64::new(0.0, 0.0); len];
    // T*g = Σ_v H_v*(1_{A_v} g) and H_v* = −H_v, i.e. multiplier +i·sgn.
    for (p, pair) in omega.points().chunks(2).enumerate() {
        let (j1, j2) = (2 * p as u32, 2 * p as u32 + 1);
        for i in 0..len {
            let g = am.value[i];
            z[i] = Complex64::new(
                if am.index[i] == j1 { g } else { 0.0 },
                if am.index[i] == j2 { g } else { 0.0 },
            );
        }
        dft.transform(&mut z, shape, Direction::Forward);
        let s1 = spec.signs(&pair[0])?;
        let s2 = pair.get(1).map(|v| spec.signs(v)).transpose()?;
        for i in 0..len {
            let zc = z[neg[i]].conj();
            let a = (z[i] + zc) * 0.5;
            let b = (z[i] - zc) * Complex64::new(0.0, -0.5);
            let mut t = a * Complex64::new(0.0, s1[i] as f64);
            if let Some(s2) = &s2 {
                t += b * Complex64::new(0.0, s2[i] as f64);
            }
            acc[i] += t;
        }
    }
    dft.transform(&mut acc, shape, Direction::Inverse);
    let vals: Vec<f64> = acc.iter().map(|c| c.re / len as f64).collect();
    let g = f.with_values(vals)?;
    let nrm = g.norm();
    if nrm == 0.0 {
        return Ok(None);
    }
    let scaled = g.values().iter().map(|v| v / nrm).collect();
    Ok(Some(g.with_values(scaled)?))
}

/// Runs `iterations` refinement steps. Every step can only raise the
/// Rayleigh quotient; a step that lowers it (rounding) is discarded and the
/// iteration stops.
pub fn refine_probe(f: &SampledField, omega: &DirectionSet, iterations: usize, dft: &dyn Dft) -> Result<(SampledField, Vec<f64>)> {
    let mut cur = f.clone();
    let mut trace = vec![rayleigh(&cur, omega, dft)?];
    for _ in 0..iterations {
        let Some(next) = refine_step(&cur, omega, dft)? else { break };
        let r = rayleigh(&next, omega, dft)?;
        if r < *trace.last().expect("trace starts nonempty") {
            break;
        }
        trace.push(r);
        cur = next;
    }
    Ok((cur, trace))
}

pub struct NamedProbe {
    pub name: String,
    pub field: SampledField,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub name: String,
    pub rayleigh: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionEnergy {
    pub v: Vec<Rational>,
    pub energy: SvEnergy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub omega_label: String,
    pub grid: ProbeGrid,
    pub probes: Vec<ProbeResult>,
    pub max_rayleigh: f64,
    pub regions: Option<Vec<RegionEnergy>>,
}

/// Rayleigh quotients of every probe; all probes must share one grid.
pub fn estimate_lower_bound(omega: &DirectionSet, probes: &[NamedProbe], dft: &dyn Dft) -> Result<ProbeReport> {
    let first = probes.first().ok_or(Error::Empty("probe list"))?;
    let mut results = Vec::with_capacity(probes.len());
    for p in probes {
        if !p.field.same_grid(&first.field) {
            return Err(Error::invalid(format!("probe {} is on a different grid", p.name)));
        }
        let r = rayleigh(&p.field, omega, dft)?;
        results.push(ProbeResult { name: p.name.clone(), rayleigh: r, seed: p.seed });
    }
    Ok(report_from(omega, &first.field, results))
}

/// Assembles a report from per-probe results in the given order.
pub fn report_from(omega: &DirectionSet, grid_of: &SampledField, probes: Vec<ProbeResult>) -> ProbeReport {
    let max_rayleigh = probes.iter().map(|p| p.rayleigh).fold(0.0, f64::max);
    ProbeReport {
        omega_label: omega.label().into(),
        grid: ProbeGrid {
            shape: grid_of.shape().to_vec(),
            box_len: grid_of.box_len().to_vec(),
            origin: grid_of.origin().to_vec(),
        },
        probes,
        max_rayleigh,
        regions: None,
    }
}
