//! Direction sets: finite point sets Ω ⊂ ℝⁿ with exact rational coordinates.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, rat, to_f64, Rational};

/// Largest value accepted for schedule entries and other machine integers.
pub const INTEGER_CAP: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionSet {
    dim: usize,
    points: Vec<Vec<Rational>>,
    label: String,
    merged: usize,
}

impl DirectionSet {
    /// Builds a set, rejecting duplicates and points of the wrong dimension.
    pub fn new(dim: usize, points: Vec<Vec<Rational>>, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        let mut seen = BTreeSet::new();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimMismatch { expected: dim, found: p.len() });
            }
            if !seen.insert(p) {
                return Err(Error::DuplicatePoint(i));
            }
        }
        Ok(DirectionSet { dim, points, label: label.into(), merged: 0 })
    }

    /// Builds a set from a point list that may repeat points. Later copies
    /// are dropped and counted in [`merged_duplicates`](Self::merged_duplicates).
    pub fn from_points_merging(
        dim: usize,
        points: Vec<Vec<Rational>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        let mut seen = BTreeSet::new();
        let mut kept = Vec::with_capacity(points.len());
        let mut merged = 0;
        for p in points {
            if p.len() != dim {
                return Err(Error::DimMismatch { expected: dim, found: p.len() });
            }
            if seen.contains(&p) {
                merged += 1;
            } else {
                seen.insert(p.clone());
                kept.push(p);
            }
        }
        Ok(DirectionSet { dim, points: kept, label: label.into(), merged })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<Rational>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[Rational] {
        &self.points[i]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn merged_duplicates(&self) -> usize {
        self.merged
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        self.points.iter().any(|q| q.as_slice() == p)
    }

    pub fn is_subset_of(&self, other: &DirectionSet) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let theirs: BTreeSet<&Vec<Rational>> = other.points.iter().collect();
        self.points.iter().all(|p| theirs.contains(p))
    }

    /// Same points in a different order compare equal here.
    pub fn same_points(&self, other: &DirectionSet) -> bool {
        self.len() == other.len() && self.is_subset_of(other)
    }

    pub fn to_f64_points(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.iter().map(to_f64).collect()).collect()
    }

    /// Restricts to the listed indices, in the given order.
    pub fn subset(&self, indices: &[usize], label: impl Into<String>) -> Result<DirectionSet> {
        let pts = indices
            .iter()
            .map(|&i| {
                self.points
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        DirectionSet::new(self.dim, pts, label)
    }

    /// Distinct coordinate values along `axis`, sorted ascending.
    pub fn axis_values(&self, axis: usize) -> Vec<Rational> {
        let set: BTreeSet<&Rational> = self.points.iter().map(|p| &p[axis]).collect();
        set.into_iter().cloned().collect()
    }

    /// Axis factors when the set is a full Cartesian product of them.
    pub fn product_factors(&self) -> Option<Vec<Vec<Rational>>> {
        let factors: Vec<Vec<Rational>> = (0..self.dim).map(|k| self.axis_values(k)).collect();
        let total = factors.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.len()))?;
        (total == self.len()).then_some(factors)
    }
}

/// `{j/M : 1 ≤ j ≤ M}`.
pub fn uniform(m: u64) -> Result<DirectionSet> {
    if m == 0 {
        return Err(Error::invalid("uniform set needs M >= 1"));
    }
    let pts = (1..=m)
        .map(|j| vec![Rational::new(BigInt::from(j), BigInt::from(m))])
        .collect();
    DirectionSet::new(1, pts, format!("uniform(M={m})"))
}

/// Cartesian product of one-dimensional factors, first factor varying slowest.
pub fn product(factors: &[DirectionSet]) -> Result<DirectionSet> {
    if factors.is_empty() {
        return Err(Error::Empty("product needs at least one factor"));
    }
    for f in factors {
        if f.dim() != 1 {
            return Err(Error::DimMismatch { expected: 1, found: f.dim() });
        }
    }
    let mut pts: Vec<Vec<Rational>> = vec![Vec::new()];
    for f in factors {
        let mut next = Vec::with_capacity(pts.len() * f.len());
        for p in &pts {
            for q in f.points() {
                let mut r = p.clone();
                r.push(q[0].clone());
                next.push(r);
            }
        }
        pts = next;
    }
    let label = factors
        .iter()
        .map(|f| f.label())
        .collect::<Vec<_>>()
        .join(" x ");
    DirectionSet::new(factors.len(), pts, label)
}

/// `⋃_{j=1..R} (2^{-j} + 2^{-j} U_M)`, blocks listed from j = 1 upwards.
pub fn lacunary_uniform(r: u64, m: u64) -> Result<DirectionSet> {
    if r == 0 || m == 0 {
        return Err(Error::invalid("lacunary set needs R, M >= 1"));
    }
    let mut pts = Vec::new();
    let mut scale = rat(1, 2);
    for _ in 1..=r {
        for i in 1..=m {
            let v = &scale + &scale * Rational::new(BigInt::from(i), BigInt::from(m));
            pts.push(vec![v]);
        }
        scale /= int(2);
    }
    DirectionSet::from_points_merging(1, pts, format!("lacunary(R={r},M={m})"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSchedule {
    pub alpha: f64,
    /// `(M_N, R_N)` pairs.
    pub entries: Vec<(u64, u64)>,
}

/// Checks `½(log R)^α ≤ log M ≤ (log R)^α`.
pub fn schedule_sandwich_holds(alpha: f64, m: u64, r: u64) -> bool {
    let lm = libm::log(m as f64);
    let lr = libm::log(r as f64);
    if lr < 0.0 {
        return false;
    }
    let p = libm::pow(lr, alpha);
    0.5 * p <= lm && lm <= p
}

/// Interval of admissible `log M` for a given `R`.
pub fn log_m_window(alpha: f64, r: u64) -> (f64, f64) {
    let p = libm::pow(libm::log(r as f64), alpha);
    (0.5 * p, p)
}

impl GrowthSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(0.5..=1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!("alpha {} outside [1/2, 1]", self.alpha)));
        }
        for (i, &(m, r)) in self.entries.iter().enumerate() {
            if m == 0 || r == 0 {
                return Err(Error::invalid(format!("entry {i} has a zero value")));
            }
            if !schedule_sandwich_holds(self.alpha, m, r) {
                return Err(Error::invalid(format!("entry {i} (M={m}, R={r}) breaks the log sandwich")));
            }
            if i > 0 {
                let (pm, pr) = self.entries[i - 1];
                if m <= pm || m % pm != 0 {
                    return Err(Error::invalid(format!("M at entry {i} is not a proper multiple of the previous M")));
                }
                if r <= pr {
                    return Err(Error::invalid(format!("R at entry {i} does not increase")));
                }
            }
        }
        Ok(())
    }
}

/// Greedy schedule: each `M_N` is the smallest proper multiple of `M_{N-1}`
/// admitting an `R_N > R_{N-1}`, and `R_N` is the smallest such value.
pub fn growth_schedule(alpha: f64, count: usize) -> Result<GrowthSchedule> {
    if !(0.5..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha {alpha} outside [1/2, 1]")));
    }
    let mut entries: Vec<(u64, u64)> = Vec::with_capacity(count);
    for idx in 0..count {
        let (m_prev, r_prev) = entries.last().copied().unwrap_or((1, 0));
        let mut k = 2u64;
        loop {
            let m = m_prev.checked_mul(k).filter(|&m| m <= INTEGER_CAP).ok_or_else(|| {
                Error::Overflow(format!("schedule entry {} needs M beyond 2^62", idx + 1))
            })?;
            if let Some(r) = smallest_r(alpha, m, r_prev + 1)? {
                entries.push((m, r));
                break;
            }
            k += 1;
        }
    }
    let s = GrowthSchedule { alpha, entries };
    s.validate()?;
    Ok(s)
}

fn smallest_r(alpha: f64, m: u64, r_floor: u64) -> Result<Option<u64>> {
    let lm = libm::log(m as f64);
    let lo = libm::exp(libm::pow(lm, 1.0 / alpha));
    if !(lo < INTEGER_CAP as f64) {
        return Err(Error::Overflow(format!("R for M={m} exceeds 2^62")));
    }
    let mut r = r_floor.max((lo as u64).saturating_sub(1)).max(1);
    while r <= INTEGER_CAP {
        if schedule_sandwich_holds(alpha, m, r) {
            return Ok(Some(r));
        }
        let p = libm::pow(libm::log(r as f64), alpha);
        if 0.5 * p > lm {
            return Ok(None);
        }
        r += 1;
    }
    Err(Error::Overflow(format!("R for M={m} exceeds 2^62")))
}

/// Sizes `(N₁, N₂)` of the product `U_{N₁} × U_{N₂}^{n-1}` with prescribed growth.
pub fn prescribed_sizes(n: usize, alpha: f64, beta: f64, big_n: u64) -> Result<(u64, u64)> {
    if n < 2 {
        return Err(Error::invalid("prescribed growth needs n >= 2"));
    }
    let e = (n as f64 - 1.0) / (2.0 * n as f64);
    if !(alpha > 0.0 && alpha < e) {
        return Err(Error::invalid(format!("alpha must lie in (0, {e})")));
    }
    if !(beta >= 0.0) {
        return Err(Error::invalid("beta must be nonnegative"));
    }
    if big_n < 2 {
        return Err(Error::Infeasible("N must be at least 2".into()));
    }
    let nf = big_n as f64;
    let ln = libm::log(nf);
    let lhs = libm::pow(nf, e - alpha);
    let rhs = libm::pow(4.0, e) * libm::pow(ln, beta - 1.0);
    if !(lhs > rhs) {
        return Err(Error::Infeasible(format!(
            "N-large fails: N^((n-1)/(2n) - alpha) = {lhs} is not above 4^((n-1)/(2n)) (log N)^(beta-1) = {rhs}"
        )));
    }
    let x2 = libm::pow(nf, 2.0 * alpha / (n as f64 - 1.0))
        * libm::pow(ln, 2.0 * (beta - 1.0) / (n as f64 - 1.0));
    let x1 = libm::pow(nf, 1.0 - 2.0 * alpha) * libm::pow(ln, 2.0 * (1.0 - beta));
    let n2 = smallest_in_sandwich(x2)
        .ok_or_else(|| Error::Infeasible(format!("size condition on N2 fails: target {x2} below 1/2")))?;
    let n1 = smallest_in_sandwich(x1)
        .ok_or_else(|| Error::Infeasible(format!("size condition on N1 fails: target {x1} below 1/2")))?;
    if n1 <= n2 {
        return Err(Error::Infeasible(format!("N1 = {n1} is not above N2 = {n2}")));
    }
    Ok((n1, n2))
}

/// Smallest integer `k ≥ 1` with `k/2 ≤ x ≤ 2k`.
fn smallest_in_sandwich(x: f64) -> Option<u64> {
    if !x.is_finite() || x > INTEGER_CAP as f64 {
        return None;
    }
    let k = libm::ceil(x / 2.0).max(1.0) as u64;
    ((k as f64) <= 2.0 * x).then_some(k)
}

/// `U_{N₁} × U_{N₂}^{n-1}` sized so that its norm grows like `N^α (log N)^β`.
pub fn prescribed_growth_product(n: usize, alpha: f64, beta: f64, big_n: u64) -> Result<DirectionSet> {
    let (n1, n2) = prescribed_sizes(n, alpha, beta, big_n)?;
    let mut factors = vec![uniform(n1)?];
    for _ in 1..n {
        factors.push(uniform(n2)?);
    }
    let total = n1 as f64 * libm::pow(n2 as f64, (n - 1) as f64);
    let scale = libm::pow(2.0, n as f64);
    let nf = big_n as f64;
    if total < nf / scale || total > nf * scale {
        return Err(Error::Infeasible(format!("cardinality {total} outside [N/2^n, 2^n N]")));
    }
    Ok(product(&factors)?.with_label(format!(
        "prescribed(n={n},alpha={alpha},beta={beta},N={big_n})"
    )))
}

/// A polyline through the points of a direction set, in curve order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub polyline: Vec<Vec<Rational>>,
    /// Polyline vertex index of each sample, strictly increasing.
    pub sample_vertex: Vec<usize>,
}

impl SampledCurve {
    /// The polyline that visits the points in their listed order.
    pub fn through(samples: &DirectionSet) -> SampledCurve {
        SampledCurve {
            polyline: samples.points().to_vec(),
            sample_vertex: (0..samples.len()).collect(),
        }
    }

    pub fn validate(&self, samples: &DirectionSet) -> Result<()> {
        if self.sample_vertex.len() != samples.len() {
            return Err(Error::invalid("curve sample count differs from the direction set"));
        }
        if self.sample_vertex.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("samples are not in curve order"));
        }
        for (i, &vi) in self.sample_vertex.iter().enumerate() {
            match self.polyline.get(vi) {
                Some(v) if v.as_slice() == samples.point(i) => {}
                _ => return Err(Error::invalid(format!("sample {i} is not at its polyline vertex"))),
            }
        }
        if self.polyline.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("polyline repeats a vertex"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boustrophedon {
    pub samples: DirectionSet,
    pub crossing_degree: usize,
    pub curve: SampledCurve,
}

/// `U_M × U_M` traced in horizontal rows, alternating direction, with the
/// rows extended to `x = 0` and joined by vertical connectors.
pub fn boustrophedon_curve_samples(m: u64) -> Result<Boustrophedon> {
    if m == 0 {
        return Err(Error::invalid("boustrophedon needs M >= 1"));
    }
    let mm = m as i64;
    let mut polyline: Vec<Vec<Rational>> = Vec::new();
    let mut samples = Vec::new();
    let mut sample_vertex = Vec::new();
    let mut push_sample = |p: Vec<Rational>, polyline: &mut Vec<Vec<Rational>>| {
        sample_vertex.push(polyline.len());
        samples.push(p.clone());
        polyline.push(p);
    };
    for j in 1..=mm {
        let y = rat(j, mm);
        if j % 2 == 1 {
            polyline.push(vec![Rational::zero(), y.clone()]);
            for i in 1..=mm {
                push_sample(vec![rat(i, mm), y.clone()], &mut polyline);
            }
        } else {
            for i in (1..=mm).rev() {
                push_sample(vec![rat(i, mm), y.clone()], &mut polyline);
            }
            polyline.push(vec![Rational::zero(), y]);
        }
    }
    let samples = DirectionSet::new(2, samples, format!("boustrophedon(M={m})"))?;
    Ok(Boustrophedon {
        samples,
        crossing_degree: m as usize,
        curve: SampledCurve { polyline, sample_vertex },
    })
}

/// `{(c₁v₁ + w₁, …, cₙvₙ + wₙ)}`.
pub fn affine_image(omega: &DirectionSet, c: &[Rational], w: &[Rational]) -> Result<DirectionSet> {
    let n = omega.dim();
    if c.len() != n {
        return Err(Error::DimMismatch { expected: n, found: c.len() });
    }
    if w.len() != n {
        return Err(Error::DimMismatch { expected: n, found: w.len() });
    }
    if c.iter().any(|ci| !ci.is_positive()) {
        return Err(Error::invalid("dilation factors must be positive"));
    }
    let pts = omega
        .points()
        .iter()
        .map(|p| p.iter().zip(c).zip(w).map(|((x, ci), wi)| x * ci + wi).collect())
        .collect();
    DirectionSet::new(n, pts, format!("affine({})", omega.label()))
}

/// Every point extended by the fixed vector `w`.
pub fn embed_slice(omega: &DirectionSet, w: &[Rational]) -> DirectionSet {
    if w.is_empty() {
        return omega.clone();
    }
    let pts = omega
        .points()
        .iter()
        .map(|p| p.iter().chain(w).cloned().collect())
        .collect();
    DirectionSet {
        dim: omega.dim() + w.len(),
        points: pts,
        label: format!("slice({})", omega.label()),
        merged: omega.merged,
    }
}

/// When the sorted points are `w + s·i` for `i = 1..=k`, returns `(s, w)`.
pub fn as_affine_uniform(points: &[Rational]) -> Option<(Rational, Rational)> {
    let mut v: Vec<Rational> = points.to_vec();
    v.sort();
    let k = v.len();
    if k == 0 {
        return None;
    }
    if k == 1 {
        return Some((Rational::one(), &v[0] - Rational::one()));
    }
    let s = &v[1] - &v[0];
    if !s.is_positive() {
        return None;
    }
    let w = &v[0] - &s;
    for (i, x) in v.iter().enumerate() {
        if *x != &w + &s * int(i as i64 + 1) {
            return None;
        }
    }
    Some((s, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;

    fn set1(vals: &[&str]) -> Vec<Vec<Rational>> {
        vals.iter().map(|s| vec![parse_rational(s).unwrap()]).collect()
    }

    #[test]
    fn uniform_examples() {
        assert_eq!(uniform(1).unwrap().points(), &set1(&["1"])[..]);
        assert_eq!(uniform(4).unwrap().points(), &set1(&["1/4", "1/2", "3/4", "1"])[..]);
        assert!(uniform(3).unwrap().is_subset_of(&uniform(6).unwrap()));
        assert!(!uniform(4).unwrap().is_subset_of(&uniform(6).unwrap()));
        assert!(uniform(0).is_err());
    }

    #[test]
    fn product_examples() {
        let a = DirectionSet::new(1, set1(&["2/7"]), "a").unwrap();
        let p = product(&[a]).unwrap();
        assert_eq!(p.points(), &[vec![rat(2, 7)]][..]);
        let u2 = uniform(2).unwrap();
        let p = product(&[u2.clone(), u2]).unwrap();
        let want = [[rat(1, 2), rat(1, 2)], [rat(1, 2), int(1)], [int(1), rat(1, 2)], [int(1), int(1)]];
        assert_eq!(p.len(), 4);
        for (got, w) in p.points().iter().zip(want.iter()) {
            assert_eq!(got.as_slice(), w.as_slice());
        }
        assert_eq!(product(&[uniform(3).unwrap(), uniform(2).unwrap()]).unwrap().len(), 6);
        assert!(matches!(product(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn lacunary_examples() {
        assert_eq!(lacunary_uniform(1, 1).unwrap().points(), &set1(&["1"])[..]);
        let t = lacunary_uniform(2, 2).unwrap();
        assert!(t.same_points(&DirectionSet::new(1, set1(&["3/4", "1", "3/8", "1/2"]), "").unwrap()));
        let t = lacunary_uniform(3, 4).unwrap();
        assert_eq!(t.len(), 12);
        assert_eq!(t.merged_duplicates(), 0);
    }

    #[test]
    fn merging_counts_duplicates() {
        let s = DirectionSet::from_points_merging(1, set1(&["1", "1/2", "2/2"]), "d").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.merged_duplicates(), 1);
        assert_eq!(
            DirectionSet::new(1, set1(&["1", "2/2"]), "d"),
            Err(Error::DuplicatePoint(1))
        );
    }

    #[test]
    fn schedule_alpha_one_is_diagonal() {
        let s = growth_schedule(1.0, 6).unwrap();
        for &(m, r) in &s.entries {
            assert_eq!(m, r);
        }
        assert_eq!(s.entries[0], (2, 2));
    }

    #[test]
    fn schedule_half_alpha() {
        let s = growth_schedule(0.5, 6).unwrap();
        s.validate().unwrap();
        assert_eq!(s.entries[0], (2, 2));
        // R = e^16 forces log M into [2, 4].
        let (lo, hi) = log_m_window(0.5, 8_886_111);
        assert!((lo - 2.0).abs() < 1e-6 && (hi - 4.0).abs() < 1e-6);
        assert!(matches!(growth_schedule(0.5, 40), Err(Error::Overflow(_))));
        assert!(growth_schedule(0.4, 2).is_err());
    }

    #[test]
    fn prescribed_examples() {
        let s = prescribed_growth_product(2, 0.2, 1.0, 4096).unwrap();
        let n = s.len() as f64;
        assert!(n >= 4096.0 / 4.0 && n <= 4096.0 * 4.0);
        assert!(matches!(
            prescribed_growth_product(2, 0.24, 3.0, 8),
            Err(Error::Infeasible(msg)) if msg.contains("N-large")
        ));
        assert!(prescribed_growth_product(2, 0.3, 0.0, 100).is_err());
    }

    #[test]
    fn boustrophedon_small() {
        let b = boustrophedon_curve_samples(1).unwrap();
        assert_eq!(b.samples.len(), 1);
        assert_eq!(b.crossing_degree, 1);
        let b = boustrophedon_curve_samples(2).unwrap();
        let want = [[rat(1, 2), rat(1, 2)], [int(1), rat(1, 2)], [int(1), int(1)], [rat(1, 2), int(1)]];
        for (got, w) in b.samples.points().iter().zip(want.iter()) {
            assert_eq!(got.as_slice(), w.as_slice());
        }
        b.curve.validate(&b.samples).unwrap();
        assert!(b.samples.same_points(&product(&[uniform(2).unwrap(), uniform(2).unwrap()]).unwrap()));
    }

    #[test]
    fn affine_and_slice() {
        let u2 = uniform(2).unwrap();
        let a = affine_image(&u2, &[rat(1, 2)], &[rat(1, 2)]).unwrap();
        assert_eq!(a.points(), &set1(&["3/4", "1"])[..]);
        assert_eq!(affine_image(&u2, &[int(1)], &[int(0)]).unwrap().points(), u2.points());
        assert!(affine_image(&u2, &[int(0)], &[int(0)]).is_err());
        let e = embed_slice(&u2, &[int(0)]);
        assert_eq!(e.dim(), 2);
        assert_eq!(e.points()[0], vec![rat(1, 2), int(0)]);
        assert_eq!(embed_slice(&u2, &[]), u2);
    }

    #[test]
    fn affine_uniform_detection() {
        let block: Vec<Rational> = [rat(5, 16), rat(3, 8), rat(7, 16), rat(1, 2)].into();
        assert_eq!(as_affine_uniform(&block), Some((rat(1, 16), rat(1, 4))));
        assert_eq!(as_affine_uniform(&[rat(1, 3), rat(1, 2), rat(1, 1)]), None);
    }
}
