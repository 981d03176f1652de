//! Cover constructions: product grids, 1D interval groups and curve arcs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use super::{padded_bounds, Cell, CellCover, CellShape};
use crate::directions::{DirectionSet, SampledCurve};
use crate::error::{Error, Result};
use crate::rational::Rational;

fn midpoint(a: &Rational, b: &Rational) -> Rational {
    (a + b) / Rational::from_integer(2.into())
}

/// Open intervals around consecutive groups of sorted axis values, split at
/// midpoints and clipped to `[lo, hi]` at the ends.
fn axis_intervals(values: &[Rational], groups: &[Range<usize>], lo: &Rational, hi: &Rational) -> Vec<(Rational, Rational)> {
    let mut out = Vec::with_capacity(groups.len());
    for (g, r) in groups.iter().enumerate() {
        let a = if g == 0 { lo.clone() } else { midpoint(&values[r.start - 1], &values[r.start]) };
        let b = if g + 1 == groups.len() { hi.clone() } else { midpoint(&values[r.end - 1], &values[r.end]) };
        out.push((a, b));
    }
    out
}

fn groups_of_size(n: usize, size: usize) -> Vec<Range<usize>> {
    (0..n).step_by(size).map(|s| s..(s + size).min(n)).collect()
}

/// `count` consecutive groups, the first `n mod count` of them one larger.
fn groups_by_count(n: usize, count: usize) -> Vec<Range<usize>> {
    let count = count.min(n).max(1);
    let q = n / count;
    let extra = n % count;
    let mut out = Vec::with_capacity(count);
    let mut start = 0;
    for g in 0..count {
        let len = q + usize::from(g < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

fn product_cover(omega: &DirectionSet, axis_groups: Vec<Vec<Range<usize>>>) -> Result<CellCover> {
    let dim = omega.dim();
    let factors = omega
        .product_factors()
        .ok_or_else(|| Error::invalid("direction set is not a Cartesian product"))?;
    let (lo, hi) = padded_bounds(omega.points(), dim);
    let intervals: Vec<Vec<(Rational, Rational)>> = (0..dim)
        .map(|k| {
            if factors[k].len() == 1 && dim > 1 {
                vec![(factors[k][0].clone(), factors[k][0].clone())]
            } else {
                axis_intervals(&factors[k], &axis_groups[k], &lo[k], &hi[k])
            }
        })
        .collect();
    let index: BTreeMap<&Vec<Rational>, usize> = omega.points().iter().enumerate().map(|(i, p)| (p, i)).collect();

    let mut cells = Vec::new();
    let mut reps = Vec::new();
    let mut choice = vec![0usize; dim];
    loop {
        let ranges: Vec<&Range<usize>> = (0..dim).map(|k| &axis_groups[k][choice[k]]).collect();
        let mut members = Vec::new();
        let mut combo: Vec<usize> = ranges.iter().map(|r| r.start).collect();
        'outer: loop {
            let p: Vec<Rational> = (0..dim).map(|k| factors[k][combo[k]].clone()).collect();
            members.push(index[&p]);
            for k in (0..dim).rev() {
                combo[k] += 1;
                if combo[k] < ranges[k].end {
                    continue 'outer;
                }
                combo[k] = ranges[k].start;
            }
            break;
        }
        let first: Vec<Rational> = (0..dim).map(|k| factors[k][ranges[k].start].clone()).collect();
        reps.push(index[&first]);
        let (blo, bhi): (Vec<Rational>, Vec<Rational>) =
            (0..dim).map(|k| intervals[k][choice[k]].clone()).unzip();
        let shape = if dim == 1 {
            CellShape::Interval { lo: blo[0].clone(), hi: bhi[0].clone() }
        } else {
            CellShape::Box { lo: blo, hi: bhi }
        };
        cells.push(Cell { shape, members });

        let mut k = dim;
        loop {
            if k == 0 {
                return CellCover::new(omega.clone(), cells, reps);
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < axis_groups[k].len() {
                break;
            }
            choice[k] = 0;
        }
    }
}

/// Axis-parallel boxes holding `group_sizes[k]` consecutive values on axis
/// `k` (the last group on an axis takes the remainder).
pub fn grid_cover_for_product(omega: &DirectionSet, group_sizes: &[usize]) -> Result<CellCover> {
    if group_sizes.len() != omega.dim() {
        return Err(Error::DimMismatch { expected: omega.dim(), found: group_sizes.len() });
    }
    if group_sizes.iter().any(|&g| g == 0) {
        return Err(Error::invalid("group sizes must be positive"));
    }
    let factors = omega
        .product_factors()
        .ok_or_else(|| Error::invalid("direction set is not a Cartesian product"))?;
    let groups = factors
        .iter()
        .zip(group_sizes)
        .map(|(f, &g)| groups_of_size(f.len(), g))
        .collect();
    product_cover(omega, groups)
}

/// Splits every axis with at least `count` values into `count` runs of `Q` or
/// `Q + 1` consecutive values; shorter axes get one run per value.
pub fn grid_cover_by_interval_count(omega: &DirectionSet, count: usize) -> Result<CellCover> {
    if count == 0 {
        return Err(Error::invalid("interval count must be positive"));
    }
    let factors = omega
        .product_factors()
        .ok_or_else(|| Error::invalid("direction set is not a Cartesian product"))?;
    let groups = factors.iter().map(|f| groups_by_count(f.len(), count)).collect();
    product_cover(omega, groups)
}

/// Disjoint open intervals, one per group. Groups must be runs of
/// consecutive points in increasing order.
pub fn interval_cover_from_groups(omega: &DirectionSet, groups: &[Vec<usize>]) -> Result<CellCover> {
    if omega.dim() != 1 {
        return Err(Error::DimMismatch { expected: 1, found: omega.dim() });
    }
    let mut order: Vec<usize> = (0..omega.len()).collect();
    order.sort_by(|&i, &j| omega.point(i)[0].cmp(&omega.point(j)[0]));
    let rank: BTreeMap<usize, usize> = order.iter().enumerate().map(|(r, &i)| (i, r)).collect();
    let values: Vec<Rational> = order.iter().map(|&i| omega.point(i)[0].clone()).collect();
    let mut ranges = Vec::with_capacity(groups.len());
    let mut next = 0;
    for g in groups {
        let mut rs: Vec<usize> = g
            .iter()
            .map(|i| rank.get(i).copied().ok_or_else(|| Error::invalid(format!("index {i} out of range"))))
            .collect::<Result<_>>()?;
        rs.sort_unstable();
        if rs.is_empty() || rs[0] != next || rs.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::invalid("groups are not consecutive runs in increasing order"));
        }
        next = rs[rs.len() - 1] + 1;
        ranges.push(rs[0]..next);
    }
    if next != omega.len() {
        return Err(Error::invalid("groups do not cover the set"));
    }
    let (lo, hi) = padded_bounds(omega.points(), 1);
    let iv = axis_intervals(&values, &ranges, &lo[0], &hi[0]);
    let mut cells = Vec::with_capacity(groups.len());
    let mut reps = Vec::with_capacity(groups.len());
    for (r, (a, b)) in ranges.iter().zip(iv) {
        let members: Vec<usize> = r.clone().map(|k| order[k]).collect();
        reps.push(members[0]);
        cells.push(Cell { shape: CellShape::Interval { lo: a, hi: b }, members });
    }
    CellCover::new(omega.clone(), cells, reps)
}

/// Arcs of the curve through `pair_size` consecutive samples each.
pub fn curve_cover(samples: &DirectionSet, curve: &SampledCurve, pair_size: usize) -> Result<CellCover> {
    if pair_size == 0 {
        return Err(Error::invalid("pair size must be positive"));
    }
    curve.validate(samples)?;
    let n = samples.len();
    let mut cells = Vec::new();
    let mut reps = Vec::new();
    for r in groups_of_size(n, pair_size) {
        let members: Vec<usize> = r.clone().collect();
        let shape = if r.len() == 1 {
            CellShape::Point(samples.point(r.start).to_vec())
        } else {
            let (a, b) = (curve.sample_vertex[r.start], curve.sample_vertex[r.end - 1]);
            CellShape::Arc(curve.polyline[a..=b].to_vec())
        };
        reps.push(r.start);
        cells.push(Cell { shape, members });
    }
    CellCover::new(samples.clone(), cells, reps)
}
