//! Planar partitioning by rounds of ham-sandwich lines.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::ham::ham_sandwich_line;
use super::{cross, padded_bounds, Cell, CellCover, CellShape, Hyperplane};
use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::rational::{sign, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub cover: CellCover,
    /// Number of lines, i.e. the degree of their product polynomial.
    pub degree: usize,
    pub lines: Vec<Hyperplane>,
}

/// Each round pairs up the current cells and cuts every pair with one
/// ham-sandwich line, nudged so that no point of Ω lies on it. All cells are
/// then split by all lines of the round. Cells without points are dropped.
pub fn partition_points_2d(omega: &DirectionSet, rounds: usize) -> Result<Partition> {
    if omega.dim() != 2 {
        return Err(Error::DimMismatch { expected: 2, found: omega.dim() });
    }
    if rounds == 0 {
        return Err(Error::invalid("partition needs at least one round"));
    }
    let pts = omega.points();
    let (lo, hi) = padded_bounds(pts, 2);
    let bbox = vec![
        vec![lo[0].clone(), lo[1].clone()],
        vec![hi[0].clone(), lo[1].clone()],
        vec![hi[0].clone(), hi[1].clone()],
        vec![lo[0].clone(), hi[1].clone()],
    ];
    let mut cells: Vec<(Vec<Vec<Rational>>, Vec<usize>)> = vec![(bbox, (0..pts.len()).collect())];
    let mut lines = Vec::new();
    for _ in 0..rounds {
        let mut round_lines = Vec::new();
        for pair in cells.chunks(2) {
            let a: Vec<Vec<Rational>> = pair[0].1.iter().map(|&i| pts[i].clone()).collect();
            let b: Vec<Vec<Rational>> = pair
                .get(1)
                .map(|c| c.1.iter().map(|&i| pts[i].clone()).collect())
                .unwrap_or_default();
            if a.len() <= 1 && b.len() <= 1 {
                continue;
            }
            let cut = ham_sandwich_line(&a, &b)?;
            round_lines.push(nudge(&cut.line, pts, &a, &b)?);
        }
        for line in &round_lines {
            let mut next = Vec::with_capacity(cells.len() * 2);
            for (poly, members) in &cells {
                for side in [1i8, -1] {
                    let part: Vec<usize> =
                        members.iter().copied().filter(|&i| line.sign_at(&pts[i]) == side).collect();
                    if part.is_empty() {
                        continue;
                    }
                    let piece = clip(poly, line, side);
                    if piece.len() < 3 {
                        return Err(Error::Infeasible("clipping lost a cell that holds points".into()));
                    }
                    next.push((piece, part));
                }
            }
            cells = next;
        }
        lines.extend(round_lines);
    }
    let mut out = Vec::with_capacity(cells.len());
    let mut reps = Vec::with_capacity(cells.len());
    for (poly, members) in cells {
        reps.push(members[0]);
        out.push(Cell { shape: CellShape::Polygon(poly), members });
    }
    let degree = lines.len();
    let cover = CellCover::new(omega.clone(), out, reps)?;
    Ok(Partition { cover, degree, lines })
}

/// Moves a line off every point of `pts` by a small rotation or translation,
/// choosing the split of the former on-line points that keeps `a` and `b`
/// closest to balanced.
fn nudge(line: &Hyperplane, pts: &[Vec<Rational>], a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Result<Hyperplane> {
    let c = line.coeffs();
    let r = |x: &BigInt| Rational::from_integer(x.clone());
    let (la, lb, lc) = (r(&c[0]), r(&c[1]), r(&c[2]));
    let on: Vec<&Vec<Rational>> = pts.iter().filter(|p| line.sign_at(p) == 0).collect();
    if on.is_empty() {
        return Ok(line.clone());
    }
    let anchor = on[0].clone();
    let t_of = |p: &[Rational]| &lb * (&p[0] - &anchor[0]) - &la * (&p[1] - &anchor[1]);
    let mut ts: Vec<Rational> = on.iter().map(|p| t_of(p)).collect();
    ts.sort();
    let one = Rational::from_integer(1.into());
    let two = Rational::from_integer(2.into());
    let mut taus = vec![&ts[0] - &one];
    for w in ts.windows(2) {
        taus.push((&w[0] + &w[1]) / &two);
    }
    taus.push(&ts[ts.len() - 1] + &one);

    let side = |p: &[Rational], sigma: i8, tau: &Rational| -> i8 {
        match line.sign_at(p) {
            0 => sigma * sign(&(t_of(p) - tau)),
            s => s,
        }
    };
    let excess = |set: &[Vec<Rational>], sigma: i8, tau: &Rational| -> i64 {
        let half = set.len().div_ceil(2) as i64;
        let pos = set.iter().filter(|p| side(p, sigma, tau) > 0).count() as i64;
        let neg = set.iter().filter(|p| side(p, sigma, tau) < 0).count() as i64;
        (pos - half).max(neg - half)
    };
    let mut best: Option<(i64, i8, Rational)> = None;
    for sigma in [1i8, -1] {
        for tau in &taus {
            let score = excess(a, sigma, tau).max(excess(b, sigma, tau));
            if best.as_ref().map_or(true, |(s, _, _)| score < *s) {
                best = Some((score, sigma, tau.clone()));
            }
        }
    }
    let (_, sigma, tau) = best.expect("threshold list is never empty");

    let mut min_off: Option<Rational> = None;
    let mut max_g = Rational::zero();
    for p in pts {
        let l = line.eval(p).abs();
        if !l.is_zero() && min_off.as_ref().map_or(true, |m| l < *m) {
            min_off = Some(l);
        }
        let g = (t_of(p) - &tau).abs();
        if g > max_g {
            max_g = g;
        }
    }
    let eps = match min_off {
        Some(m) => m / (max_g * &two + &one),
        None => one,
    };
    let e = eps * Rational::from_integer(BigInt::from(sigma));
    // New line: l(p) + e (t(p) − tau).
    let na = &la + &e * &lb;
    let nb = &lb - &e * &la;
    let nc = &lc + &e * (-&lb * &anchor[0] + &la * &anchor[1] - &tau);
    let nudged = Hyperplane::from_rationals(&[na, nb, nc])?;
    if let Some(p) = pts.iter().find(|p| nudged.sign_at(p) == 0) {
        return Err(Error::Infeasible(format!("nudged line still passes through {:?}", p)));
    }
    Ok(nudged)
}

/// Part of a convex polygon on the given open side of a line, with exact
/// intersection points.
fn clip(poly: &[Vec<Rational>], line: &Hyperplane, side: i8) -> Vec<Vec<Rational>> {
    let n = poly.len();
    let vals: Vec<Rational> = poly.iter().map(|p| line.eval(p) * Rational::from_integer(side.into())).collect();
    let mut out: Vec<Vec<Rational>> = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        if !vals[i].is_negative() {
            out.push(poly[i].clone());
        }
        if (vals[i].is_positive() && vals[j].is_negative()) || (vals[i].is_negative() && vals[j].is_positive()) {
            let t = &vals[i] / (&vals[i] - &vals[j]);
            let p: Vec<Rational> = (0..2).map(|k| &poly[i][k] + &t * (&poly[j][k] - &poly[i][k])).collect();
            out.push(p);
        }
    }
    out.dedup();
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    // Drop collinear vertices so the polygon is strictly convex.
    let mut changed = true;
    while changed && out.len() >= 3 {
        changed = false;
        let m = out.len();
        for i in 0..m {
            if cross(&out[(i + m - 1) % m], &out[i], &out[(i + 1) % m]).is_zero() {
                out.remove(i);
                changed = true;
                break;
            }
        }
    }
    if out.len() < 3 {
        return Vec::new();
    }
    out
}
