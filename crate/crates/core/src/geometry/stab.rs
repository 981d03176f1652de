//! Supremum of the stabbing statistic over hyperplanes.
//!
//! In the plane the count only depends on the sign vector of the cell
//! vertices. Every sign vector realised by some line is realised by a small
//! perturbation of a line through two vertices: keep the off-line signs and
//! split the collinear vertices at a threshold along the line. Enumerating
//! those finitely many patterns gives the exact maximum.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::frame::Frame;
use super::{stab_count, CellCover, Hyperplane};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabMode {
    /// Maximum over every hyperplane.
    Exact,
    /// Maximum over hyperplanes avoiding all cell vertices. This is the
    /// essential supremum: the excluded hyperplanes form a null set.
    ExactGeneric,
    /// Maximum over random and axis-parallel hyperplanes; a lower estimate.
    Sampled { lines: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabSup {
    pub e_sup: usize,
    pub witness: Hyperplane,
    pub exact: bool,
}

pub fn stab_sup(cover: &CellCover, mode: StabMode) -> Result<StabSup> {
    let dim = cover.omega.dim();
    let res = match mode {
        StabMode::Exact | StabMode::ExactGeneric => {
            let generic = mode == StabMode::ExactGeneric;
            match dim {
                1 => exact_1d(cover, generic)?,
                2 => exact_2d(cover, generic)?,
                _ => {
                    return Err(Error::invalid(format!(
                        "exact stabbing is only available for lines in the plane, not dimension {dim}"
                    )))
                }
            }
        }
        StabMode::Sampled { lines, seed } => sampled(cover, lines, seed)?,
    };
    let check = stab_count(cover, &res.witness);
    if check != res.e_sup {
        return Err(Error::Infeasible(format!(
            "witness re-check gave {check}, expected {}",
            res.e_sup
        )));
    }
    Ok(res)
}

struct Vertices {
    /// Distinct vertices of all cells.
    points: Vec<Vec<Rational>>,
    /// Per cell, vertex ids in the order of `CellShape::vertices`.
    cell_vertices: Vec<Vec<usize>>,
    /// Per vertex, cells that use it.
    vertex_cells: Vec<Vec<usize>>,
}

fn collect_vertices(cover: &CellCover) -> Vertices {
    let mut ids: BTreeMap<Vec<Rational>, usize> = BTreeMap::new();
    let mut points = Vec::new();
    let mut cell_vertices = Vec::with_capacity(cover.cells.len());
    for cell in &cover.cells {
        let mut vs = Vec::new();
        for v in cell.shape.vertices() {
            let id = *ids.entry(v.clone()).or_insert_with(|| {
                points.push(v);
                points.len() - 1
            });
            vs.push(id);
        }
        cell_vertices.push(vs);
    }
    let mut vertex_cells = vec![Vec::new(); points.len()];
    for (c, vs) in cell_vertices.iter().enumerate() {
        for &v in vs {
            if vertex_cells[v].last() != Some(&c) {
                vertex_cells[v].push(c);
            }
        }
    }
    Vertices { points, cell_vertices, vertex_cells }
}

fn count_hits(cover: &CellCover, vx: &Vertices, signs: &[i8], cells: impl Iterator<Item = usize>) -> usize {
    let mut buf = Vec::new();
    cells
        .filter(|&c| {
            buf.clear();
            buf.extend(vx.cell_vertices[c].iter().map(|&v| signs[v]));
            cover.cells[c].shape.hit_from_signs(&buf)
        })
        .count()
}

fn exact_1d(cover: &CellCover, generic: bool) -> Result<StabSup> {
    let vx = collect_vertices(cover);
    let mut xs: Vec<Rational> = vx.points.iter().map(|p| p[0].clone()).collect();
    xs.sort();
    xs.dedup();
    let two = Rational::from_integer(2.into());
    let one = Rational::from_integer(1.into());
    let mut cands = Vec::new();
    cands.push(&xs[0] - &one);
    for (i, x) in xs.iter().enumerate() {
        if !generic {
            cands.push(x.clone());
        }
        if let Some(y) = xs.get(i + 1) {
            cands.push((x + y) / &two);
        }
    }
    cands.push(&xs[xs.len() - 1] + &one);
    let mut best: Option<(usize, Hyperplane)> = None;
    for y in cands {
        let h = Hyperplane::from_rationals(&[one.clone(), -y])?;
        let c = stab_count(cover, &h);
        if best.as_ref().map_or(true, |(b, _)| c > *b) {
            best = Some((c, h));
        }
    }
    let (e_sup, witness) = best.expect("candidate list is never empty");
    Ok(StabSup { e_sup, witness, exact: true })
}

/// Integer arithmetic for the planar kernel: `i128` when the scaled
/// coordinates fit 61 bits, `BigInt` otherwise.
trait Kernel: Clone + Ord + Integer + Signed + From<i64> + Into<BigInt> {}

impl Kernel for i128 {}
impl Kernel for BigInt {}

fn sign_of<T: Kernel>(x: &T) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

fn rat_of<T: Kernel>(x: &T) -> Rational {
    Rational::from_integer(x.clone().into())
}

/// Vertices scaled to integers, in the narrowest kernel that holds them.
enum Scaled {
    Small(Vec<Vec<i128>>),
    Big(Vec<Vec<BigInt>>),
}

fn scale_points(frame: &Frame, points: &[Vec<Rational>]) -> Result<Scaled> {
    match points.iter().map(|p| frame.to_int(p)).collect::<Result<Vec<_>>>() {
        Ok(ip) => Ok(Scaled::Small(ip.into_iter().map(|p| p.into_iter().map(i128::from).collect()).collect())),
        Err(Error::Overflow(_)) => Ok(Scaled::Big(points.iter().map(|p| frame.to_big(p)).collect())),
        Err(e) => Err(e),
    }
}

#[derive(Clone)]
struct Line<T> {
    a: T,
    b: T,
    c: T,
    anchor: usize,
}

#[derive(Clone)]
enum Pattern {
    OnLine,
    /// On-line vertices get sign `sigma · sgn(t − tau)`.
    Split { sigma: i8, tau: Rational },
}

fn line_key<T: Kernel>(a: &T, b: &T, c: &T) -> (T, T, T) {
    let mut g = a.gcd(b).gcd(c);
    if g.is_zero() {
        g = T::one();
    }
    let (mut a, mut b, mut c) = (a.clone() / g.clone(), b.clone() / g.clone(), c.clone() / g);
    if a.is_negative() || (a.is_zero() && b.is_negative()) {
        a = -a;
        b = -b;
        c = -c;
    }
    (a, b, c)
}

fn exact_2d(cover: &CellCover, generic: bool) -> Result<StabSup> {
    let vx = collect_vertices(cover);
    let frame = Frame::for_points(vx.points.iter());
    match scale_points(&frame, &vx.points)? {
        Scaled::Small(ip) => exact_2d_with(cover, &vx, &frame, &ip, generic),
        Scaled::Big(ip) => exact_2d_with(cover, &vx, &frame, &ip, generic),
    }
}

fn exact_2d_with<T: Kernel>(cover: &CellCover, vx: &Vertices, frame: &Frame, ip: &[Vec<T>], generic: bool) -> Result<StabSup> {
    let nv = ip.len();
    let mut lines: Vec<Line<T>> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut add = |p: usize, dx: T, dy: T, lines: &mut Vec<Line<T>>| {
        let a = -dy;
        let b = dx;
        let c = -(a.clone() * ip[p][0].clone() + b.clone() * ip[p][1].clone());
        if seen.insert(line_key(&a, &b, &c)) {
            lines.push(Line { a, b, c, anchor: p });
        }
    };
    for p in 0..nv {
        add(p, T::one(), T::zero(), &mut lines);
        add(p, T::zero(), T::one(), &mut lines);
        for q in p + 1..nv {
            let dx = ip[q][0].clone() - ip[p][0].clone();
            let dy = ip[q][1].clone() - ip[p][1].clone();
            add(p, dx, dy, &mut lines);
        }
    }

    let all_cells = 0..cover.cells.len();
    let mut best: Option<(usize, Line<T>, Pattern)> = None;
    let mut signs = vec![0i8; nv];
    let mut work = vec![0i8; nv];
    for line in &lines {
        let mut on: Vec<(T, usize)> = Vec::new();
        let (px, py) = (&ip[line.anchor][0], &ip[line.anchor][1]);
        for v in 0..nv {
            let (x, y) = (&ip[v][0], &ip[v][1]);
            let val = line.a.clone() * x.clone() + line.b.clone() * y.clone() + line.c.clone();
            signs[v] = sign_of(&val);
            if val.is_zero() {
                let t = line.b.clone() * (x.clone() - px.clone()) - line.a.clone() * (y.clone() - py.clone());
                on.push((t, v));
            }
        }
        on.sort();
        let mut affected: Vec<usize> = on.iter().flat_map(|(_, v)| vx.vertex_cells[*v].iter().copied()).collect();
        affected.sort_unstable();
        affected.dedup();
        let total_on = count_hits(cover, vx, &signs, all_cells.clone());
        let affected_on = count_hits(cover, vx, &signs, affected.iter().copied());
        let base = total_on - affected_on;

        let consider = |count: usize, pat: Pattern, best: &mut Option<(usize, Line<T>, Pattern)>| {
            if best.as_ref().map_or(true, |(b, _, _)| count > *b) {
                *best = Some((count, line.clone(), pat));
            }
        };
        if !generic {
            consider(total_on, Pattern::OnLine, &mut best);
        }
        let mut ts: Vec<Rational> = on.iter().map(|(t, _)| rat_of(t)).collect();
        ts.dedup();
        let one = Rational::from_integer(1.into());
        let half = Rational::new(1.into(), 2.into());
        let mut taus: Vec<Rational> = Vec::new();
        taus.push(&ts[0] - &one);
        for (i, t) in ts.iter().enumerate() {
            if !generic {
                taus.push(t.clone());
            }
            if let Some(u) = ts.get(i + 1) {
                taus.push((t + u) * &half);
            }
        }
        taus.push(&ts[ts.len() - 1] + &one);
        let on_t: Vec<(Rational, usize)> = on.iter().map(|(t, v)| (rat_of(t), *v)).collect();
        for sigma in [1i8, -1] {
            for tau in &taus {
                work.copy_from_slice(&signs);
                for (t, v) in &on_t {
                    let d = t - tau;
                    let s = if d.is_positive() { 1 } else if d.is_negative() { -1 } else { 0 };
                    work[*v] = sigma * s;
                }
                let count = base + count_hits(cover, vx, &work, affected.iter().copied());
                consider(count, Pattern::Split { sigma, tau: tau.clone() }, &mut best);
            }
        }
    }
    let (e_sup, line, pat) = best.expect("at least one candidate line");
    let witness = realise(frame, ip, &line, &pat)?;
    Ok(StabSup { e_sup, witness, exact: true })
}

/// Turns a line and a sign pattern into an explicit hyperplane in the
/// original coordinates.
fn realise<T: Kernel>(frame: &Frame, ip: &[Vec<T>], line: &Line<T>, pat: &Pattern) -> Result<Hyperplane> {
    let scale = frame.scale_rational();
    let (a, b, c) = (rat_of(&line.a), rat_of(&line.b), rat_of(&line.c));
    let (sigma, tau) = match pat {
        Pattern::OnLine => return Hyperplane::from_rationals(&[&a * &scale, &b * &scale, c]),
        Pattern::Split { sigma, tau } => (*sigma, tau),
    };
    let (px, py) = (rat_of(&ip[line.anchor][0]), rat_of(&ip[line.anchor][1]));
    let mut min_off: Option<Rational> = None;
    let mut max_g = Rational::zero();
    for v in ip {
        let (x, y) = (rat_of(&v[0]), rat_of(&v[1]));
        let l = &a * &x + &b * &y + &c;
        let g = &b * (&x - &px) - &a * (&y - &py) - tau;
        if !l.is_zero() {
            let al = l.abs();
            if min_off.as_ref().map_or(true, |m| al < *m) {
                min_off = Some(al);
            }
        }
        if g.abs() > max_g {
            max_g = g.abs();
        }
    }
    let one = Rational::from_integer(1.into());
    let eps = match min_off {
        Some(m) => m / (max_g * Rational::from_integer(2.into()) + &one),
        None => one,
    };
    let e = eps * Rational::from_integer(BigInt::from(sigma));
    let na = &a + &e * &b;
    let nb = &b - &e * &a;
    let nc = &c + &e * (-&b * &px + &a * &py - tau);
    Hyperplane::from_rationals(&[na * &scale, nb * &scale, nc])
}

fn sampled(cover: &CellCover, lines: usize, seed: u64) -> Result<StabSup> {
    let vx = collect_vertices(cover);
    let frame = Frame::for_points(vx.points.iter());
    match scale_points(&frame, &vx.points)? {
        Scaled::Small(ip) => sampled_with(cover, &vx, &frame, &ip, lines, seed),
        Scaled::Big(ip) => sampled_with(cover, &vx, &frame, &ip, lines, seed),
    }
}

fn sampled_with<T: Kernel>(cover: &CellCover, vx: &Vertices, frame: &Frame, ip: &[Vec<T>], lines: usize, seed: u64) -> Result<StabSup> {
    let dim = cover.omega.dim();
    let mut lo: Vec<T> = ip[0].clone();
    let mut hi: Vec<T> = ip[0].clone();
    for p in ip {
        for k in 0..dim {
            if p[k] < lo[k] {
                lo[k] = p[k].clone();
            }
            if p[k] > hi[k] {
                hi[k] = p[k].clone();
            }
        }
    }
    let mut best: Option<(usize, Vec<T>)> = None;
    let mut signs = vec![0i8; ip.len()];
    let mut eval = |u: &[T], best: &mut Option<(usize, Vec<T>)>| {
        for (s, p) in signs.iter_mut().zip(ip) {
            let mut acc = u[dim].clone();
            for k in 0..dim {
                acc = acc + u[k].clone() * p[k].clone();
            }
            *s = sign_of(&acc);
        }
        let c = count_hits(cover, vx, &signs, 0..cover.cells.len());
        if best.as_ref().map_or(true, |(b, _)| c > *b) {
            *best = Some((c, u.to_vec()));
        }
    };
    let two = T::from(2);
    for p in ip {
        for k in 0..dim {
            for off in [-1i64, 0, 1] {
                let mut u = vec![T::zero(); dim + 1];
                u[k] = two.clone();
                u[dim] = -(two.clone() * p[k].clone() + T::from(off));
                eval(&u, &mut best);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const R: i64 = 1 << 16;
    // Offsets are drawn on a 2^20 lattice across the bounding box.
    const STEPS: i64 = 1 << 20;
    for _ in 0..lines {
        let mut u = vec![T::zero(); dim + 1];
        while u[..dim].iter().all(Zero::is_zero) {
            for x in u[..dim].iter_mut() {
                *x = T::from(rng.gen_range(-R..=R));
            }
        }
        let mut c = T::zero();
        for k in 0..dim {
            let span = hi[k].clone() - lo[k].clone();
            let j = T::from(rng.gen_range(0..=STEPS));
            let x = lo[k].clone() + span * j / T::from(STEPS);
            c = c - u[k].clone() * x;
        }
        u[dim] = c;
        eval(&u, &mut best);
    }
    let (e_sup, u) = best.expect("sampler always evaluates some hyperplane");
    let scale = frame.scale_rational();
    let mut coeffs: Vec<Rational> = u[..dim].iter().map(|x| rat_of(x) * &scale).collect();
    coeffs.push(rat_of(&u[dim]));
    Ok(StabSup { e_sup, witness: Hyperplane::from_rationals(&coeffs)?, exact: false })
}
