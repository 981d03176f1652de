//! Cells, covers, hyperplanes and the stabbing statistic.

mod covers;
mod frame;
mod ham;
mod partition;
mod stab;

pub use covers::{curve_cover, grid_cover_by_interval_count, grid_cover_for_product, interval_cover_from_groups};
pub use ham::{ham_sandwich_line, is_ham_sandwich, HamSandwichCut, SideCounts};
pub use partition::{partition_points_2d, Partition};
pub use stab::{stab_sup, StabMode, StabSup};

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::rational::{common_denominator, scaled_integer, sign, Rational};

/// The affine function `P_u(y) = u·⟨y,1⟩`, stored as a primitive integer vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hyperplane {
    coeffs: Vec<BigInt>,
}

impl Hyperplane {
    /// Scales rational coefficients to a primitive integer vector. The sign of
    /// the vector is kept, so orientation survives.
    pub fn from_rationals(u: &[Rational]) -> Result<Self> {
        if u.len() < 2 {
            return Err(Error::invalid("hyperplane needs at least two coefficients"));
        }
        if u.iter().all(Zero::is_zero) {
            return Err(Error::invalid("hyperplane coefficients are all zero"));
        }
        let den = common_denominator(u.iter());
        let mut coeffs: Vec<BigInt> = u
            .iter()
            .map(|q| scaled_integer(q, &den).expect("common denominator clears every entry"))
            .collect();
        let g = coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        for c in &mut coeffs {
            *c /= &g;
        }
        Ok(Hyperplane { coeffs })
    }

    pub fn from_integers(u: &[i64]) -> Result<Self> {
        let r: Vec<Rational> = u.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect();
        Self::from_rationals(&r)
    }

    /// Ambient dimension `n` of the direction space.
    pub fn dim(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn eval(&self, y: &[Rational]) -> Rational {
        let n = self.dim();
        let mut acc = Rational::from_integer(self.coeffs[n].clone());
        for (c, yi) in self.coeffs[..n].iter().zip(y) {
            acc += yi * c;
        }
        acc
    }

    pub fn sign_at(&self, y: &[Rational]) -> i8 {
        sign(&self.eval(y))
    }

    pub fn flipped(&self) -> Hyperplane {
        Hyperplane { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Interval,
    ConvexPolygon,
    Box,
    CurveArc,
    Point,
}

impl CellKind {
    pub fn name(self) -> &'static str {
        match self {
            CellKind::Interval => "interval",
            CellKind::ConvexPolygon => "convex-polygon",
            CellKind::Box => "box",
            CellKind::CurveArc => "curve-arc",
            CellKind::Point => "point",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "interval" => CellKind::Interval,
            "convex-polygon" => CellKind::ConvexPolygon,
            "box" => CellKind::Box,
            "curve-arc" => CellKind::CurveArc,
            "point" => CellKind::Point,
            _ => return None,
        })
    }
}

/// Intervals, polygons and boxes are open (relatively open in degenerate
/// box axes). Arcs are closed polylines and points are points.
#[derive(Debug, Clone, PartialEq)]
pub enum CellShape {
    Point(Vec<Rational>),
    Interval { lo: Rational, hi: Rational },
    Polygon(Vec<Vec<Rational>>),
    Box { lo: Vec<Rational>, hi: Vec<Rational> },
    Arc(Vec<Vec<Rational>>),
}

impl CellShape {
    pub fn kind(&self) -> CellKind {
        match self {
            CellShape::Point(_) => CellKind::Point,
            CellShape::Interval { .. } => CellKind::Interval,
            CellShape::Polygon(_) => CellKind::ConvexPolygon,
            CellShape::Box { .. } => CellKind::Box,
            CellShape::Arc(_) => CellKind::CurveArc,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CellShape::Point(p) => p.len(),
            CellShape::Interval { .. } => 1,
            CellShape::Polygon(_) => 2,
            CellShape::Box { lo, .. } => lo.len(),
            CellShape::Arc(v) => v.first().map_or(0, Vec::len),
        }
    }

    pub fn check(&self) -> Result<()> {
        let dim = self.dim();
        let same_dim = |v: &[Vec<Rational>]| v.iter().all(|p| p.len() == dim);
        match self {
            CellShape::Point(p) if p.is_empty() => Err(Error::invalid("point cell without coordinates")),
            CellShape::Interval { lo, hi } if lo >= hi => Err(Error::invalid("interval cell with lo >= hi")),
            CellShape::Polygon(v) => {
                if v.len() < 3 || !same_dim(v) {
                    return Err(Error::invalid("polygon cell needs at least three planar vertices"));
                }
                let n = v.len();
                let mut orient = 0i8;
                for i in 0..n {
                    let s = sign(&cross(&v[i], &v[(i + 1) % n], &v[(i + 2) % n]));
                    if s == 0 {
                        continue;
                    }
                    if orient != 0 && s != orient {
                        return Err(Error::invalid("polygon cell is not convex"));
                    }
                    orient = s;
                }
                if orient == 0 {
                    return Err(Error::invalid("polygon cell has zero area"));
                }
                Ok(())
            }
            CellShape::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| a > b) {
                    return Err(Error::invalid("box cell needs lo <= hi on every axis"));
                }
                Ok(())
            }
            CellShape::Arc(v) => {
                if v.is_empty() || !same_dim(v) {
                    return Err(Error::invalid("arc cell needs vertices of one dimension"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Vertices whose signs decide whether a hyperplane meets the cell.
    pub fn vertices(&self) -> Vec<Vec<Rational>> {
        match self {
            CellShape::Point(p) => alloc::vec![p.clone()],
            CellShape::Interval { lo, hi } => alloc::vec![alloc::vec![lo.clone()], alloc::vec![hi.clone()]],
            CellShape::Polygon(v) | CellShape::Arc(v) => v.clone(),
            CellShape::Box { lo, hi } => box_corners(lo, hi),
        }
    }

    /// Whether the hyperplane meets the cell, decided from vertex signs.
    pub fn hit_from_signs(&self, signs: &[i8]) -> bool {
        match self {
            CellShape::Point(_) => signs[0] == 0,
            CellShape::Arc(_) => {
                signs.iter().any(|&s| s == 0) || signs.windows(2).any(|w| w[0] != w[1])
            }
            _ => {
                let pos = signs.iter().any(|&s| s > 0);
                let neg = signs.iter().any(|&s| s < 0);
                (pos && neg) || signs.iter().all(|&s| s == 0)
            }
        }
    }

    pub fn hits(&self, h: &Hyperplane) -> bool {
        let signs: Vec<i8> = self.vertices().iter().map(|v| h.sign_at(v)).collect();
        self.hit_from_signs(&signs)
    }

    /// Membership in the cell itself (not its closure).
    pub fn contains(&self, p: &[Rational]) -> bool {
        if p.len() != self.dim() {
            return false;
        }
        match self {
            CellShape::Point(q) => q.as_slice() == p,
            CellShape::Interval { lo, hi } => lo < &p[0] && p[0] < *hi,
            CellShape::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .zip(p)
                .all(|((a, b), x)| (a < x && x < b) || (a == b && a == x)),
            CellShape::Polygon(v) => {
                let n = v.len();
                let mut orient = 0i8;
                for i in 0..n {
                    let s = sign(&cross(&v[i], &v[(i + 1) % n], p));
                    if s == 0 {
                        return false;
                    }
                    if orient != 0 && s != orient {
                        return false;
                    }
                    orient = s;
                }
                true
            }
            CellShape::Arc(v) => {
                if v.len() == 1 {
                    return v[0].as_slice() == p;
                }
                v.windows(2).any(|w| on_segment(&w[0], &w[1], p))
            }
        }
    }
}

fn box_corners(lo: &[Rational], hi: &[Rational]) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = alloc::vec![Vec::new()];
    for (a, b) in lo.iter().zip(hi) {
        let mut next = Vec::with_capacity(out.len() * 2);
        for c in &out {
            let mut x = c.clone();
            x.push(a.clone());
            next.push(x);
            if a != b {
                let mut y = c.clone();
                y.push(b.clone());
                next.push(y);
            }
        }
        out = next;
    }
    out
}

/// `(b − a) × (c − a)`.
pub(crate) fn cross(a: &[Rational], b: &[Rational], c: &[Rational]) -> Rational {
    (&b[0] - &a[0]) * (&c[1] - &a[1]) - (&b[1] - &a[1]) * (&c[0] - &a[0])
}

fn on_segment(a: &[Rational], b: &[Rational], p: &[Rational]) -> bool {
    let dim = a.len();
    // p = a + t (b − a) with 0 <= t <= 1, checked coordinatewise.
    let mut t: Option<Rational> = None;
    for k in 0..dim {
        let d = &b[k] - &a[k];
        let e = &p[k] - &a[k];
        if d.is_zero() {
            if !e.is_zero() {
                return false;
            }
            continue;
        }
        let tk = e / d;
        match &t {
            Some(t0) if *t0 != tk => return false,
            _ => t = Some(tk),
        }
    }
    match t {
        Some(t) => !t.is_negative() && t <= Rational::from_integer(1.into()),
        None => true,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub shape: CellShape,
    /// Indices into the covered direction set.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellCover {
    pub omega: DirectionSet,
    pub cells: Vec<Cell>,
    /// One member index per cell: the chosen element `v_j` of that cell.
    pub representatives: Vec<usize>,
}

impl CellCover {
    /// Validates and builds a cover.
    pub fn new(omega: DirectionSet, cells: Vec<Cell>, representatives: Vec<usize>) -> Result<Self> {
        let c = CellCover { omega, cells, representatives };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::Empty("cover has no cells"));
        }
        if self.representatives.len() != self.cells.len() {
            return Err(Error::invalid("need exactly one representative per cell"));
        }
        let n = self.omega.len();
        let mut covered = alloc::vec![false; n];
        for (j, cell) in self.cells.iter().enumerate() {
            cell.shape.check()?;
            if cell.shape.dim() != self.omega.dim() {
                return Err(Error::DimMismatch { expected: self.omega.dim(), found: cell.shape.dim() });
            }
            if cell.members.is_empty() {
                return Err(Error::invalid(format!("cell {j} has no members")));
            }
            for &m in &cell.members {
                if m >= n {
                    return Err(Error::invalid(format!("cell {j} lists member {m} out of range")));
                }
                if !cell.shape.contains(self.omega.point(m)) {
                    return Err(Error::invalid(format!("member {m} does not lie in cell {j}")));
                }
                covered[m] = true;
            }
            if !cell.members.contains(&self.representatives[j]) {
                return Err(Error::invalid(format!("representative of cell {j} is not a member")));
            }
        }
        if let Some(i) = covered.iter().position(|c| !c) {
            return Err(Error::invalid(format!("point {i} is not covered")));
        }
        Ok(())
    }

    pub fn max_members(&self) -> usize {
        self.cells.iter().map(|c| c.members.len()).max().unwrap_or(0)
    }

    /// The set 𝒪 of representatives, in cell order.
    pub fn representative_set(&self) -> Result<DirectionSet> {
        let mut idx = self.representatives.clone();
        idx.dedup();
        let mut seen = alloc::collections::BTreeSet::new();
        idx.retain(|i| seen.insert(*i));
        self.omega.subset(&idx, format!("reps({})", self.omega.label()))
    }

    /// `Ω_j` for cell `j`.
    pub fn cell_set(&self, j: usize) -> Result<DirectionSet> {
        self.omega
            .subset(&self.cells[j].members, format!("cell{}({})", j, self.omega.label()))
    }
}

pub fn cell_hits_hyperplane(cell: &Cell, h: &Hyperplane) -> bool {
    cell.shape.hits(h)
}

/// Number of cells meeting the zero set of `P_u`.
pub fn stab_count(cover: &CellCover, h: &Hyperplane) -> usize {
    cover.cells.iter().filter(|c| c.shape.hits(h)).count()
}

/// Bounding box of the points, widened so that it strictly contains them:
/// half the extent on each side, or one unit on axes of zero extent.
pub(crate) fn padded_bounds(points: &[Vec<Rational>], dim: usize) -> (Vec<Rational>, Vec<Rational>) {
    let mut lo = Vec::with_capacity(dim);
    let mut hi = Vec::with_capacity(dim);
    for k in 0..dim {
        let a = points.iter().map(|p| &p[k]).min().cloned().unwrap_or_else(Rational::zero);
        let b = points.iter().map(|p| &p[k]).max().cloned().unwrap_or_else(Rational::zero);
        let ext = &b - &a;
        let pad = if ext.is_zero() {
            Rational::from_integer(1.into())
        } else {
            ext / Rational::from_integer(2.into())
        };
        lo.push(a - &pad);
        hi.push(b + pad);
    }
    (lo, hi)
}
