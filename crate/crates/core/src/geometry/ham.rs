//! Exact ham-sandwich lines for two finite planar point multisets.
//!
//! If some line bisects both sets, rotating it about one of its points until
//! it meets a second point only moves points onto the line. So it suffices
//! to test the lines through pairs of distinct points. For each pivot the
//! other points are sorted by direction, and side counts for every line
//! through the pivot come from prefix sums.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;

use super::frame::Frame;
use super::Hyperplane;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SideCounts {
    pub pos: usize,
    pub neg: usize,
    pub on: usize,
}

impl SideCounts {
    pub fn of(h: &Hyperplane, pts: &[Vec<Rational>]) -> SideCounts {
        let mut s = SideCounts::default();
        for p in pts {
            match h.sign_at(p) {
                1 => s.pos += 1,
                -1 => s.neg += 1,
                _ => s.on += 1,
            }
        }
        s
    }

    pub fn balanced(&self, total: usize) -> bool {
        let half = total.div_ceil(2);
        self.pos <= half && self.neg <= half
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamSandwichCut {
    /// Positive side is the left of the direction the line was found along.
    pub line: Hyperplane,
    pub a: SideCounts,
    pub b: SideCounts,
}

pub fn is_ham_sandwich(h: &Hyperplane, a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
    SideCounts::of(h, a).balanced(a.len()) && SideCounts::of(h, b).balanced(b.len())
}

#[derive(Clone, Copy, Default)]
struct Tally {
    upper_a: usize,
    lower_a: usize,
    upper_b: usize,
    lower_b: usize,
}

pub fn ham_sandwich_line(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Result<HamSandwichCut> {
    for p in a.iter().chain(b) {
        if p.len() != 2 {
            return Err(Error::DimMismatch { expected: 2, found: p.len() });
        }
    }
    let finish = |line: Hyperplane| HamSandwichCut {
        a: SideCounts::of(&line, a),
        b: SideCounts::of(&line, b),
        line,
    };
    let frame = Frame::for_points(a.iter().chain(b));
    let ia: Vec<Vec<i64>> = a.iter().map(|p| frame.to_int(p)).collect::<Result<_>>()?;
    let ib: Vec<Vec<i64>> = b.iter().map(|p| frame.to_int(p)).collect::<Result<_>>()?;
    let mut pivots: Vec<&Vec<i64>> = Vec::new();
    for p in ia.iter().chain(&ib) {
        if !pivots.contains(&p) {
            pivots.push(p);
        }
    }
    let scale = frame.scale_rational();
    let to_line = |p: &[i64], dx: i128, dy: i128| -> Result<Hyperplane> {
        let r = |x: i128| Rational::from_integer(BigInt::from(x));
        let c = dy * p[0] as i128 - dx * p[1] as i128;
        Hyperplane::from_rationals(&[r(-dy) * &scale, r(dx) * &scale, r(c)])
    };
    if pivots.len() <= 1 {
        let p = pivots.first().map(|p| p.as_slice()).unwrap_or(&[0, 0]);
        return Ok(finish(to_line(p, 0, 1)?));
    }
    let half_a = ia.len().div_ceil(2);
    let half_b = ib.len().div_ceil(2);
    for p in pivots {
        // (direction in the upper half plane, lower flag, from A)
        let mut dirs: Vec<(i128, i128, bool, bool)> = Vec::new();
        let mut total = Tally::default();
        for (pts, in_a) in [(&ia, true), (&ib, false)] {
            for q in pts.iter() {
                let mut dx = q[0] as i128 - p[0] as i128;
                let mut dy = q[1] as i128 - p[1] as i128;
                if dx == 0 && dy == 0 {
                    continue;
                }
                let lower = dy < 0 || (dy == 0 && dx < 0);
                if lower {
                    dx = -dx;
                    dy = -dy;
                }
                bump(&mut total, lower, in_a);
                dirs.push((dx, dy, lower, in_a));
            }
        }
        dirs.sort_by(|u, v| {
            let c = u.0 * v.1 - u.1 * v.0;
            if c > 0 {
                Ordering::Less
            } else if c < 0 {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        });
        let mut before = Tally::default();
        let mut i = 0;
        while i < dirs.len() {
            let (dx, dy, _, _) = dirs[i];
            let mut group = Tally::default();
            let mut j = i;
            while j < dirs.len() && dirs[j].0 * dy - dirs[j].1 * dx == 0 {
                bump(&mut group, dirs[j].2, dirs[j].3);
                j += 1;
            }
            let upper_a_after = total.upper_a - before.upper_a - group.upper_a;
            let lower_a_after = total.lower_a - before.lower_a - group.lower_a;
            let upper_b_after = total.upper_b - before.upper_b - group.upper_b;
            let lower_b_after = total.lower_b - before.lower_b - group.lower_b;
            let left_a = upper_a_after + before.lower_a;
            let right_a = before.upper_a + lower_a_after;
            let left_b = upper_b_after + before.lower_b;
            let right_b = before.upper_b + lower_b_after;
            if left_a <= half_a && right_a <= half_a && left_b <= half_b && right_b <= half_b {
                return Ok(finish(to_line(p, dx, dy)?));
            }
            before.upper_a += group.upper_a;
            before.lower_a += group.lower_a;
            before.upper_b += group.upper_b;
            before.lower_b += group.lower_b;
            i = j;
        }
    }
    Err(Error::Infeasible("no bisecting line through two points was found".into()))
}

fn bump(t: &mut Tally, lower: bool, in_a: bool) {
    match (lower, in_a) {
        (false, true) => t.upper_a += 1,
        (true, true) => t.lower_a += 1,
        (false, false) => t.upper_b += 1,
        (true, false) => t.lower_b += 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use alloc::vec;

    fn pts(v: &[(i64, i64)]) -> Vec<Vec<Rational>> {
        v.iter().map(|&(x, y)| vec![int(x), int(y)]).collect()
    }

    #[test]
    fn square_corners() {
        let a = pts(&[(0, 0), (1, 0)]);
        let b = pts(&[(0, 1), (1, 1)]);
        let vertical = Hyperplane::from_rationals(&[int(1), int(0), rat(-1, 2)]).unwrap();
        assert!(is_ham_sandwich(&vertical, &a, &b));
        let cut = ham_sandwich_line(&a, &b).unwrap();
        assert!(is_ham_sandwich(&cut.line, &a, &b));
    }

    #[test]
    fn single_points() {
        let a = pts(&[(3, 1)]);
        let b = pts(&[(-2, 5)]);
        let cut = ham_sandwich_line(&a, &b).unwrap();
        assert_eq!(cut.a.on + cut.b.on, 2);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(ham_sandwich_line(&[], &[]).is_ok());
        let a = pts(&[(1, 1), (1, 1), (1, 1)]);
        let cut = ham_sandwich_line(&a, &a).unwrap();
        assert_eq!(cut.a.on, 3);
        let line = pts(&[(0, 0), (1, 1), (2, 2), (3, 3)]);
        let cut = ham_sandwich_line(&line, &pts(&[(5, 0)])).unwrap();
        assert!(is_ham_sandwich(&cut.line, &line, &pts(&[(5, 0)])));
    }

    #[test]
    fn unbalanced_line_rejected() {
        let a = pts(&[(0, 0), (1, 0), (2, 0)]);
        let h = Hyperplane::from_integers(&[1, 0, 5]).unwrap();
        assert!(!is_ham_sandwich(&h, &a, &[]));
    }
}
