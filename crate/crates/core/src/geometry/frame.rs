//! Integer coordinates for exact predicates.
//!
//! Rational points are multiplied by the least common denominator. The
//! resulting coordinates must fit in 61 bits so that 2×2 determinants and
//! affine evaluations fit in `i128`.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::rational::{common_denominator, scaled_integer, Rational};

pub(crate) const COORD_LIMIT: i64 = 1 << 61;

pub(crate) struct Frame {
    pub scale: BigInt,
}

impl Frame {
    pub fn for_points<'a>(points: impl IntoIterator<Item = &'a Vec<Rational>>) -> Frame {
        let scale = common_denominator(points.into_iter().flat_map(|p| p.iter()));
        Frame { scale }
    }

    pub fn to_int(&self, p: &[Rational]) -> Result<Vec<i64>> {
        p.iter()
            .map(|q| {
                scaled_integer(q, &self.scale)
                    .and_then(|v| v.to_i64())
                    .filter(|v| v.abs() <= COORD_LIMIT)
                    .ok_or_else(|| {
                        Error::Overflow(format!("coordinate {q} does not fit the exact integer kernel"))
                    })
            })
            .collect()
    }

    /// Scaled coordinates without the size limit.
    pub fn to_big(&self, p: &[Rational]) -> Vec<BigInt> {
        p.iter()
            .map(|q| scaled_integer(q, &self.scale).expect("frame scale clears every denominator"))
            .collect()
    }

    pub fn scale_rational(&self) -> Rational {
        Rational::from_integer(self.scale.clone())
    }
}
