//! Univariate polynomials of degree at most two.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::field::{FieldElem, FieldError};

/// `c0 + c1*x + c2*x^2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    pub c0: FieldElem,
    pub c1: FieldElem,
    pub c2: FieldElem,
}

pub const WIRE_LEN: usize = 24;

impl UniPoly {
    pub const ZERO: UniPoly = UniPoly::constant(FieldElem::ZERO);
    pub const ONE: UniPoly = UniPoly::constant(FieldElem::ONE);
    /// The identity polynomial `x`.
    pub const X: UniPoly = UniPoly::new(FieldElem::ZERO, FieldElem::ONE, FieldElem::ZERO);
    /// `1 - x`.
    pub const ONE_MINUS_X: UniPoly =
        UniPoly::new(FieldElem::ONE, FieldElem::new(crate::field::MODULUS - 1), FieldElem::ZERO);

    pub const fn new(c0: FieldElem, c1: FieldElem, c2: FieldElem) -> Self {
        UniPoly { c0, c1, c2 }
    }

    pub const fn constant(c: FieldElem) -> Self {
        UniPoly::new(c, FieldElem::ZERO, FieldElem::ZERO)
    }

    pub const fn linear(c0: FieldElem, c1: FieldElem) -> Self {
        UniPoly::new(c0, c1, FieldElem::ZERO)
    }

    pub fn from_u64s(c0: u64, c1: u64, c2: u64) -> Self {
        UniPoly::new(c0.into(), c1.into(), c2.into())
    }

    pub fn degree(&self) -> Option<usize> {
        if !self.c2.is_zero() {
            Some(2)
        } else if !self.c1.is_zero() {
            Some(1)
        } else if !self.c0.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn is_constant(&self) -> bool {
        self.c1.is_zero() && self.c2.is_zero()
    }

    #[inline]
    pub fn eval(&self, r: FieldElem) -> FieldElem {
        (self.c2 * r + self.c1) * r + self.c0
    }

    /// Folds `x^2` onto `x`; the result agrees with `self` on 0 and 1.
    pub fn degree_reduce(&self) -> UniPoly {
        UniPoly::linear(self.c0, self.c1 + self.c2)
    }

    /// The unique polynomial of degree at most two through `(0,v0), (1,v1), (2,v2)`.
    pub fn interpolate3(v0: FieldElem, v1: FieldElem, v2: FieldElem) -> UniPoly {
        // Newton form: v0 + d1*x + d2*x(x-1) with d1 = v1-v0, d2 = (v2 - 2v1 + v0)/2.
        let d1 = v1 - v0;
        let d2 = (v2 - v1 - v1 + v0) * FieldElem::HALF;
        UniPoly::new(v0, d1 - d2, d2)
    }

    /// Product of two polynomials.
    ///
    /// # Panics
    /// If the product has degree above two.
    pub fn mul(&self, rhs: &UniPoly) -> UniPoly {
        self.checked_mul(rhs).expect("product of univariate polynomials exceeds degree 2")
    }

    pub fn checked_mul(&self, rhs: &UniPoly) -> Option<UniPoly> {
        let d3 = self.c1 * rhs.c2 + self.c2 * rhs.c1;
        let d4 = self.c2 * rhs.c2;
        if !d3.is_zero() || !d4.is_zero() {
            return None;
        }
        Some(UniPoly::new(
            self.c0 * rhs.c0,
            self.c0 * rhs.c1 + self.c1 * rhs.c0,
            self.c0 * rhs.c2 + self.c1 * rhs.c1 + self.c2 * rhs.c0,
        ))
    }

    pub fn scale(&self, k: FieldElem) -> UniPoly {
        UniPoly::new(self.c0 * k, self.c1 * k, self.c2 * k)
    }

    pub fn to_le_bytes(&self) -> [u8; WIRE_LEN] {
        let mut out = [0u8; WIRE_LEN];
        out[0..8].copy_from_slice(&self.c0.to_le_bytes());
        out[8..16].copy_from_slice(&self.c1.to_le_bytes());
        out[16..24].copy_from_slice(&self.c2.to_le_bytes());
        out
    }

    pub fn from_le_bytes(bytes: &[u8; WIRE_LEN]) -> Result<UniPoly, FieldError> {
        let word = |i: usize| {
            let mut w = [0u8; 8];
            w.copy_from_slice(&bytes[i * 8..i * 8 + 8]);
            FieldElem::from_le_bytes(w)
        };
        Ok(UniPoly::new(word(0)?, word(1)?, word(2)?))
    }
}

impl From<FieldElem> for UniPoly {
    fn from(c: FieldElem) -> Self {
        UniPoly::constant(c)
    }
}

impl Add for UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: UniPoly) -> UniPoly {
        UniPoly::new(self.c0 + rhs.c0, self.c1 + rhs.c1, self.c2 + rhs.c2)
    }
}

impl Sub for UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: UniPoly) -> UniPoly {
        UniPoly::new(self.c0 - rhs.c0, self.c1 - rhs.c1, self.c2 - rhs.c2)
    }
}

impl Neg for UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::new(-self.c0, -self.c1, -self.c2)
    }
}

impl Mul for UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: UniPoly) -> UniPoly {
        UniPoly::mul(&self, &rhs)
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} + {}x + {}x^2]", self.c0, self.c1, self.c2)
    }
}
