//! Arithmetic in the prime field of order `p = 2^61 - 1`.
//!
//! Every value is kept in canonical form (`0 <= v < p`). Products are
//! reduced with Mersenne folding: for `x < 2^122`, `x mod p` is obtained from
//! `(x & p) + (x >> 61)` followed by one more fold and a conditional subtract.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::RngCore;
use thiserror::Error;

/// The field modulus, `2^61 - 1`.
pub const MODULUS: u64 = (1u64 << 61) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("value {0} is not in canonical form")]
    NonCanonical(u64),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem(u64);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);
    /// `2^{-1} = (p + 1) / 2 = 2^60`.
    pub const HALF: FieldElem = FieldElem(1u64 << 60);

    /// Reduces an arbitrary `u64` into the field.
    #[inline]
    pub const fn new(value: u64) -> Self {
        // value < 2^64 = 8 * 2^61, a single fold leaves < 2^61 + 8.
        let folded = (value & MODULUS) + (value >> 61);
        if folded >= MODULUS {
            FieldElem(folded - MODULUS)
        } else {
            FieldElem(folded)
        }
    }

    /// Accepts only canonical representatives.
    pub const fn from_canonical(value: u64) -> Result<Self, FieldError> {
        if value < MODULUS {
            Ok(FieldElem(value))
        } else {
            Err(FieldError::NonCanonical(value))
        }
    }

    #[inline]
    pub const fn value(self) -> u64 {
        self.0
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub const fn from_bool(b: bool) -> Self {
        if b {
            Self::ONE
        } else {
            Self::ZERO
        }
    }

    #[inline]
    fn reduce128(x: u128) -> u64 {
        let lo = (x as u64) & MODULUS;
        let hi = (x >> 61) as u64;
        // lo < 2^61 and hi < 2^61 for x < 2^122, so the sum fits in a u64.
        let s = lo + hi;
        let s = (s & MODULUS) + (s >> 61);
        if s >= MODULUS {
            s - MODULUS
        } else {
            s
        }
    }

    pub fn pow(self, mut exp: u64) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base *= base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat's little theorem.
    pub fn inv(self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(MODULUS - 2))
    }

    pub const fn half() -> Self {
        Self::HALF
    }

    /// `2^k mod p`; since `2^61 = 1` this is a rotation of the exponent.
    pub const fn pow2(k: u64) -> Self {
        FieldElem(1u64 << (k % 61))
    }

    /// Uniform sample by rejection on 61-bit draws.
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        loop {
            let candidate = rng.next_u64() >> 3;
            if candidate < MODULUS {
                return FieldElem(candidate);
            }
        }
    }

    pub fn to_le_bytes(self) -> [u8; 8] {
        self.0.to_le_bytes()
    }

    pub fn from_le_bytes(bytes: [u8; 8]) -> Result<Self, FieldError> {
        Self::from_canonical(u64::from_le_bytes(bytes))
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F({})", self.0)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for FieldElem {
    fn from(value: u64) -> Self {
        Self::new(value)
    }
}

impl From<bool> for FieldElem {
    fn from(value: bool) -> Self {
        Self::from_bool(value)
    }
}

impl Add for FieldElem {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        // both < 2^61, sum < 2^62
        let s = self.0 + rhs.0;
        if s >= MODULUS {
            FieldElem(s - MODULUS)
        } else {
            FieldElem(s)
        }
    }
}

impl Sub for FieldElem {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        if self.0 >= rhs.0 {
            FieldElem(self.0 - rhs.0)
        } else {
            FieldElem(self.0 + MODULUS - rhs.0)
        }
    }
}

impl Neg for FieldElem {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::ZERO - self
    }
}

impl Mul for FieldElem {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        FieldElem(Self::reduce128(self.0 as u128 * rhs.0 as u128))
    }
}

impl AddAssign for FieldElem {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for FieldElem {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for FieldElem {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Sum for FieldElem {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl Product for FieldElem {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ONE, |a, b| a * b)
    }
}
