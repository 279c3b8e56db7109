//! Arithmetic in GF(p) for p = 2^61 - 1 (a Mersenne prime).
//!
//! Used as the exact backend of the value-rank deduplicator: invariant values
//! on rational jet samples are reduced mod p, so linear-dependence tests are
//! integer-exact and independent of floating-point tolerances.

use crate::scalar::{Scalar, ScalarError, ScalarResult};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

pub const GF_P: u64 = (1u64 << 61) - 1;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gf61(u64);

impl std::fmt::Debug for Gf61 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Gf61({})", self.0)
    }
}

impl Gf61 {
    pub fn new(v: u64) -> Self {
        Gf61(v % GF_P)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn from_i64(v: i64) -> Self {
        let m = v.rem_euclid(GF_P as i64) as u64;
        Gf61(m)
    }

    fn from_bigint(v: &BigInt) -> Self {
        let p = BigInt::from(GF_P);
        let m = ((v % &p) + &p) % &p;
        Gf61(m.to_u64().unwrap())
    }

    pub fn mul_raw(self, rhs: Self) -> Self {
        let wide = (self.0 as u128) * (rhs.0 as u128);
        // fold 2^61 ≡ 1 twice; the result of one fold is < 2^62
        let folded = (wide & (GF_P as u128)) + (wide >> 61);
        let folded = (folded & (GF_P as u128)) + (folded >> 61);
        let mut r = folded as u64;
        if r >= GF_P {
            r -= GF_P;
        }
        Gf61(r)
    }

    pub fn inv(self) -> ScalarResult<Self> {
        if self.0 == 0 {
            return Err(ScalarError::DivisionByZero);
        }
        // Fermat: a^(p-2)
        self.pow_u64(GF_P - 2)
    }

    fn pow_u64(self, mut e: u64) -> ScalarResult<Self> {
        let mut base = self;
        let mut acc = Gf61(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_raw(base);
            }
            base = base.mul_raw(base);
            e >>= 1;
        }
        Ok(acc)
    }
}

impl Scalar for Gf61 {
    fn zero() -> Self {
        Gf61(0)
    }
    fn one() -> Self {
        Gf61(1)
    }
    /// Panics on denominators divisible by p. Sampling uses dyadic rationals,
    /// so this never triggers in the deduplication pipeline.
    fn from_rational(r: &BigRational) -> Self {
        let n = Self::from_bigint(&r.numer().abs());
        let n = if r.numer().is_negative() { Scalar::neg(&n) } else { n };
        let d = Self::from_bigint(r.denom());
        n.mul_raw(d.inv().expect("denominator divisible by 2^61-1"))
    }
    fn add(&self, rhs: &Self) -> Self {
        let mut s = self.0 + rhs.0;
        if s >= GF_P {
            s -= GF_P;
        }
        Gf61(s)
    }
    fn sub(&self, rhs: &Self) -> Self {
        let s = if self.0 >= rhs.0 {
            self.0 - rhs.0
        } else {
            self.0 + GF_P - rhs.0
        };
        Gf61(s)
    }
    fn mul(&self, rhs: &Self) -> Self {
        self.mul_raw(*rhs)
    }
    fn neg(&self) -> Self {
        if self.0 == 0 {
            *self
        } else {
            Gf61(GF_P - self.0)
        }
    }
    fn div(&self, rhs: &Self) -> ScalarResult<Self> {
        Ok(self.mul_raw(rhs.inv()?))
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn from_i64(v: i64) -> Self {
        Gf61::from_i64(v)
    }
}
