//! Numeric backends for expression and tensor evaluation.
//!
//! Everything downstream (jets, curvature pipelines, rank tests) is generic
//! over [`Scalar`], so a single tensor engine serves f64, exact rationals,
//! and the mod-p field used by the value-rank deduplicator.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use std::fmt::Debug;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScalarError {
    DivisionByZero,
    /// Outside the function's real domain (ln of a non-positive value, even
    /// root of a negative value).
    Domain(String),
    /// The backend cannot represent the result (e.g. sin over rationals).
    Unsupported(&'static str),
}

impl std::fmt::Display for ScalarError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarError::DivisionByZero => write!(f, "division by zero"),
            ScalarError::Domain(msg) => write!(f, "domain error: {msg}"),
            ScalarError::Unsupported(op) => write!(f, "operation `{op}` unsupported in this mode"),
        }
    }
}

pub type ScalarResult<T> = Result<T, ScalarError>;

/// A commutative ring (usually a field) with optional analytic operations.
///
/// Ring operations are total except `div`; analytic operations default to
/// `Unsupported` so exact backends only implement what they can honor.
pub trait Scalar: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &BigRational) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, rhs: &Self) -> ScalarResult<Self>;
    fn is_zero(&self) -> bool;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    /// Integer powers work in any ring; rational exponents need `sqrt`/roots.
    fn pow_rational(&self, e: &BigRational) -> ScalarResult<Self> {
        if e.is_integer() {
            let n = e
                .to_integer()
                .to_i64()
                .ok_or(ScalarError::Unsupported("huge exponent"))?;
            return self.pow_i64(n);
        }
        // x^(p/q) = (x^(1/q))^p, via sqrt only when q is a power of two
        let denom = e.denom().clone();
        let mut q = denom
            .to_u64()
            .ok_or(ScalarError::Unsupported("huge exponent denominator"))?;
        let mut base = self.clone();
        while q > 1 {
            if q % 2 != 0 {
                return Err(ScalarError::Unsupported("non-dyadic fractional exponent"));
            }
            base = base.sqrt()?;
            q /= 2;
        }
        let p = e
            .numer()
            .to_i64()
            .ok_or(ScalarError::Unsupported("huge exponent"))?;
        base.pow_i64(p)
    }

    fn pow_i64(&self, mut n: i64) -> ScalarResult<Self> {
        let mut base = if n < 0 {
            n = -n;
            Self::one().div(self)?
        } else {
            self.clone()
        };
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        Ok(acc)
    }

    fn sqrt(&self) -> ScalarResult<Self> {
        Err(ScalarError::Unsupported("sqrt"))
    }
    fn sin(&self) -> ScalarResult<Self> {
        Err(ScalarError::Unsupported("sin"))
    }
    fn cos(&self) -> ScalarResult<Self> {
        Err(ScalarError::Unsupported("cos"))
    }
    fn sinh(&self) -> ScalarResult<Self> {
        Err(ScalarError::Unsupported("sinh"))
    }
    fn cosh(&self) -> ScalarResult<Self> {
        Err(ScalarError::Unsupported("cosh"))
    }
    fn exp(&self) -> ScalarResult<Self> {
        Err(ScalarError::Unsupported("exp"))
    }
    fn ln(&self) -> ScalarResult<Self> {
        Err(ScalarError::Unsupported("ln"))
    }
    fn acos(&self) -> ScalarResult<Self> {
        Err(ScalarError::Unsupported("acos"))
    }
}

/// Scalars that can be differentiated along chart coordinates: symbolic
/// expressions (by name) and jets (by variable slot). The tensor engine is
/// generic over this, which is what lets one curvature pipeline produce both
/// symbolic components and Taylor data.
pub trait DiffScalar: Scalar {
    fn partial_dir(&self, coords: &[String], i: usize) -> crate::error::Result<Self>;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().expect("rational convertible to f64")
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, rhs: &Self) -> ScalarResult<Self> {
        if *rhs == 0.0 {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(self / rhs)
        }
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn pow_rational(&self, e: &BigRational) -> ScalarResult<Self> {
        if e.is_integer() {
            if let Some(n) = e.to_integer().to_i32() {
                if *self == 0.0 && n < 0 {
                    return Err(ScalarError::DivisionByZero);
                }
                return Ok(self.powi(n));
            }
        }
        let ef = e.to_f64().ok_or(ScalarError::Unsupported("huge exponent"))?;
        if *self < 0.0 {
            return Err(ScalarError::Domain(format!(
                "fractional power of negative value {self}"
            )));
        }
        if *self == 0.0 && ef < 0.0 {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(self.powf(ef))
    }
    fn sqrt(&self) -> ScalarResult<Self> {
        if *self < 0.0 {
            Err(ScalarError::Domain(format!("sqrt of negative value {self}")))
        } else {
            Ok(f64::sqrt(*self))
        }
    }
    fn sin(&self) -> ScalarResult<Self> {
        Ok(f64::sin(*self))
    }
    fn cos(&self) -> ScalarResult<Self> {
        Ok(f64::cos(*self))
    }
    fn sinh(&self) -> ScalarResult<Self> {
        Ok(f64::sinh(*self))
    }
    fn cosh(&self) -> ScalarResult<Self> {
        Ok(f64::cosh(*self))
    }
    fn exp(&self) -> ScalarResult<Self> {
        Ok(f64::exp(*self))
    }
    fn ln(&self) -> ScalarResult<Self> {
        if *self <= 0.0 {
            Err(ScalarError::Domain(format!("ln of non-positive value {self}")))
        } else {
            Ok(f64::ln(*self))
        }
    }
    fn acos(&self) -> ScalarResult<Self> {
        if self.abs() > 1.0 {
            Err(ScalarError::Domain(format!("acos of value {self} outside [-1, 1]")))
        } else {
            Ok(f64::acos(*self))
        }
    }
}

/// Exact mode: fully supported ring operations; analytic functions succeed
/// only at the handful of rational points with rational values (sin 0 = 0,
/// exp 0 = 1, ln 1 = 0, sqrt of a perfect rational square).
impl Scalar for BigRational {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, rhs: &Self) -> ScalarResult<Self> {
        if num_traits::Zero::is_zero(rhs) {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(self / rhs)
        }
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn sqrt(&self) -> ScalarResult<Self> {
        if self.is_negative() {
            return Err(ScalarError::Domain("sqrt of negative rational".into()));
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Ok(BigRational::new(n, d))
        } else {
            Err(ScalarError::Unsupported("irrational square root"))
        }
    }
    fn sin(&self) -> ScalarResult<Self> {
        rational_at_zero(self, num_traits::Zero::zero(), "sin")
    }
    fn cos(&self) -> ScalarResult<Self> {
        rational_at_zero(self, num_traits::One::one(), "cos")
    }
    fn sinh(&self) -> ScalarResult<Self> {
        rational_at_zero(self, num_traits::Zero::zero(), "sinh")
    }
    fn cosh(&self) -> ScalarResult<Self> {
        rational_at_zero(self, num_traits::One::one(), "cosh")
    }
    fn exp(&self) -> ScalarResult<Self> {
        rational_at_zero(self, num_traits::One::one(), "exp")
    }
    fn ln(&self) -> ScalarResult<Self> {
        if self == &BigRational::from_integer(1.into()) {
            Ok(num_traits::Zero::zero())
        } else {
            Err(ScalarError::Unsupported("irrational logarithm"))
        }
    }
}

fn rational_at_zero(arg: &BigRational, at0: BigRational, name: &'static str) -> ScalarResult<BigRational> {
    if num_traits::Zero::is_zero(arg) {
        Ok(at0)
    } else {
        Err(ScalarError::Unsupported(name))
    }
}
