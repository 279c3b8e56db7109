//! Dimension counts for the invariant classification problem.

use crate::error::{CurvError, Result};
use num_bigint::BigInt;

fn factorial(k: u64) -> BigInt {
    let mut acc = BigInt::from(1);
    for i in 2..=k {
        acc *= i;
    }
    acc
}

/// Number of algebraically independent scalars constructible from the
/// curvature tensor and its first `p` covariant derivatives on a generic
/// n-dimensional geometry:
///
///   N(n,p) = n(n+1)(n+p+2)! / (2 n! (p+2)!) − (n+p+3)! / ((n−1)! (p+3)!) + n
///
/// The surface case N(2,2) = 1 is a genuine exception to the closed form.
pub fn independent_invariant_count(n: u32, p: u32) -> Result<BigInt> {
    if n == 0 {
        return Err(CurvError::Invalid("dimension must be positive".into()));
    }
    if n == 2 && p == 2 {
        return Ok(BigInt::from(1));
    }
    let (n, p) = (n as u64, p as u64);
    let first = BigInt::from(n) * (n + 1) * factorial(n + p + 2)
        / (BigInt::from(2) * factorial(n) * factorial(p + 2));
    let second = factorial(n + p + 3) / (factorial(n - 1) * factorial(p + 3));
    Ok(first - second + n)
}

/// Worst-case number of covariant derivatives the frame classification
/// algorithm can need before it stabilizes: q = N0 + n + 1, where N0 is the
/// dimension of the curvature tensor's isotropy group.
pub fn derivative_order_bound(isotropy_dim: u32, dim: u32) -> u32 {
    isotropy_dim + dim + 1
}
