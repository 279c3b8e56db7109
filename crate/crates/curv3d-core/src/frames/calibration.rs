//! Exact consistency proofs for the frame dictionary.
//!
//! Everything here lives in the polynomial ring Q(sqrt2)[x_1..x_21], the 21
//! symbols standing for the canonical-frame scalar bundle: Psi0, Psi2, R,
//! their D/Del/delta derivatives, and the nine rotation coefficients. The
//! covariant gradient of the trace-free Ricci tensor is expanded from the
//! connection table in the parent module, contracted with the frame metric,
//! and compared coefficient by coefficient against the transcribed invariant
//! polynomials that `np` evaluates. Equality here is exact arithmetic over
//! the rationals, not a numeric spot check, so the derivative conventions,
//! the sqrt2 weights, and every signed coefficient are pinned at once.

use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;

pub const NSYM: usize = 21;

pub const PSI0: usize = 0;
pub const PSI2: usize = 1;
pub const R: usize = 2;
pub const D_PSI0: usize = 3;
pub const DEL_PSI0: usize = 4;
pub const DLT_PSI0: usize = 5;
pub const D_PSI2: usize = 6;
pub const DEL_PSI2: usize = 7;
pub const DLT_PSI2: usize = 8;
pub const D_R: usize = 9;
pub const DEL_R: usize = 10;
pub const DLT_R: usize = 11;
pub const ALPHA: usize = 12;
pub const EPSILON: usize = 13;
pub const LAMBDA: usize = 14;
pub const KAPPA: usize = 15;
pub const PI: usize = 16;
pub const GAMMA: usize = 17;
pub const TAU: usize = 18;
pub const SIGMA: usize = 19;
pub const NU: usize = 20;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// a + b*sqrt2 with rational parts.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Q2 {
    pub a: BigRational,
    pub b: BigRational,
}

impl Q2 {
    pub fn zero() -> Self {
        Q2 { a: rat(0, 1), b: rat(0, 1) }
    }

    pub fn int(n: i64) -> Self {
        Q2 { a: rat(n, 1), b: rat(0, 1) }
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Q2 { a: rat(n, d), b: rat(0, 1) }
    }

    /// n * sqrt2
    pub fn sqrt2(n: i64) -> Self {
        Q2 { a: rat(0, 1), b: rat(n, 1) }
    }

    pub fn is_zero(&self) -> bool {
        self.a == rat(0, 1) && self.b == rat(0, 1)
    }

    pub fn add(&self, o: &Self) -> Self {
        Q2 { a: &self.a + &o.a, b: &self.b + &o.b }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Q2 {
            a: &self.a * &o.a + rat(2, 1) * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }

    pub fn neg(&self) -> Self {
        Q2 { a: -self.a.clone(), b: -self.b.clone() }
    }

    pub fn to_f64(&self) -> f64 {
        let f = |x: &BigRational| {
            let n: f64 = x.numer().to_string().parse().unwrap();
            let d: f64 = x.denom().to_string().parse().unwrap();
            n / d
        };
        f(&self.a) + f(&self.b) * std::f64::consts::SQRT_2
    }
}

/// Multivariate polynomial over Q(sqrt2); zero coefficients are never stored,
/// so structural equality is polynomial identity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly(BTreeMap<[u8; NSYM], Q2>);

impl Poly {
    pub fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    pub fn constant(c: Q2) -> Self {
        let mut p = Poly::zero();
        p.push([0; NSYM], c);
        p
    }

    pub fn sym(i: usize) -> Self {
        Poly::term(Q2::int(1), &[i])
    }

    pub fn term(c: Q2, factors: &[usize]) -> Self {
        let mut key = [0u8; NSYM];
        for &f in factors {
            key[f] += 1;
        }
        let mut p = Poly::zero();
        p.push(key, c);
        p
    }

    fn push(&mut self, key: [u8; NSYM], c: Q2) {
        if c.is_zero() {
            return;
        }
        match self.0.get_mut(&key) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.0.remove(&key);
                } else {
                    *v = s;
                }
            }
            None => {
                self.0.insert(key, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.0 {
            out.push(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Poly(self.0.iter().map(|(k, c)| (*k, c.neg())).collect())
    }

    pub fn scale(&self, c: &Q2) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(k, v)| (*k, v.mul(c))).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Poly::zero();
        for (k1, c1) in &self.0 {
            for (k2, c2) in &o.0 {
                let mut k = *k1;
                for (i, e) in k2.iter().enumerate() {
                    k[i] += e;
                }
                out.push(k, c1.mul(c2));
            }
        }
        out
    }

    pub fn terms(&self) -> usize {
        self.0.len()
    }

    /// Numeric evaluation at a symbol assignment.
    pub fn eval_f64(&self, x: &[f64; NSYM]) -> f64 {
        let mut acc = 0.0;
        for (k, c) in &self.0 {
            let mut t = c.to_f64();
            for (i, &e) in k.iter().enumerate() {
                for _ in 0..e {
                    t *= x[i];
                }
            }
            acc += t;
        }
        acc
    }
}

/// Sum of (n/d) * product(factors) terms; the transcription format used for
/// the published invariant polynomials.
pub fn poly_terms(ts: &[(i64, i64, &[usize])]) -> Poly {
    let mut out = Poly::zero();
    for (n, d, fs) in ts {
        out = out.add(&Poly::term(Q2::frac(*n, *d), fs));
    }
    out
}

const L: usize = 0;
const N: usize = 1;
const M: usize = 2;

fn eta(i: usize, j: usize) -> i64 {
    [[0, -1, 0], [-1, 0, 0], [0, 0, 1]][i][j]
}

/// Canonical-frame components of the trace-free Ricci tensor.
fn s_entry(i: usize, j: usize) -> Poly {
    match (i.min(j), i.max(j)) {
        (L, L) | (N, N) => Poly::sym(PSI0),
        (L, N) => Poly::sym(PSI2),
        (M, M) => Poly::term(Q2::int(2), &[PSI2]),
        _ => Poly::zero(),
    }
}

/// Frame derivative e_k applied to a base scalar, given its three derivative
/// symbols. The raw m-leg derivative is sqrt2 * delta.
fn ek(k: usize, d: usize, del: usize, dlt: usize) -> Poly {
    match k {
        L => Poly::sym(d),
        N => Poly::sym(del),
        _ => Poly::term(Q2::sqrt2(1), &[dlt]),
    }
}

fn ek_s(i: usize, j: usize, k: usize) -> Poly {
    match (i.min(j), i.max(j)) {
        (L, L) | (N, N) => ek(k, D_PSI0, DEL_PSI0, DLT_PSI0),
        (L, N) => ek(k, D_PSI2, DEL_PSI2, DLT_PSI2),
        (M, M) => ek(k, D_PSI2, DEL_PSI2, DLT_PSI2).scale(&Q2::int(2)),
        _ => Poly::zero(),
    }
}

fn ek_r(k: usize) -> Poly {
    ek(k, D_R, DEL_R, DLT_R)
}

/// Coefficient of e_p in nabla_k e_i, from the connection expansion with
/// A = (2 eps, 2 gam, 2 sqrt2 alpha), B = (-sqrt2 kappa, -sqrt2 tau,
/// -2 sigma), C = (sqrt2 pi, sqrt2 nu, 2 lambda) in the (D, Del, m) slots.
fn conn(k: usize, i: usize, p: usize) -> Poly {
    let a = |k: usize| match k {
        L => Poly::term(Q2::int(2), &[EPSILON]),
        N => Poly::term(Q2::int(2), &[GAMMA]),
        _ => Poly::term(Q2::sqrt2(2), &[ALPHA]),
    };
    let b = |k: usize| match k {
        L => Poly::term(Q2::sqrt2(-1), &[KAPPA]),
        N => Poly::term(Q2::sqrt2(-1), &[TAU]),
        _ => Poly::term(Q2::int(-2), &[SIGMA]),
    };
    let c = |k: usize| match k {
        L => Poly::term(Q2::sqrt2(1), &[PI]),
        N => Poly::term(Q2::sqrt2(1), &[NU]),
        _ => Poly::term(Q2::int(2), &[LAMBDA]),
    };
    match (i, p) {
        (L, L) => a(k),
        (L, M) => b(k),
        (N, N) => a(k).neg(),
        (N, M) => c(k),
        (M, L) => c(k),
        (M, N) => b(k),
        _ => Poly::zero(),
    }
}

/// T_ijk = nabla_k S_ij expanded in the canonical frame:
/// e_k(S_ij) - S(nabla_k e_i, e_j) - S(e_i, nabla_k e_j).
fn grad_s() -> Vec<Poly> {
    let mut t = Vec::with_capacity(27);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut x = ek_s(i, j, k);
                for p in 0..3 {
                    x = x.sub(&conn(k, i, p).mul(&s_entry(p, j)));
                    x = x.sub(&conn(k, j, p).mul(&s_entry(i, p)));
                }
                t.push(x);
            }
        }
    }
    t
}

fn tidx(i: usize, j: usize, k: usize) -> usize {
    (i * 3 + j) * 3 + k
}

/// (1/4) nabla_c S_ab nabla^c S^ab, derived.
pub fn quarter_grad_s_squared() -> Poly {
    let t = grad_s();
    let mut acc = Poly::zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for i2 in 0..3 {
                    for j2 in 0..3 {
                        for k2 in 0..3 {
                            let w = eta(i, i2) * eta(j, j2) * eta(k, k2);
                            if w != 0 {
                                let prod = t[tidx(i, j, k)].mul(&t[tidx(i2, j2, k2)]);
                                acc = acc.add(&prod.scale(&Q2::frac(w, 4)));
                            }
                        }
                    }
                }
            }
        }
    }
    acc
}

/// (1/2) nabla_c S_ab nabla^b S^ac, derived.
pub fn half_grad_s_cross() -> Poly {
    let t = grad_s();
    let mut acc = Poly::zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for i2 in 0..3 {
                    for j2 in 0..3 {
                        for k2 in 0..3 {
                            let w = eta(i, i2) * eta(j, k2) * eta(k, j2);
                            if w != 0 {
                                let prod = t[tidx(i, j, k)].mul(&t[tidx(i2, j2, k2)]);
                                acc = acc.add(&prod.scale(&Q2::frac(w, 2)));
                            }
                        }
                    }
                }
            }
        }
    }
    acc
}

/// nabla_a S^a_b nabla^b R, derived.
pub fn div_s_dot_grad_r() -> Poly {
    let t = grad_s();
    let mut acc = Poly::zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for j2 in 0..3 {
                    let w = eta(i, k) * eta(j, j2);
                    if w != 0 {
                        let prod = t[tidx(i, j, k)].mul(&ek_r(j2));
                        acc = acc.add(&prod.scale(&Q2::int(w)));
                    }
                }
            }
        }
    }
    acc
}

/// nabla_a R nabla^a R, derived.
pub fn grad_r_squared() -> Poly {
    let mut acc = Poly::zero();
    for k in 0..3 {
        for k2 in 0..3 {
            let w = eta(k, k2);
            if w != 0 {
                acc = acc.add(&ek_r(k).mul(&ek_r(k2)).scale(&Q2::int(w)));
            }
        }
    }
    acc
}

/// (1/2) S_ab S^ab, derived.
pub fn half_s_squared() -> Poly {
    let mut acc = Poly::zero();
    for i in 0..3 {
        for j in 0..3 {
            for i2 in 0..3 {
                for j2 in 0..3 {
                    let w = eta(i, i2) * eta(j, j2);
                    if w != 0 {
                        acc = acc.add(&s_entry(i, j).mul(&s_entry(i2, j2)).scale(&Q2::frac(w, 2)));
                    }
                }
            }
        }
    }
    acc
}

/// -(1/6) S^a_b S^b_c S^c_a, derived.
pub fn neg_sixth_s_cubed() -> Poly {
    // mixed components M^i_j = eta^{ip} S_pj
    let mixed = |i: usize, j: usize| -> Poly {
        let mut acc = Poly::zero();
        for p in 0..3 {
            let w = eta(i, p);
            if w != 0 {
                acc = acc.add(&s_entry(p, j).scale(&Q2::int(w)));
            }
        }
        acc
    };
    let mut acc = Poly::zero();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                acc = acc.add(&mixed(a, b).mul(&mixed(b, c)).mul(&mixed(c, a)));
            }
        }
    }
    acc.scale(&Q2::frac(-1, 6))
}

/// Transcribed polynomial for nabla_a R nabla^a R.
pub fn gradient_square_poly() -> Poly {
    poly_terms(&[(-2, 1, &[D_R, DEL_R]), (2, 1, &[DLT_R, DLT_R])])
}

/// Transcribed polynomial for (1/4) nabla_c S_ab nabla^c S^ab.
pub fn sym_gradient_square_poly() -> Poly {
    poly_terms(&[
        (12, 1, &[TAU, PSI0, KAPPA, PSI2]),
        (12, 1, &[NU, PSI2, PI, PSI0]),
        (16, 1, &[GAMMA, PSI0, PSI0, EPSILON]),
        (-2, 1, &[TAU, PSI0, PSI0, PI]),
        (-18, 1, &[NU, PSI2, PSI2, KAPPA]),
        (-12, 1, &[SIGMA, SIGMA, PSI0, PSI2]),
        (4, 1, &[SIGMA, PSI0, PSI0, LAMBDA]),
        (36, 1, &[LAMBDA, PSI2, PSI2, SIGMA]),
        (-12, 1, &[LAMBDA, LAMBDA, PSI2, PSI0]),
        (-2, 1, &[KAPPA, PSI0, PSI0, NU]),
        (-18, 1, &[PI, PSI2, PSI2, TAU]),
        (-3, 1, &[D_PSI2, DEL_PSI2]),
        (-1, 1, &[DEL_PSI0, D_PSI0]),
        (-16, 1, &[ALPHA, ALPHA, PSI0, PSI0]),
        (1, 1, &[DLT_PSI0, DLT_PSI0]),
        (3, 1, &[DLT_PSI2, DLT_PSI2]),
    ])
}

/// Transcribed polynomial for (1/2) nabla_c S_ab nabla^b S^ac.
pub fn cross_gradient_square_poly() -> Poly {
    poly_terms(&[
        (-2, 1, &[PI, PSI0, DLT_PSI0]),
        (-8, 1, &[PI, PSI0, PSI0, ALPHA]),
        (-6, 1, &[DLT_PSI2, PI, PSI2]),
        (-1, 1, &[D_PSI2, DEL_PSI2]),
        (-1, 1, &[DEL_PSI0, D_PSI0]),
        (-1, 1, &[D_PSI2, D_PSI0]),
        (9, 1, &[TAU, TAU, PSI2, PSI2]),
        (1, 1, &[NU, NU, PSI0, PSI0]),
        (1, 1, &[KAPPA, KAPPA, PSI0, PSI0]),
        (-1, 1, &[DEL_PSI2, DEL_PSI0]),
        (4, 1, &[DLT_PSI2, DLT_PSI2]),
        (-18, 1, &[NU, PSI2, PSI2, KAPPA]),
        (-12, 1, &[SIGMA, SIGMA, PSI0, PSI2]),
        (4, 1, &[SIGMA, PSI0, PSI0, LAMBDA]),
        (36, 1, &[LAMBDA, PSI2, PSI2, SIGMA]),
        (-12, 1, &[LAMBDA, LAMBDA, PSI2, PSI0]),
        (4, 1, &[DEL_PSI2, LAMBDA, PSI0]),
        (6, 1, &[DLT_PSI2, TAU, PSI2]),
        (-2, 1, &[DLT_PSI2, NU, PSI0]),
        (4, 1, &[DEL_PSI2, GAMMA, PSI0]),
        (-12, 1, &[DEL_PSI2, SIGMA, PSI2]),
        (-4, 1, &[GAMMA, PSI0, D_PSI0]),
        (4, 1, &[DEL_PSI0, EPSILON, PSI0]),
        (-8, 1, &[ALPHA, PSI0, PSI0, TAU]),
        (2, 1, &[DLT_PSI0, TAU, PSI0]),
        (-6, 1, &[DLT_PSI0, NU, PSI2]),
        (6, 1, &[KAPPA, PSI2, DLT_PSI0]),
        (-4, 1, &[D_PSI2, EPSILON, PSI0]),
        (2, 1, &[DLT_PSI2, KAPPA, PSI0]),
        (-4, 1, &[D_PSI2, SIGMA, PSI0]),
        (12, 1, &[D_PSI2, LAMBDA, PSI2]),
        (6, 1, &[TAU, PSI0, KAPPA, PSI2]),
        (-2, 1, &[TAU, PSI0, PSI0, PI]),
        (16, 1, &[GAMMA, PSI0, PSI0, EPSILON]),
        (24, 1, &[ALPHA, PSI0, NU, PSI2]),
        (24, 1, &[KAPPA, PSI2, ALPHA, PSI0]),
        (-6, 1, &[TAU, PSI2, NU, PSI0]),
        (9, 1, &[PI, PI, PSI2, PSI2]),
        (-6, 1, &[KAPPA, PSI0, PI, PSI2]),
        (6, 1, &[NU, PSI2, PI, PSI0]),
    ])
}

/// Transcribed polynomial for nabla_a S^a_b nabla^b R.
pub fn divergence_gradient_poly() -> Poly {
    poly_terms(&[
        (4, 1, &[D_R, EPSILON, PSI0]),
        (1, 1, &[D_R, D_PSI0]),
        (-2, 1, &[DLT_R, KAPPA, PSI0]),
        (6, 1, &[DLT_R, PI, PSI2]),
        (1, 1, &[D_PSI2, DEL_R]),
        (-2, 1, &[D_R, SIGMA, PSI0]),
        (6, 1, &[D_R, LAMBDA, PSI2]),
        (4, 1, &[DLT_PSI2, DLT_R]),
        (-6, 1, &[DEL_R, SIGMA, PSI2]),
        (2, 1, &[DEL_R, LAMBDA, PSI0]),
        (1, 1, &[DEL_PSI2, D_R]),
        (-6, 1, &[DLT_R, TAU, PSI2]),
        (2, 1, &[DLT_R, NU, PSI0]),
        (-4, 1, &[DEL_R, GAMMA, PSI0]),
        (1, 1, &[DEL_R, DEL_PSI0]),
    ])
}

/// Transcribed canonical-frame value of (1/2) S_ab S^ab.
pub fn half_s_squared_poly() -> Poly {
    poly_terms(&[(1, 1, &[PSI0, PSI0]), (3, 1, &[PSI2, PSI2])])
}

/// Transcribed canonical-frame value of -(1/6) S^a_b S^b_c S^c_a.
pub fn neg_sixth_s_cubed_poly() -> Poly {
    poly_terms(&[(-1, 1, &[PSI2, PSI2, PSI2]), (1, 1, &[PSI2, PSI0, PSI0])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q2_arithmetic() {
        let x = Q2::sqrt2(1);
        let two = x.mul(&x);
        assert_eq!(two, Q2::int(2));
        let y = Q2::frac(1, 2).add(&Q2::sqrt2(-3));
        let z = y.mul(&y);
        // (1/2 - 3 sqrt2)^2 = 1/4 + 18 - 3 sqrt2
        assert_eq!(z, Q2 { a: rat(73, 4), b: rat(-3, 1) });
    }

    #[test]
    fn poly_products_collect_terms() {
        let p = Poly::sym(PSI0).add(&Poly::sym(PSI2));
        let q = p.mul(&p);
        assert_eq!(q.terms(), 3);
        let diff = q.sub(&poly_terms(&[
            (1, 1, &[PSI0, PSI0]),
            (2, 1, &[PSI0, PSI2]),
            (1, 1, &[PSI2, PSI2]),
        ]));
        assert!(diff.is_zero());
    }

    #[test]
    fn scalar_gradient_identity_is_exact() {
        assert_eq!(grad_r_squared(), gradient_square_poly());
    }

    #[test]
    fn sym_gradient_identity_is_exact() {
        let lhs = quarter_grad_s_squared();
        let rhs = sym_gradient_square_poly();
        assert!(lhs.sub(&rhs).is_zero(), "difference: {:?}", lhs.sub(&rhs));
    }

    #[test]
    fn cross_gradient_identity_is_exact() {
        let lhs = half_grad_s_cross();
        let rhs = cross_gradient_square_poly();
        assert!(lhs.sub(&rhs).is_zero(), "difference: {:?}", lhs.sub(&rhs));
    }

    #[test]
    fn divergence_identity_is_exact() {
        let lhs = div_s_dot_grad_r();
        let rhs = divergence_gradient_poly();
        assert!(lhs.sub(&rhs).is_zero(), "difference: {:?}", lhs.sub(&rhs));
    }

    #[test]
    fn zeroth_order_traces_are_exact() {
        assert_eq!(half_s_squared(), half_s_squared_poly());
        assert_eq!(neg_sixth_s_cubed(), neg_sixth_s_cubed_poly());
    }
}
