//! Truncated multivariate Taylor polynomials (jets).
//!
//! A `Jet<T>` over a [`JetCtx`] holds the Taylor coefficients of a function
//! around a point, up to a fixed total degree. Arithmetic on jets is
//! arithmetic on function germs, so running the curvature pipeline over
//! `Jet<T>` instead of plain numbers yields every partial derivative of the
//! result in one pass, without symbolic blowup and without finite-difference
//! noise. `valid` tracks how many degrees of the expansion are still
//! trustworthy; differentiation lowers it by one.

use crate::scalar::{Scalar, ScalarError, ScalarResult};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Monomial tables for a fixed (variable count, truncation order) pair.
/// Monomials are listed in graded lexicographic order; index 0 is constant.
pub struct JetCtx {
    pub nvars: usize,
    pub order: usize,
    /// exponent vector of each monomial
    pub exps: Vec<Vec<u8>>,
    /// total degree of each monomial
    pub degree: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    /// for each product monomial k, the list of factor pairs (i, j) with
    /// exps[i] + exps[j] = exps[k]
    pairs: Vec<Vec<(usize, usize)>>,
    /// for each variable v and monomial i with exps[i][v] > 0:
    /// (target index of exps[i] - e_v, original exponent)
    diff_map: Vec<Vec<Option<(usize, u32)>>>,
}

fn monomials(nvars: usize, order: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for total in 0..=order {
        let mut cur = vec![0u8; nvars];
        gen_degree(nvars, total, 0, total, &mut cur, &mut out);
    }
    out
}

fn gen_degree(
    nvars: usize,
    total: usize,
    var: usize,
    left: usize,
    cur: &mut Vec<u8>,
    out: &mut Vec<Vec<u8>>,
) {
    if var + 1 == nvars {
        cur[var] = left as u8;
        out.push(cur.clone());
        cur[var] = 0;
        return;
    }
    // lexicographic within a degree block: highest first-variable exponent first
    for e in (0..=left).rev() {
        cur[var] = e as u8;
        gen_degree(nvars, total, var + 1, left - e, cur, out);
    }
    cur[var] = 0;
}

impl JetCtx {
    fn build(nvars: usize, order: usize) -> JetCtx {
        let exps = monomials(nvars, order);
        let degree: Vec<usize> = exps
            .iter()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .collect();
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut pairs = vec![Vec::new(); exps.len()];
        for (i, ei) in exps.iter().enumerate() {
            for (j, ej) in exps.iter().enumerate() {
                if degree[i] + degree[j] > order {
                    continue;
                }
                let sum: Vec<u8> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                let k = index[&sum];
                pairs[k].push((i, j));
            }
        }
        let mut diff_map = vec![vec![None; exps.len()]; nvars];
        for (i, ei) in exps.iter().enumerate() {
            for v in 0..nvars {
                if ei[v] > 0 {
                    let mut lower = ei.clone();
                    lower[v] -= 1;
                    diff_map[v][i] = Some((index[&lower], ei[v] as u32));
                }
            }
        }
        JetCtx {
            nvars,
            order,
            exps,
            degree,
            index,
            pairs,
            diff_map,
        }
    }

    /// Shared context from the process-wide registry.
    pub fn get(nvars: usize, order: usize) -> Arc<JetCtx> {
        static REGISTRY: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetCtx>>>> = OnceLock::new();
        let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = reg.lock().unwrap();
        map.entry((nvars, order))
            .or_insert_with(|| Arc::new(JetCtx::build(nvars, order)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn monomial_index(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

/// Taylor expansion of a scalar quantity, or a plain constant when no
/// expansion point is in play. Constants adopt the partner's context on
/// first contact, which lets `Scalar::from_rational` work without one.
#[derive(Clone)]
pub enum Jet<T> {
    Const(T),
    Poly {
        ctx: Arc<JetCtx>,
        coeffs: Vec<T>,
        valid: usize,
    },
}

impl<T: Scalar> std::fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Jet::Const(c) => write!(f, "jet{{{c:?}}}"),
            Jet::Poly { coeffs, valid, .. } => {
                write!(f, "jet(valid≤{valid}){{")?;
                for (i, c) in coeffs.iter().enumerate().take(8) {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c:?}")?;
                }
                if coeffs.len() > 8 {
                    write!(f, ", …")?;
                }
                write!(f, "}}")
            }
        }
    }
}

impl<T: Scalar> PartialEq for Jet<T> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Jet::Const(a), Jet::Const(b)) => a == b,
            (Jet::Poly { coeffs: a, .. }, Jet::Poly { coeffs: b, .. }) => a == b,
            (Jet::Const(a), p @ Jet::Poly { .. }) | (p @ Jet::Poly { .. }, Jet::Const(a)) => {
                if let Jet::Poly { coeffs, .. } = p {
                    coeffs[0] == *a && coeffs[1..].iter().all(|c| c.is_zero())
                } else {
                    unreachable!()
                }
            }
        }
    }
}

impl<T: Scalar> Jet<T> {
    pub fn constant(v: T) -> Self {
        Jet::Const(v)
    }

    /// The i-th coordinate as a jet: value + first-order displacement.
    pub fn variable(ctx: &Arc<JetCtx>, i: usize, value: T) -> Self {
        assert!(i < ctx.nvars);
        let mut coeffs = vec![T::zero(); ctx.len()];
        coeffs[0] = value;
        if ctx.order >= 1 {
            // monomial e_i sits in the degree-1 block
            let mut e = vec![0u8; ctx.nvars];
            e[i] = 1;
            let idx = ctx.monomial_index(&e).unwrap();
            coeffs[idx] = T::one();
        }
        Jet::Poly {
            ctx: ctx.clone(),
            coeffs,
            valid: ctx.order,
        }
    }

    pub fn from_coeffs(ctx: &Arc<JetCtx>, coeffs: Vec<T>) -> Self {
        assert_eq!(coeffs.len(), ctx.len());
        Jet::Poly {
            ctx: ctx.clone(),
            coeffs,
            valid: ctx.order,
        }
    }

    pub fn value(&self) -> &T {
        match self {
            Jet::Const(c) => c,
            Jet::Poly { coeffs, .. } => &coeffs[0],
        }
    }

    pub fn valid_order(&self) -> usize {
        match self {
            Jet::Const(_) => usize::MAX,
            Jet::Poly { valid, .. } => *valid,
        }
    }

    /// All coefficients of trustworthy degree, paired with their monomials.
    /// Constants yield a single degree-zero entry.
    pub fn valid_coeffs(&self) -> Vec<(Vec<u8>, T)> {
        match self {
            Jet::Const(c) => vec![(Vec::new(), c.clone())],
            Jet::Poly { ctx, coeffs, valid } => ctx
                .exps
                .iter()
                .zip(&ctx.degree)
                .zip(coeffs)
                .filter(|((_, d), _)| **d <= *valid)
                .map(|((e, _), c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Taylor coefficient of the given monomial. Panics when the request
    /// exceeds the trustworthy order; that is always a pipeline bug.
    pub fn coeff(&self, exps: &[u8]) -> T {
        match self {
            Jet::Const(c) => {
                if exps.iter().all(|&e| e == 0) {
                    c.clone()
                } else {
                    T::zero()
                }
            }
            Jet::Poly { ctx, coeffs, valid } => {
                let deg: usize = exps.iter().map(|&e| e as usize).sum();
                assert!(
                    deg <= *valid,
                    "coefficient of degree {deg} requested but only {valid} orders are valid"
                );
                let idx = ctx
                    .monomial_index(exps)
                    .unwrap_or_else(|| panic!("monomial {exps:?} outside context"));
                coeffs[idx].clone()
            }
        }
    }

    fn promote(&self, ctx: &Arc<JetCtx>) -> (Vec<T>, usize) {
        match self {
            Jet::Const(c) => {
                let mut coeffs = vec![T::zero(); ctx.len()];
                coeffs[0] = c.clone();
                (coeffs, ctx.order)
            }
            Jet::Poly { coeffs, valid, .. } => (coeffs.clone(), *valid),
        }
    }

    fn ctx(&self) -> Option<&Arc<JetCtx>> {
        match self {
            Jet::Const(_) => None,
            Jet::Poly { ctx, .. } => Some(ctx),
        }
    }

    fn shared_ctx<'a>(&'a self, other: &'a Self) -> Option<&'a Arc<JetCtx>> {
        match (self.ctx(), other.ctx()) {
            (Some(a), Some(b)) => {
                assert!(
                    Arc::ptr_eq(a, b) || (a.nvars == b.nvars && a.order == b.order),
                    "jets from different contexts"
                );
                Some(a)
            }
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        }
    }

    /// Partial derivative with respect to variable `v`. One valid order is
    /// consumed.
    pub fn partial(&self, v: usize) -> Self {
        match self {
            Jet::Const(_) => Jet::Const(T::zero()),
            Jet::Poly { ctx, coeffs, valid } => {
                assert!(*valid > 0, "no valid orders left to differentiate");
                let mut out = vec![T::zero(); ctx.len()];
                for (i, c) in coeffs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    if let Some((dst, mult)) = ctx.diff_map[v][i] {
                        let term = c.mul(&T::from_i64(mult as i64));
                        out[dst] = out[dst].add(&term);
                    }
                }
                Jet::Poly {
                    ctx: ctx.clone(),
                    coeffs: out,
                    valid: valid - 1,
                }
            }
        }
    }

    fn binary(&self, rhs: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        match self.shared_ctx(rhs) {
            None => {
                let (Jet::Const(a), Jet::Const(b)) = (self, rhs) else {
                    unreachable!()
                };
                Jet::Const(f(a, b))
            }
            Some(ctx) => {
                let ctx = ctx.clone();
                let (a, va) = self.promote(&ctx);
                let (b, vb) = rhs.promote(&ctx);
                let valid = va.min(vb);
                let coeffs = a.iter().zip(&b).map(|(x, y)| f(x, y)).collect();
                Jet::Poly { ctx, coeffs, valid }
            }
        }
    }

    fn mul_impl(&self, rhs: &Self) -> Self {
        match (self, rhs) {
            (Jet::Const(a), Jet::Const(b)) => Jet::Const(a.mul(b)),
            (Jet::Const(a), Jet::Poly { ctx, coeffs, valid })
            | (Jet::Poly { ctx, coeffs, valid }, Jet::Const(a)) => Jet::Poly {
                ctx: ctx.clone(),
                coeffs: coeffs.iter().map(|c| c.mul(a)).collect(),
                valid: *valid,
            },
            (Jet::Poly { .. }, Jet::Poly { .. }) => {
                let ctx = self.shared_ctx(rhs).unwrap().clone();
                let (a, va) = self.promote(&ctx);
                let (b, vb) = rhs.promote(&ctx);
                let valid = va.min(vb).min(ctx.order);
                let mut out = vec![T::zero(); ctx.len()];
                for (k, plist) in ctx.pairs.iter().enumerate() {
                    if ctx.degree[k] > valid {
                        continue;
                    }
                    let mut acc = T::zero();
                    for &(i, j) in plist {
                        if a[i].is_zero() || b[j].is_zero() {
                            continue;
                        }
                        acc = acc.add(&a[i].mul(&b[j]));
                    }
                    out[k] = acc;
                }
                Jet::Poly {
                    ctx,
                    coeffs: out,
                    valid,
                }
            }
        }
    }

    /// Reciprocal by graded back-substitution of a · b = 1.
    fn recip(&self) -> ScalarResult<Self> {
        match self {
            Jet::Const(c) => Ok(Jet::Const(T::one().div(c)?)),
            Jet::Poly { ctx, coeffs, valid } => {
                let a0 = &coeffs[0];
                if a0.is_zero() {
                    return Err(ScalarError::DivisionByZero);
                }
                let inv0 = T::one().div(a0)?;
                let mut out = vec![T::zero(); ctx.len()];
                out[0] = inv0.clone();
                for k in 1..ctx.len() {
                    if ctx.degree[k] > *valid {
                        continue;
                    }
                    let mut acc = T::zero();
                    for &(i, j) in &ctx.pairs[k] {
                        if i == 0 {
                            continue; // that is the a0·b_k term being solved for
                        }
                        if coeffs[i].is_zero() || out[j].is_zero() {
                            continue;
                        }
                        acc = acc.add(&coeffs[i].mul(&out[j]));
                    }
                    out[k] = Scalar::neg(&inv0.mul(&acc));
                }
                Ok(Jet::Poly {
                    ctx: ctx.clone(),
                    coeffs: out,
                    valid: *valid,
                })
            }
        }
    }

    /// f applied through the Taylor series Σ d_m ε^m, where ε is the
    /// zero-constant part and d_m the m-th derivative value divided by m!.
    fn compose_series(&self, derivs_over_fact: impl Fn(usize, &T) -> ScalarResult<Vec<T>>) -> ScalarResult<Self> {
        match self {
            Jet::Const(_) => unreachable!("compose_series is for Poly jets"),
            Jet::Poly { ctx, coeffs, valid } => {
                let a0 = coeffs[0].clone();
                let order = (*valid).min(ctx.order);
                let d = derivs_over_fact(order, &a0)?;
                let mut eps = coeffs.clone();
                eps[0] = T::zero();
                let eps = Jet::Poly {
                    ctx: ctx.clone(),
                    coeffs: eps,
                    valid: *valid,
                };
                // Horner over the nilpotent part
                let mut acc = Jet::Const(d[order].clone());
                for m in (0..order).rev() {
                    acc = acc.mul_impl(&eps).binary(&Jet::Const(d[m].clone()), |x, y| x.add(y));
                }
                Ok(acc.with_valid(*valid))
            }
        }
    }

    fn with_valid(self, v: usize) -> Self {
        match self {
            Jet::Const(c) => Jet::Const(c),
            Jet::Poly { ctx, coeffs, .. } => Jet::Poly {
                ctx,
                coeffs,
                valid: v,
            },
        }
    }
}

fn factorial_recip<T: Scalar>(m: usize) -> T {
    let mut f = BigRational::from_integer(1.into());
    for k in 1..=m {
        f *= BigRational::from_integer(k.into());
    }
    T::from_rational(&f.recip())
}

impl<T: Scalar> Scalar for Jet<T> {
    fn zero() -> Self {
        Jet::Const(T::zero())
    }
    fn one() -> Self {
        Jet::Const(T::one())
    }
    fn from_rational(r: &BigRational) -> Self {
        Jet::Const(T::from_rational(r))
    }
    fn add(&self, rhs: &Self) -> Self {
        self.binary(rhs, |a, b| a.add(b))
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.binary(rhs, |a, b| a.sub(b))
    }
    fn mul(&self, rhs: &Self) -> Self {
        self.mul_impl(rhs)
    }
    fn neg(&self) -> Self {
        match self {
            Jet::Const(c) => Jet::Const(Scalar::neg(c)),
            Jet::Poly { ctx, coeffs, valid } => Jet::Poly {
                ctx: ctx.clone(),
                coeffs: coeffs.iter().map(Scalar::neg).collect(),
                valid: *valid,
            },
        }
    }
    fn div(&self, rhs: &Self) -> ScalarResult<Self> {
        match rhs {
            Jet::Const(c) => match self {
                Jet::Const(a) => Ok(Jet::Const(a.div(c)?)),
                Jet::Poly { ctx, coeffs, valid } => {
                    let inv = T::one().div(c)?;
                    Ok(Jet::Poly {
                        ctx: ctx.clone(),
                        coeffs: coeffs.iter().map(|x| x.mul(&inv)).collect(),
                        valid: *valid,
                    })
                }
            },
            _ => Ok(self.mul_impl(&rhs.recip()?)),
        }
    }
    fn is_zero(&self) -> bool {
        match self {
            Jet::Const(c) => c.is_zero(),
            Jet::Poly { coeffs, .. } => coeffs.iter().all(|c| c.is_zero()),
        }
    }

    fn sqrt(&self) -> ScalarResult<Self> {
        match self {
            Jet::Const(c) => Ok(Jet::Const(c.sqrt()?)),
            Jet::Poly { ctx, coeffs, valid } => {
                let b0 = coeffs[0].sqrt()?;
                if b0.is_zero() {
                    return Err(ScalarError::Domain("sqrt at a zero base point".into()));
                }
                let two_b0_inv = T::one().div(&b0.add(&b0))?;
                let mut out = vec![T::zero(); ctx.len()];
                out[0] = b0;
                for k in 1..ctx.len() {
                    if ctx.degree[k] > *valid {
                        continue;
                    }
                    let mut acc = coeffs[k].clone();
                    for &(i, j) in &ctx.pairs[k] {
                        if i == 0 || j == 0 {
                            continue;
                        }
                        if out[i].is_zero() || out[j].is_zero() {
                            continue;
                        }
                        acc = acc.sub(&out[i].mul(&out[j]));
                    }
                    out[k] = acc.mul(&two_b0_inv);
                }
                Ok(Jet::Poly {
                    ctx: ctx.clone(),
                    coeffs: out,
                    valid: *valid,
                })
            }
        }
    }

    fn pow_rational(&self, e: &BigRational) -> ScalarResult<Self> {
        if e.is_integer() {
            if let Some(n) = e.to_integer().to_i64() {
                if n >= 0 {
                    return self.pow_i64(n);
                }
                return Jet::one().div(&self.pow_i64(-n)?);
            }
        }
        match self {
            Jet::Const(c) => Ok(Jet::Const(c.pow_rational(e)?)),
            Jet::Poly { .. } => self.compose_series(|order, a0| {
                // d_m = C(e, m) a0^(e-m)
                let mut out = Vec::with_capacity(order + 1);
                let mut coef = a0.pow_rational(e)?;
                let a0_inv = T::one().div(a0)?;
                let mut m = 0usize;
                loop {
                    out.push(coef.clone());
                    if m == order {
                        break;
                    }
                    let factor = e - BigRational::from_integer(m.into());
                    let scale = T::from_rational(
                        &(factor / BigRational::from_integer((m + 1).into())),
                    );
                    coef = coef.mul(&scale).mul(&a0_inv);
                    m += 1;
                }
                Ok(out)
            }),
        }
    }

    fn sin(&self) -> ScalarResult<Self> {
        match self {
            Jet::Const(c) => Ok(Jet::Const(c.sin()?)),
            _ => self.compose_series(|order, a0| trig_derivs(order, a0.sin()?, a0.cos()?, true)),
        }
    }
    fn cos(&self) -> ScalarResult<Self> {
        match self {
            Jet::Const(c) => Ok(Jet::Const(c.cos()?)),
            _ => self.compose_series(|order, a0| trig_derivs(order, a0.cos()?, Scalar::neg(&a0.sin()?), true)),
        }
    }
    fn sinh(&self) -> ScalarResult<Self> {
        match self {
            Jet::Const(c) => Ok(Jet::Const(c.sinh()?)),
            _ => self.compose_series(|order, a0| trig_derivs(order, a0.sinh()?, a0.cosh()?, false)),
        }
    }
    fn cosh(&self) -> ScalarResult<Self> {
        match self {
            Jet::Const(c) => Ok(Jet::Const(c.cosh()?)),
            _ => self.compose_series(|order, a0| trig_derivs(order, a0.cosh()?, a0.sinh()?, false)),
        }
    }
    fn exp(&self) -> ScalarResult<Self> {
        match self {
            Jet::Const(c) => Ok(Jet::Const(c.exp()?)),
            _ => self.compose_series(|order, a0| {
                let e0 = a0.exp()?;
                Ok((0..=order)
                    .map(|m| e0.mul(&factorial_recip::<T>(m)))
                    .collect())
            }),
        }
    }
    fn acos(&self) -> ScalarResult<Self> {
        match self {
            Jet::Const(c) => Ok(Jet::Const(c.acos()?)),
            _ => self.compose_series(|order, a0| {
                let mut out = Vec::with_capacity(order + 1);
                out.push(a0.acos()?);
                if order == 0 {
                    return Ok(out);
                }
                let u = T::one().sub(&a0.mul(a0));
                let u_inv = T::one().div(&u)?;
                // u_pow = u^{-(2m-1)/2}; acos^(m) = P_m(x) u^{-(2m-1)/2}, P_1 = -1
                let mut u_pow = T::one().div(&u.sqrt()?)?;
                let mut p: Vec<BigRational> = vec![BigRational::from_integer((-1).into())];
                let mut fact = BigRational::from_integer(1.into());
                for m in 1..=order {
                    fact *= BigRational::from_integer((m as i64).into());
                    let mut val = T::zero();
                    for c in p.iter().rev() {
                        val = val.mul(a0).add(&T::from_rational(c));
                    }
                    out.push(val.mul(&u_pow).mul(&T::from_rational(&fact.recip())));
                    if m == order {
                        break;
                    }
                    // P_{m+1} = P_m' (1 - x^2) + (2m-1) x P_m
                    let mut next = vec![BigRational::from_integer(0.into()); p.len() + 1];
                    for (k, c) in p.iter().enumerate() {
                        if k >= 1 {
                            let d = c * BigRational::from_integer((k as i64).into());
                            next[k - 1] += &d;
                            next[k + 1] -= &d;
                        }
                        next[k + 1] += c * BigRational::from_integer((2 * m as i64 - 1).into());
                    }
                    p = next;
                    u_pow = u_pow.mul(&u_inv);
                }
                Ok(out)
            }),
        }
    }
    fn ln(&self) -> ScalarResult<Self> {
        match self {
            Jet::Const(c) => Ok(Jet::Const(c.ln()?)),
            _ => self.compose_series(|order, a0| {
                // d_0 = ln a0, d_m = (-1)^(m-1) / (m a0^m)
                let mut out = Vec::with_capacity(order + 1);
                out.push(a0.ln()?);
                let a0_inv = T::one().div(a0)?;
                let mut p = a0_inv.clone();
                for m in 1..=order {
                    let sign = if m % 2 == 1 { 1 } else { -1 };
                    let scale = T::from_rational(&BigRational::new(sign.into(), m.into()));
                    out.push(p.mul(&scale));
                    p = p.mul(&a0_inv);
                }
                Ok(out)
            }),
        }
    }
}

/// Derivatives over factorials for sin/cos/sinh/cosh cycles starting from
/// (f(a0), f'(a0)); `alternating` selects the circular sign pattern.
fn trig_derivs<T: Scalar>(order: usize, f0: T, f1: T, alternating: bool) -> ScalarResult<Vec<T>> {
    let mut out = Vec::with_capacity(order + 1);
    for m in 0..=order {
        let base = match m % 4 {
            0 => f0.clone(),
            1 => f1.clone(),
            2 => {
                if alternating {
                    Scalar::neg(&f0)
                } else {
                    f0.clone()
                }
            }
            _ => {
                if alternating {
                    Scalar::neg(&f1)
                } else {
                    f1.clone()
                }
            }
        };
        out.push(base.mul(&factorial_recip::<T>(m)));
    }
    Ok(out)
}

impl<T: Scalar> crate::scalar::DiffScalar for Jet<T> {
    fn partial_dir(&self, _coords: &[String], i: usize) -> crate::error::Result<Self> {
        Ok(self.partial(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx3(order: usize) -> Arc<JetCtx> {
        JetCtx::get(3, order)
    }

    #[test]
    fn monomial_tables_sane() {
        let ctx = ctx3(4);
        // C(3+4,3) monomials of degree ≤ 4 in 3 variables
        assert_eq!(ctx.len(), 35);
        assert_eq!(ctx.exps[0], vec![0, 0, 0]);
        for k in 0..ctx.len() {
            for &(i, j) in &ctx.pairs[k] {
                assert_eq!(ctx.degree[i] + ctx.degree[j], ctx.degree[k]);
            }
        }
    }

    #[test]
    fn polynomial_product_coefficients() {
        let ctx = ctx3(3);
        let x = Jet::variable(&ctx, 0, 2.0f64);
        let y = Jet::variable(&ctx, 1, -1.0f64);
        // (x)(y) = (2 + dx)(-1 + dy): value -2, d/dx -1, d/dy 2, d2/dxdy 1
        let p = x.mul(&y);
        assert_eq!(*p.value(), -2.0);
        assert_eq!(p.coeff(&[1, 0, 0]), -1.0);
        assert_eq!(p.coeff(&[0, 1, 0]), 2.0);
        assert_eq!(p.coeff(&[1, 1, 0]), 1.0);
        assert_eq!(p.coeff(&[2, 0, 0]), 0.0);
    }

    #[test]
    fn acos_series_matches_derivative_tower() {
        let ctx = ctx3(3);
        let x = Jet::variable(&ctx, 0, 0.3f64);
        let f = x.acos().unwrap();
        let u = 1.0 - 0.09f64;
        assert!((f.value() - 0.3f64.acos()).abs() < 1e-14);
        assert!((f.coeff(&[1, 0, 0]) + u.powf(-0.5)).abs() < 1e-14);
        assert!((f.coeff(&[2, 0, 0]) + 0.3 * u.powf(-1.5) / 2.0).abs() < 1e-14);
        assert!((f.coeff(&[3, 0, 0]) + (1.0 + 2.0 * 0.09) * u.powf(-2.5) / 6.0).abs() < 1e-14);
        assert!(Scalar::acos(&1.1f64).is_err());
    }

    #[test]
    fn division_and_sqrt_round_trip() {
        let ctx = ctx3(4);
        let x = Jet::variable(&ctx, 0, 1.5f64);
        let y = Jet::variable(&ctx, 1, 0.5f64);
        let f = x.mul(&x).add(&y); // x^2 + y
        let g = f.div(&x).unwrap().mul(&x);
        for (i, e) in ctx.exps.iter().enumerate() {
            let deg: usize = e.iter().map(|&v| v as usize).sum();
            if deg <= 4 {
                let a = f.coeff(e);
                let b = g.coeff(e);
                assert!((a - b).abs() < 1e-12, "coeff {i} mismatch {a} vs {b}");
            }
        }
        let s = f.sqrt().unwrap();
        let back = s.mul(&s);
        assert!((back.value() - f.value()).abs() < 1e-12);
        assert!((back.coeff(&[1, 0, 0]) - f.coeff(&[1, 0, 0])).abs() < 1e-12);
        assert!((back.coeff(&[2, 1, 0]) - f.coeff(&[2, 1, 0])).abs() < 1e-12);
    }

    #[test]
    fn partial_derivative_drops_an_order() {
        let ctx = ctx3(3);
        let x = Jet::variable(&ctx, 0, 2.0f64);
        let f = x.mul(&x).mul(&x); // x^3
        let d = f.partial(0); // 3x^2
        assert_eq!(*d.value(), 12.0);
        assert_eq!(d.valid_order(), 2);
        assert_eq!(d.coeff(&[1, 0, 0]), 12.0); // 6x
        let d2 = d.partial(0);
        assert_eq!(*d2.value(), 12.0);
        assert_eq!(d2.valid_order(), 1);
    }

    #[test]
    fn analytic_functions_against_closed_forms() {
        let ctx = JetCtx::get(1, 5);
        let x = Jet::variable(&ctx, 0, 0.7f64);
        // d^m/dx^m sin at 0.7, divided by m!
        let s = x.sin().unwrap();
        let expect = [
            0.7f64.sin(),
            0.7f64.cos(),
            -0.7f64.sin() / 2.0,
            -0.7f64.cos() / 6.0,
            0.7f64.sin() / 24.0,
            0.7f64.cos() / 120.0,
        ];
        for (m, want) in expect.iter().enumerate() {
            let got = s.coeff(&[m as u8]);
            assert!((got - want).abs() < 1e-12, "sin coeff {m}: {got} vs {want}");
        }
        let e = x.exp().unwrap();
        let l = e.ln().unwrap();
        for m in 0..=5u8 {
            let got = l.coeff(&[m]);
            let want = if m == 0 { 0.7 } else if m == 1 { 1.0 } else { 0.0 };
            assert!((got - want).abs() < 1e-11, "ln(exp(x)) coeff {m}: {got}");
        }
        let p = x.pow_rational(&BigRational::new(1.into(), 2.into())).unwrap();
        let sq = p.mul(&p);
        for m in 0..=5u8 {
            let got = sq.coeff(&[m]);
            let want = x.coeff(&[m]);
            assert!((got - want).abs() < 1e-12, "sqrt^2 coeff {m}");
        }
    }

    #[test]
    fn exact_rational_jets() {
        use num_bigint::BigInt;
        let ctx = ctx3(2);
        let q = |p: i64, d: i64| BigRational::new(BigInt::from(p), BigInt::from(d));
        let x = Jet::variable(&ctx, 0, q(1, 2));
        let f = x.mul(&x); // x^2 at 1/2
        assert_eq!(*f.value(), q(1, 4));
        assert_eq!(f.coeff(&[1, 0, 0]), q(1, 1));
        let inv = Jet::<BigRational>::one().div(&f).unwrap();
        assert_eq!(*inv.value(), q(4, 1));
        // d/dx x^-2 = -2 x^-3 = -16 at 1/2
        assert_eq!(inv.coeff(&[1, 0, 0]), q(-16, 1));
    }

    #[test]
    fn gf61_jets() {
        use crate::gf::Gf61;
        let ctx = ctx3(2);
        let x = Jet::variable(&ctx, 0, Gf61::new(5));
        let f = x.mul(&x).add(&Jet::constant(Gf61::new(7)));
        assert_eq!(*f.value(), Gf61::new(32));
        assert_eq!(f.coeff(&[1, 0, 0]), Gf61::new(10));
        assert_eq!(f.coeff(&[2, 0, 0]), Gf61::new(1));
        assert!(Scalar::sin(&f).is_err());
    }
}
