//! Minimal symbolic core: expression trees over named coordinates, with
//! parsing, differentiation, shallow simplification, and generic evaluation.
//!
//! Simplification is deliberately limited to constant folding, neutral
//! elements, and power merging. Downstream correctness rests on numeric
//! evaluation at points, never on reaching a canonical symbolic form.

mod diff;
mod eval;
mod parse;
mod print;

pub use diff::differentiate;
pub use eval::{evaluate, evaluate_exact, evaluate_f64, Bindings, FuncDef, Point};
pub use parse::{parse_expr, parse_expr_strict};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::sync::Arc;

/// Immutable expression tree. Cheap to clone; subtrees are shared, so the
/// product rule in `differentiate` does not duplicate storage.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

#[derive(PartialEq)]
pub enum Node {
    Const(BigRational),
    /// Coordinate or free symbol.
    Sym(String),
    /// User function application, e.g. H(r). `primes` counts formal
    /// derivatives: H''(r) has primes = 2.
    Func {
        name: String,
        primes: u32,
        args: Vec<Expr>,
    },
    Neg(Expr),
    Un(UnFn, Expr),
    Add(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, BigRational),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UnFn {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Ln,
    Sqrt,
    Acos,
}

impl UnFn {
    pub fn name(self) -> &'static str {
        match self {
            UnFn::Sin => "sin",
            UnFn::Cos => "cos",
            UnFn::Sinh => "sinh",
            UnFn::Cosh => "cosh",
            UnFn::Exp => "exp",
            UnFn::Ln => "ln",
            UnFn::Sqrt => "sqrt",
            UnFn::Acos => "acos",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnFn::Sin,
            "cos" => UnFn::Cos,
            "sinh" => UnFn::Sinh,
            "cosh" => UnFn::Cosh,
            "exp" => UnFn::Exp,
            "ln" => UnFn::Ln,
            "sqrt" => UnFn::Sqrt,
            "acos" => UnFn::Acos,
            _ => return None,
        })
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn raw(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn constant(r: BigRational) -> Self {
        Expr::raw(Node::Const(r))
    }

    pub fn int(v: i64) -> Self {
        Expr::constant(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn rational(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Expr::constant(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn sym(name: impl Into<String>) -> Self {
        Expr::raw(Node::Sym(name.into()))
    }

    pub fn func(name: impl Into<String>, args: Vec<Expr>) -> Self {
        Expr::raw(Node::Func {
            name: name.into(),
            primes: 0,
            args,
        })
    }

    pub fn func_primed(name: impl Into<String>, primes: u32, args: Vec<Expr>) -> Self {
        Expr::raw(Node::Func {
            name: name.into(),
            primes,
            args,
        })
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Const(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node(), Node::Const(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), Node::Const(r) if r.is_one())
    }

    // Smart constructors: fold constants and strip neutral elements so that
    // differentiate/parse output stays readable without a simplify pass.

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Expr::constant(x + y);
        }
        Expr::raw(Node::Add(a, b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(a, Expr::neg(b))
    }

    pub fn neg(a: Expr) -> Expr {
        match a.node() {
            Node::Const(r) => Expr::constant(-r),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::raw(Node::Neg(a)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::int(0);
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Expr::constant(x * y);
        }
        Expr::raw(Node::Mul(a, b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if b.is_one() {
            return a;
        }
        if let Some(y) = b.as_const() {
            if !y.is_zero() {
                if a.is_zero() {
                    return Expr::int(0);
                }
                if let Some(x) = a.as_const() {
                    return Expr::constant(x / y);
                }
            }
        }
        Expr::raw(Node::Div(a, b))
    }

    pub fn pow(base: Expr, e: BigRational) -> Expr {
        if e.is_zero() {
            return Expr::int(1);
        }
        if e.is_one() {
            return base;
        }
        if let Some(x) = base.as_const() {
            if e.is_integer() && !x.is_zero() {
                if let Ok(v) = crate::scalar::Scalar::pow_rational(x, &e) {
                    return Expr::constant(v);
                }
            }
        }
        if let Node::Pow(inner, f) = base.node() {
            return Expr::pow(inner.clone(), &e * f);
        }
        Expr::raw(Node::Pow(base, e))
    }

    pub fn pow_i(base: Expr, e: i64) -> Expr {
        Expr::pow(base, BigRational::from_integer(BigInt::from(e)))
    }

    pub fn un(f: UnFn, a: Expr) -> Expr {
        if let Some(x) = a.as_const() {
            if x.is_zero() {
                match f {
                    UnFn::Sin | UnFn::Sinh | UnFn::Sqrt => return Expr::int(0),
                    UnFn::Cos | UnFn::Cosh | UnFn::Exp => return Expr::int(1),
                    UnFn::Ln | UnFn::Acos => {}
                }
            }
            if x.is_one() && (f == UnFn::Ln || f == UnFn::Acos) {
                return Expr::int(0);
            }
            if f == UnFn::Sqrt && !x.is_negative() {
                if let Ok(r) = crate::scalar::Scalar::sqrt(x) {
                    return Expr::constant(r);
                }
            }
        }
        Expr::raw(Node::Un(f, a))
    }

    pub fn sqrt(a: Expr) -> Expr {
        Expr::un(UnFn::Sqrt, a)
    }

    /// Rebuilds the tree bottom-up through the smart constructors. Shallow by
    /// design: no distribution, no term collection.
    pub fn simplify(&self) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => self.clone(),
            Node::Func { name, primes, args } => Expr::func_primed(
                name.clone(),
                *primes,
                args.iter().map(|a| a.simplify()).collect(),
            ),
            Node::Neg(a) => Expr::neg(a.simplify()),
            Node::Un(f, a) => Expr::un(*f, a.simplify()),
            Node::Add(a, b) => Expr::add(a.simplify(), b.simplify()),
            Node::Mul(a, b) => Expr::mul(a.simplify(), b.simplify()),
            Node::Div(a, b) => Expr::div(a.simplify(), b.simplify()),
            Node::Pow(a, e) => Expr::pow(a.simplify(), e.clone()),
        }
    }

    /// Replaces free symbols by expressions. Function names are untouched;
    /// substitution recurses into their arguments.
    pub fn substitute(&self, map: &std::collections::BTreeMap<String, Expr>) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Sym(s) => map.get(s).cloned().unwrap_or_else(|| self.clone()),
            Node::Func { name, primes, args } => Expr::func_primed(
                name.clone(),
                *primes,
                args.iter().map(|a| a.substitute(map)).collect(),
            ),
            Node::Neg(a) => Expr::neg(a.substitute(map)),
            Node::Un(f, a) => Expr::un(*f, a.substitute(map)),
            Node::Add(a, b) => Expr::add(a.substitute(map), b.substitute(map)),
            Node::Mul(a, b) => Expr::mul(a.substitute(map), b.substitute(map)),
            Node::Div(a, b) => Expr::div(a.substitute(map), b.substitute(map)),
            Node::Pow(a, e) => Expr::pow(a.substitute(map), e.clone()),
        }
    }

    /// Free symbols (coordinates) appearing in the tree, sorted, deduplicated.
    pub fn symbols(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_symbols(&self, out: &mut Vec<String>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Sym(s) => out.push(s.clone()),
            Node::Func { args, .. } => {
                for a in args {
                    a.collect_symbols(out);
                }
            }
            Node::Neg(a) | Node::Un(_, a) | Node::Pow(a, _) => a.collect_symbols(out),
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }
}

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self}")
    }
}

/// Expressions form a ring under the smart constructors, so the generic
/// tensor engine can be instantiated symbolically. Division by a possibly
/// zero expression is deferred to evaluation time.
impl crate::scalar::Scalar for Expr {
    fn zero() -> Self {
        Expr::int(0)
    }
    fn one() -> Self {
        Expr::int(1)
    }
    fn from_rational(r: &BigRational) -> Self {
        Expr::constant(r.clone())
    }
    fn add(&self, rhs: &Self) -> Self {
        Expr::add(self.clone(), rhs.clone())
    }
    fn sub(&self, rhs: &Self) -> Self {
        Expr::sub(self.clone(), rhs.clone())
    }
    fn mul(&self, rhs: &Self) -> Self {
        Expr::mul(self.clone(), rhs.clone())
    }
    fn neg(&self) -> Self {
        Expr::neg(self.clone())
    }
    fn div(&self, rhs: &Self) -> crate::scalar::ScalarResult<Self> {
        if Expr::is_zero(rhs) {
            return Err(crate::scalar::ScalarError::DivisionByZero);
        }
        Ok(Expr::div(self.clone(), rhs.clone()))
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn pow_rational(&self, e: &BigRational) -> crate::scalar::ScalarResult<Self> {
        Ok(Expr::pow(self.clone(), e.clone()))
    }
    fn sqrt(&self) -> crate::scalar::ScalarResult<Self> {
        Ok(Expr::un(UnFn::Sqrt, self.clone()))
    }
    fn sin(&self) -> crate::scalar::ScalarResult<Self> {
        Ok(Expr::un(UnFn::Sin, self.clone()))
    }
    fn cos(&self) -> crate::scalar::ScalarResult<Self> {
        Ok(Expr::un(UnFn::Cos, self.clone()))
    }
    fn sinh(&self) -> crate::scalar::ScalarResult<Self> {
        Ok(Expr::un(UnFn::Sinh, self.clone()))
    }
    fn cosh(&self) -> crate::scalar::ScalarResult<Self> {
        Ok(Expr::un(UnFn::Cosh, self.clone()))
    }
    fn exp(&self) -> crate::scalar::ScalarResult<Self> {
        Ok(Expr::un(UnFn::Exp, self.clone()))
    }
    fn ln(&self) -> crate::scalar::ScalarResult<Self> {
        Ok(Expr::un(UnFn::Ln, self.clone()))
    }
    fn acos(&self) -> crate::scalar::ScalarResult<Self> {
        Ok(Expr::un(UnFn::Acos, self.clone()))
    }
}

impl crate::scalar::DiffScalar for Expr {
    fn partial_dir(&self, coords: &[String], i: usize) -> crate::error::Result<Self> {
        differentiate(self, &coords[i])
    }
}
