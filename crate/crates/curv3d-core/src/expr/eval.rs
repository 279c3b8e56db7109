//! Generic evaluation of expression trees over any [`Scalar`] backend.

use super::{differentiate, Expr, Node, UnFn};
use crate::error::{CurvError, Result};
use crate::scalar::{Scalar, ScalarError};
use num_rational::BigRational;
use std::collections::BTreeMap;

/// Assignment of values to coordinate symbols.
#[derive(Debug, Clone, Default)]
pub struct Point<S> {
    vals: BTreeMap<String, S>,
}

impl<S: Clone> Point<S> {
    pub fn new() -> Self {
        Point {
            vals: BTreeMap::new(),
        }
    }

    pub fn set(mut self, name: impl Into<String>, v: S) -> Self {
        self.vals.insert(name.into(), v);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, v: S) {
        self.vals.insert(name.into(), v);
    }

    pub fn get(&self, name: &str) -> Option<&S> {
        self.vals.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vals.keys().map(|s| s.as_str())
    }
}

impl<S: Clone, N: Into<String>> FromIterator<(N, S)> for Point<S> {
    fn from_iter<T: IntoIterator<Item = (N, S)>>(iter: T) -> Self {
        Point {
            vals: iter.into_iter().map(|(n, v)| (n.into(), v)).collect(),
        }
    }
}

/// A user function body, written in terms of its formal parameters.
#[derive(Debug, Clone)]
pub struct FuncDef {
    pub params: Vec<String>,
    pub body: Expr,
}

/// Function-symbol environment. Unbound functions fail at evaluation; bound
/// ones are substituted, with primes realized by differentiating the body
/// with respect to its single parameter.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    funcs: BTreeMap<String, FuncDef>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn bind(mut self, name: impl Into<String>, params: &[&str], body: Expr) -> Self {
        self.funcs.insert(
            name.into(),
            FuncDef {
                params: params.iter().map(|s| s.to_string()).collect(),
            body,
            },
        );
        self
    }

    pub fn get(&self, name: &str) -> Option<&FuncDef> {
        self.funcs.get(name)
    }

    /// Body of `name` differentiated `primes` times with respect to its
    /// single parameter.
    pub fn derivative_body(&self, name: &str, primes: u32) -> Result<Expr> {
        let def = self
            .funcs
            .get(name)
            .ok_or_else(|| CurvError::UnboundFunction { name: name.into() })?;
        if primes > 0 && def.params.len() != 1 {
            return Err(CurvError::FormalDerivative { name: name.into() });
        }
        let mut body = def.body.clone();
        for _ in 0..primes {
            body = differentiate(&body, &def.params[0])?;
        }
        Ok(body)
    }
}

fn scalar_err(e: &Expr, err: ScalarError) -> CurvError {
    CurvError::Domain {
        expr: e.clone(),
        msg: err.to_string(),
    }
}

pub fn evaluate<S: Scalar>(e: &Expr, p: &Point<S>, b: &Bindings) -> Result<S> {
    match e.node() {
        Node::Const(r) => Ok(S::from_rational(r)),
        Node::Sym(s) => p
            .get(s)
            .cloned()
            .ok_or_else(|| CurvError::UnboundSymbol { name: s.clone() }),
        Node::Func { name, primes, args } => {
            let def = b
                .get(name)
                .ok_or_else(|| CurvError::UnboundFunction { name: name.clone() })?;
            if def.params.len() != args.len() {
                return Err(CurvError::Invalid(format!(
                    "function `{name}` expects {} arguments, got {}",
                    def.params.len(),
                    args.len()
                )));
            }
            let body = b.derivative_body(name, *primes)?;
            // parameters shadow outer coordinates
            let mut inner = p.clone();
            for (param, arg) in def.params.iter().zip(args) {
                inner.insert(param.clone(), evaluate(arg, p, b)?);
            }
            evaluate(&body, &inner, b)
        }
        Node::Neg(a) => Ok(Scalar::neg(&evaluate(a, p, b)?)),
        Node::Un(f, a) => {
            let v = evaluate(a, p, b)?;
            let r = match f {
                UnFn::Sin => v.sin(),
                UnFn::Cos => v.cos(),
                UnFn::Sinh => v.sinh(),
                UnFn::Cosh => v.cosh(),
                UnFn::Exp => v.exp(),
                UnFn::Ln => v.ln(),
                UnFn::Sqrt => v.sqrt(),
                UnFn::Acos => v.acos(),
            };
            r.map_err(|err| scalar_err(e, err))
        }
        Node::Add(a, bb) => Ok(Scalar::add(&evaluate(a, p, b)?, &evaluate(bb, p, b)?)),
        Node::Mul(a, bb) => Ok(Scalar::mul(&evaluate(a, p, b)?, &evaluate(bb, p, b)?)),
        Node::Div(a, bb) => {
            let num = evaluate(a, p, b)?;
            let den = evaluate(bb, p, b)?;
            Scalar::div(&num, &den).map_err(|err| scalar_err(e, err))
        }
        Node::Pow(a, ex) => {
            let v = evaluate(a, p, b)?;
            v.pow_rational(ex).map_err(|err| scalar_err(e, err))
        }
    }
}

pub fn evaluate_f64(e: &Expr, p: &Point<f64>, b: &Bindings) -> Result<f64> {
    evaluate(e, p, b)
}

pub fn evaluate_exact(e: &Expr, p: &Point<BigRational>, b: &Bindings) -> Result<BigRational> {
    evaluate(e, p, b)
}
