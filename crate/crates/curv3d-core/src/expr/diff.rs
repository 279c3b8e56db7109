//! Exact symbolic differentiation. Formal derivatives of user functions are
//! tracked as prime counts, so d/dr H(r) prints as H'(r).

use super::{Expr, Node, UnFn};
use crate::error::{CurvError, Result};
use num_traits::One;

pub fn differentiate(e: &Expr, coord: &str) -> Result<Expr> {
    Ok(match e.node() {
        Node::Const(_) => Expr::int(0),
        Node::Sym(s) => {
            if s == coord {
                Expr::int(1)
            } else {
                Expr::int(0)
            }
        }
        Node::Func { name, primes, args } => {
            let dargs = args
                .iter()
                .map(|a| differentiate(a, coord))
                .collect::<Result<Vec<_>>>()?;
            if dargs.iter().all(|d| d.is_zero()) {
                return Ok(Expr::int(0));
            }
            if args.len() != 1 {
                return Err(CurvError::FormalDerivative { name: name.clone() });
            }
            let outer = Expr::func_primed(name.clone(), primes + 1, args.clone());
            Expr::mul(outer, dargs.into_iter().next().unwrap())
        }
        Node::Neg(a) => Expr::neg(differentiate(a, coord)?),
        Node::Un(f, a) => {
            let da = differentiate(a, coord)?;
            if da.is_zero() {
                return Ok(Expr::int(0));
            }
            let outer = match f {
                UnFn::Sin => Expr::un(UnFn::Cos, a.clone()),
                UnFn::Cos => Expr::neg(Expr::un(UnFn::Sin, a.clone())),
                UnFn::Sinh => Expr::un(UnFn::Cosh, a.clone()),
                UnFn::Cosh => Expr::un(UnFn::Sinh, a.clone()),
                UnFn::Exp => e.clone(),
                UnFn::Ln => return Ok(Expr::div(da, a.clone())),
                UnFn::Sqrt => {
                    return Ok(Expr::div(da, Expr::mul(Expr::int(2), e.clone())));
                }
                UnFn::Acos => {
                    let w = Expr::sqrt(Expr::sub(
                        Expr::int(1),
                        Expr::mul(a.clone(), a.clone()),
                    ));
                    return Ok(Expr::neg(Expr::div(da, w)));
                }
            };
            Expr::mul(outer, da)
        }
        Node::Add(a, b) => Expr::add(differentiate(a, coord)?, differentiate(b, coord)?),
        Node::Mul(a, b) => {
            let da = differentiate(a, coord)?;
            let db = differentiate(b, coord)?;
            Expr::add(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db))
        }
        Node::Div(a, b) => {
            let da = differentiate(a, coord)?;
            let db = differentiate(b, coord)?;
            if db.is_zero() {
                Expr::div(da, b.clone())
            } else {
                Expr::div(
                    Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db)),
                    Expr::pow_i(b.clone(), 2),
                )
            }
        }
        Node::Pow(a, ex) => {
            let da = differentiate(a, coord)?;
            if da.is_zero() {
                return Ok(Expr::int(0));
            }
            let lowered = Expr::pow(a.clone(), ex - num_rational::BigRational::one());
            Expr::mul(
                Expr::constant(ex.clone()),
                Expr::mul(lowered, da),
            )
        }
    })
}
